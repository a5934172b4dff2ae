import json
import math

import pytest

from amenent.cli import emit, main, normalize


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.strip() == "0.1.0"


def test_counting_json(capsys, data):
    code, out, _ = run(capsys, "counting", "--system", data / "golden_mean.json",
                       "--coverU", data / "P0.json", "--nmax", 5)
    rep = json.loads(out)
    assert code == 0 and rep["tool"] == "amenent" and rep["command"] == "counting"
    assert [r["N"] for r in rep["result"]["rows"]] == [2, 3, 5, 8, 13]
    assert rep["config"]["defaults"]["cell_cap"] == 24


def test_relative_counting_csv(capsys, data):
    code, out, _ = run(capsys, "counting", "--system", data / "full_shift.json", "--coverU",
                       data / "P01.json", "--coverW", data / "P0.json", "--nmax", 2,
                       "--relative", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "n,window_size,N,value,running_inf,N_conditional,exact,stabilized_at"
    assert len(lines) == 3


def test_measure_entropy_modes(capsys, data):
    base = ["measure-entropy", "--system", data / "full_shift.json", "--measure",
            data / "bernoulli.json", "--P", data / "P0.json"]
    code, out, _ = run(capsys, *base, "--mode", "shannon")
    h = -(1 / 3 * math.log(1 / 3) + 2 / 3 * math.log(2 / 3))
    assert json.loads(out)["result"]["H"] == pytest.approx(h, rel=1e-11)
    code, out, _ = run(capsys, *base, "--mode", "shannon", "--log-base", "2")
    assert json.loads(out)["result"]["H"] == pytest.approx(h / math.log(2), rel=1e-11)
    code, out, err = run(capsys, *base, "--mode", "pinsker")
    assert code == 2 and "--Q" in err


def test_check_exit_codes(capsys, data):
    code, out, _ = run(capsys, "check", "--property", "strong-subadd", "--oracle", "counting",
                       "--system", data / "full_shift.json", "--P", data / "P0.json", "--box", 3)
    assert code == 0 and json.loads(out)["result"]["passed"]
    code, out, _ = run(capsys, "check", "--property", "shearer", "--oracle", "cond-counting",
                       "--system", data / "full_shift.json", "--P", data / "P01.json",
                       "--Q", data / "P0.json", "--F", "[0, 1, 2]", "--k", 2,
                       "--family", "[[0, 1], [1, 2], [0, 2]]")
    assert code == 0


def test_example_command(capsys):
    code, out, _ = run(capsys, "example82", "--trivial-z")
    assert code == 0 and json.loads(out)["result"]["N"]["E"] == 2


def test_tile_and_core(capsys):
    code, out, _ = run(capsys, "tile", "--n", 7, "--tiles", "[[0, 1], [0, 1, 2]]")
    pieces = json.loads(out)["result"]["pieces"]
    assert code == 0 and [p["tile"] for p in pieces] == [0, 0, 1]
    code, out, _ = run(capsys, "tile", "--n", 1, "--tiles", "[[0, 1], [0, 1, 2]]")
    assert code == 1 and not json.loads(out)["result"]["feasible"]
    code, out, _ = run(capsys, "core", "--F", "[0, 1, 2, 3, 4]", "--B", "[-1, 0, 1]")
    assert json.loads(out)["result"]["core"] == [[1], [2], [3]]


def test_varp_command(capsys, data):
    code, out, _ = run(capsys, "varp", "--system", data / "z2_full.json", "--P", data / "P01.json",
                       "--Q", data / "P01_parity.json", "--restarts", 4, "--oracle", "grid")
    res = json.loads(out)["result"]
    assert code == 0 and res["counting_N"] == 2 and res["passed"]


def test_validation_errors_exit_2(capsys, data, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "tail", "--system", bad)
    assert code == 2 and "parse error" in err
    code, _, err = run(capsys, "tail", "--system", tmp_path / "missing.json")
    assert code == 2 and "not found" in err
    cover = tmp_path / "cover.json"
    cover.write_text(json.dumps({"window": [[0]], "cells": [["0"], ["0", "1"]], "partition": True}))
    code, _, err = run(capsys, "counting", "--system", data / "full_shift.json", "--coverU", cover)
    assert code == 2 and "overlap" in err
    code, _, _ = run(capsys, "tail", "--system", data / "full_shift.json", "--tol", 2)
    assert code == 2
    code, _, _ = run(capsys, "no-such-command")
    assert code == 2


def test_markov_must_be_stationary(capsys, data, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"variant": "markov_z", "transition": [["1/2", "1/2"], [1, 0]],
                             "stationary": ["1/2", "1/2"]}))
    code, _, err = run(capsys, "measure-entropy", "--system", data / "golden_mean.json",
                       "--measure", m, "--P", data / "P0.json")
    assert code == 2 and "stationary" in err


def test_out_file_and_timing(capsys, data, tmp_path):
    out = tmp_path / "r.json"
    run(capsys, "tail", "--system", data / "full_shift.json", "--kmax", 1, "--mmax", 2,
        "--nmax", 2, "--out", out, "--timing")
    rep = json.loads(out.read_text())
    assert "wall_time" in rep and "out" not in rep["config"]


def test_normalize_and_emit():
    rep = {"result": {"a": 1 / 3, "b": 10 ** 30, "c": float("inf"), "rows": []}, "command": "x"}
    n = normalize(rep)
    assert n["result"]["a"] == 0.333333333333
    assert n["result"]["b"] == 10 ** 30
    assert n["result"]["c"] == "inf"
    assert emit(rep, "csv") == b"\n"
    rep["result"]["columns"] = ["n", "value"]
    assert emit(rep, "csv") == b"n,value\n"
    assert emit(rep, "human").startswith(b"amenent x")
