"""Command-line front end: ``amenent <subcommand> ...``.

Exit status: 0 on success, 1 when a check or assertion fails, 2 on usage
or validation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_cover, load_measure, load_system
from .counting import topo_cond_sequence, topo_rel_sequence
from .defaults import DEFAULTS
from .groups import GroupError, GroupSpec, all_subsets, b_core, folner_box, invariance_defect, tile_box
from .inequalities import (
    GenConfig,
    SetFunctionOracle,
    check_invariance,
    check_shearer,
    check_strong_subadditivity,
    check_subadditivity,
    example82,
    k_covers,
    search_shearer_conditional,
    subset_pairs,
)
from .measures import cond_dyn_table, dyn_entropy_table, pinsker_gap_table, shannon_entropy
from .symbolic import CapExceeded, CoverError, refines, trivial_cover
from .varcheck import OptimizerConfig, VarCheckError, tail_table, varprinciple_report


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- emission

def normalize(obj):
    """JSON-ready copy: 12 significant digits for floats, exact ints kept."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset, np.ndarray)):
        items = list(obj)
        if isinstance(obj, (set, frozenset)):
            items = sorted(items)
        return [normalize(v) for v in items]
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _table(result: dict):
    for key in ("rows", "entries", "tightest", "pieces"):
        if isinstance(result.get(key), list):
            return result[key], result.get("columns")
    return None, result.get("columns")


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else str(v)


def emit(report: dict, fmt: str = "json") -> bytes:
    report = normalize(report)
    if fmt == "json":
        return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode()
    result = report.get("result", {})
    rows, columns = _table(result) if isinstance(result, dict) else (None, None)
    if fmt == "csv":
        if rows is None:
            # no table: one row of the scalar fields
            columns = sorted(k for k, v in result.items() if not isinstance(v, (list, dict)))
            rows = [{k: result[k] for k in columns}]
        else:
            columns = columns or sorted({k for r in rows for k in r})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        return buf.getvalue().encode()
    if fmt == "human":
        lines = [f"amenent {report.get('command', '')} (version {report.get('version', '')})"]
        scalars = {k: v for k, v in result.items() if not isinstance(v, (list, dict))} \
            if isinstance(result, dict) else {"result": result}
        width = max((len(k) for k in scalars), default=0)
        for k in sorted(scalars):
            lines.append(f"{k.ljust(width)}  {_cell(scalars[k])}")
        if rows:
            columns = columns or sorted({k for r in rows for k in r})
            cells = [[_cell(r.get(c)) for c in columns] for r in rows]
            widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
            lines.append("  ".join(c.rjust(wd) for c, wd in zip(columns, widths)))
            for row in cells:
                lines.append("  ".join(v.rjust(wd) for v, wd in zip(row, widths)))
        return ("\n".join(lines) + "\n").encode()
    raise UsageError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------- helpers

def _json_arg(text: str):
    p = Path(text)
    if p.suffix == ".json" or p.exists():
        try:
            return json.loads(p.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(text, "file not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(text, f"parse error: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"not valid JSON: {text!r}") from exc


def _coords(items, group: GroupSpec) -> list[tuple]:
    out = []
    for x in items:
        t = (int(x),) if isinstance(x, int) else tuple(int(c) for c in x)
        out.append(group.reduce(t))
    return out


def _group_arg(args) -> GroupSpec:
    if args.group:
        return GroupSpec.from_dict(_json_arg(args.group))
    return GroupSpec(1)


def _config_echo(args) -> dict:
    # execution-only settings stay out so reports are byte-identical across them
    skip = {"func", "out", "threads"}
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    echo["defaults"] = DEFAULTS
    return echo


# ---------------------------------------------------------------- commands

def cmd_counting(args):
    system = load_system(args.system)
    U = load_cover(args.coverU, system)
    W = load_cover(args.coverW, system) if args.coverW else trivial_cover(system)
    if args.relative:
        table = topo_rel_sequence(system, U, W, args.nmax, plateau=args.plateau, base=args.log_base,
                                  cell_cap=args.cell_cap, cap=args.pattern_cap)
    else:
        table = topo_cond_sequence(system, U, W, args.nmax, base=args.log_base,
                                   cell_cap=args.cell_cap, cap=args.pattern_cap)
    result = table.to_dict()
    result["language"] = system.describe()
    result["columns"] = ["n", "window_size", "N", "value", "running_inf"] + \
        (["N_conditional", "exact", "stabilized_at"] if args.relative else [])
    return result, 0


def cmd_measure_entropy(args):
    system = load_system(args.system)
    mu = load_measure(args.measure, system)
    P = load_cover(args.P, system)
    Q = load_cover(args.Q, system) if args.Q else None
    base, cap = args.log_base, args.pattern_cap
    if args.mode == "shannon":
        return {"H": shannon_entropy(mu, P, base)}, 0
    if args.mode == "dynamical":
        res = dyn_entropy_table(mu, P, args.nmax, base, cap).to_dict()
        res["columns"] = ["n", "window_size", "H", "normalized", "running_inf"]
        return res, 0
    if Q is None:
        raise UsageError(f"--Q is required for mode {args.mode}")
    if args.mode == "conditional":
        res = cond_dyn_table(mu, P, Q, args.nmax, base, cap).to_dict()
        res["columns"] = ["n", "window_size", "H", "normalized", "running_inf"]
        return res, 0
    rows = pinsker_gap_table(mu, P, Q, args.nmax, args.tol, base=base, cap=cap)
    return {"rows": rows, "final_gap": abs(rows[-1]["gap"]) if rows else None,
            "columns": ["n", "window_size", "conditional", "relative", "gap", "exact"]}, 0


def _oracle(args, system):
    fam = args.oracle.replace("-", "_")
    P = load_cover(args.P, system)
    Q = load_cover(args.Q, system) if args.Q else None
    mu = load_measure(args.measure, system) if args.measure else None
    if fam in ("shannon", "cond_shannon") and mu is None:
        raise UsageError(f"oracle {args.oracle} needs --measure")
    if fam.startswith("cond") and Q is None:
        raise UsageError(f"oracle {args.oracle} needs --Q")
    return SetFunctionOracle(fam, system, mu=mu, P=P, Q=Q, base=args.log_base,
                             cap=args.pattern_cap, cell_cap=args.cell_cap)


def cmd_check(args):
    system = load_system(args.system)
    oracle = _oracle(args, system)
    group = system.group
    if args.window:
        window = _coords(_json_arg(args.window), group)
    else:
        window = sorted(folner_box(group, args.box))
    if args.property == "subadd":
        reports = [check_subadditivity(oracle, subset_pairs(window), args.tol)]
    elif args.property == "strong-subadd":
        reports = [check_strong_subadditivity(oracle, subset_pairs(window), args.tol)]
    elif args.property == "invariance":
        translates = _coords(_json_arg(args.translates), group) if args.translates else \
            [group.zero()]
        reports = [check_invariance(oracle, all_subsets(window), translates, args.tol)]
    else:
        F = _coords(_json_arg(args.F), group) if args.F else window
        if args.family:
            families = [[_coords(E, group) for E in _json_arg(args.family)]]
        else:
            families = list(k_covers(F, args.k, args.max_size, args.max_family))
        reports = [check_shearer(oracle, F, fam, args.k, args.tol) for fam in families]
    passed = all(r.passed for r in reports)
    return {"property": args.property, "oracle": oracle.describe(), "passed": passed,
            "checks": len(reports), "reports": [r.to_dict() for r in reports]}, 0 if passed else 1


def cmd_example82(args):
    res = example82(trivial_z=args.trivial_z)
    return res, 0 if res["passed"] else 1


def cmd_search(args):
    cfg = GenConfig(tol=args.tol)
    res = search_shearer_conditional(args.seed, args.trials, cfg, threads=args.threads)
    return res, 0


def cmd_varp(args):
    system = load_system(args.system)
    P = load_cover(args.P, system)
    Q = load_cover(args.Q, system)
    if not refines(P, Q):
        raise UsageError("P must refine Q")
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed, tol=args.varp_tol)
    resolution = args.resolution if args.oracle == "grid" else None
    rep = varprinciple_report(system, P, Q, cfg, resolution, args.cell_cap, args.pattern_cap)
    out = rep.to_dict()
    ok = rep.passed
    if rep.grid_value is not None:
        out["grid_gap"] = abs(rep.grid_value - rep.optimizer_value)
        ok = ok and out["grid_gap"] <= args.varp_tol
    out["passed"] = ok
    return out, 0 if ok else 1


def cmd_tail(args):
    system = load_system(args.system)
    res = tail_table(system, args.kmax, args.mmax, args.nmax, args.cell_cap, args.pattern_cap).to_dict()
    res["columns"] = ["k", "m", "value"]
    return res, 0


def cmd_tile(args):
    group = _group_arg(args)
    F = folner_box(group, args.n)
    tiles = [_coords(t, group) for t in _json_arg(args.tiles)]
    try:
        dec = tile_box(group, F, tiles)
    except GroupError as exc:
        return {"feasible": False, "reason": str(exc), "size": len(F)}, 1
    res = dec.to_dict()
    res.update({"feasible": True, "size": len(F)})
    return res, 0


def cmd_core(args):
    group = _group_arg(args)
    F = _coords(_json_arg(args.F), group)
    B = _coords(_json_arg(args.B), group)
    core = b_core(group, F, B)
    return {"core": sorted(core), "core_size": len(core), "size": len(set(F)),
            "invariance_defect": invariance_defect(group, F, B)}, 0


# ---------------------------------------------------------------- parser

def _common(p):
    p.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    p.add_argument("--log-base", choices=["e", "2"], default="e")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv", "human"], default="json")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.add_argument("--pattern-cap", type=int, default=DEFAULTS["pattern_cap"])
    p.add_argument("--cell-cap", type=int, default=DEFAULTS["cell_cap"])
    p.add_argument("--seed", type=int, default=DEFAULTS["seed"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amenent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("counting", help="topological conditional / relative entropy tables")
    p.add_argument("--system", required=True)
    p.add_argument("--coverU", required=True)
    p.add_argument("--coverW")
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--relative", action="store_true")
    p.add_argument("--plateau", type=int, default=DEFAULTS["plateau"])
    p.set_defaults(func=cmd_counting)

    p = sub.add_parser("measure-entropy", help="Shannon and dynamical entropies of a measure")
    p.add_argument("--system", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--P", required=True)
    p.add_argument("--Q")
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--mode", choices=["shannon", "dynamical", "conditional", "pinsker"],
                   default="dynamical")
    p.set_defaults(func=cmd_measure_entropy)

    p = sub.add_parser("check", help="test an inequality for a set-function oracle")
    p.add_argument("--property", required=True,
                   choices=["subadd", "strong-subadd", "shearer", "invariance"])
    p.add_argument("--oracle", required=True,
                   choices=["shannon", "cond-shannon", "counting", "cond-counting"])
    p.add_argument("--system", required=True)
    p.add_argument("--P", required=True)
    p.add_argument("--Q")
    p.add_argument("--measure")
    p.add_argument("--window", help="JSON list of group elements (subsets are enumerated)")
    p.add_argument("--box", type=int, default=3, help="use the Folner box of this size as window")
    p.add_argument("--translates", help="JSON list of group elements")
    p.add_argument("--F", help="JSON list of group elements for Shearer")
    p.add_argument("--family", help="JSON list of subsets for Shearer")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--max-size", type=int)
    p.add_argument("--max-family", type=int, default=4)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("example82", help="exact failure of strong subadditivity on Z_3")
    p.add_argument("--trivial-z", action="store_true", help="use Z x Z_3 with Z acting trivially")
    p.set_defaults(func=cmd_example82)

    p = sub.add_parser("search-shearer", help="seeded search for Shearer violations")
    p.add_argument("--trials", type=int, default=DEFAULTS["search_trials"])
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("varp", help="conditional variational principle on a finite group")
    p.add_argument("--system", required=True)
    p.add_argument("--P", required=True)
    p.add_argument("--Q", required=True)
    p.add_argument("--restarts", type=int, default=DEFAULTS["restarts"])
    p.add_argument("--oracle", choices=["none", "grid"], default="none")
    p.add_argument("--resolution", type=float, default=DEFAULTS["grid_resolution"])
    p.add_argument("--varp-tol", type=float, default=DEFAULTS["varp_tol"])
    p.set_defaults(func=cmd_varp)

    p = sub.add_parser("tail", help="truncated tail-entropy table")
    p.add_argument("--system", required=True)
    p.add_argument("--kmax", type=int, default=DEFAULTS["tail_k_max"])
    p.add_argument("--mmax", type=int, default=DEFAULTS["tail_m_max"])
    p.add_argument("--nmax", type=int, default=DEFAULTS["tail_n_max"])
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("tile", help="exact tiling of a Folner box")
    p.add_argument("--group", help="GroupSpec JSON (inline or file); default Z")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tiles", required=True, help="JSON list of tiles, each a list of elements")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("core", help="B-core and invariance defect of a finite set")
    p.add_argument("--group", help="GroupSpec JSON (inline or file); default Z")
    p.add_argument("--F", required=True)
    p.add_argument("--B", required=True)
    p.set_defaults(func=cmd_core)

    for sp in sub.choices.values():
        _common(sp)
    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed < 0 or args.seed >= 2 ** 64:
        parser.error("seed must be a 64-bit unsigned integer")
    if not 0 < args.tol < 1:
        parser.error("tolerance must lie in (0, 1)")
    if args.pattern_cap <= 0 or args.cell_cap <= 0:
        parser.error("caps must be positive")
    start = time.perf_counter()
    result, code = args.func(args)
    report = {"tool": "amenent", "version": __version__, "command": args.command,
              "config": _config_echo(args), "result": result}
    if args.timing:
        report["wall_time"] = time.perf_counter() - start
    return report, code, args


def main(argv=None) -> int:
    try:
        report, code, args = run(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ConfigError, UsageError, CoverError, GroupError, VarCheckError, CapExceeded) as exc:
        print(f"amenent: error: {exc}", file=sys.stderr)
        return 2
    data = emit(report, args.format)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return code


if __name__ == "__main__":
    sys.exit(main())
