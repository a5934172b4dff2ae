"""Loading and validating the JSON documents used by the command line.

System document::

    {"group": {"free_rank": 1, "finite_moduli": [], "trivial_mask": [false]},
     "alphabet": ["a", "b"],
     "forbidden": [{"window": [[0], [1]], "symbols": ["b", "b"]}]}

Cover document (windows in effective coordinates, one pattern per list entry,
symbols listed in the order of ``window``; a string is read symbol by symbol)::

    {"window": [[0]], "cells": [["a"], ["b"]], "partition": true}

Shorthands: ``{"window_partition": [[0], [1]]}``, ``{"folner_partition": k}``
and ``{"trivial": true}``.

Measure document::

    {"variant": "bernoulli", "p": ["1/2", "1/2"]}
    {"variant": "markov_z", "transition": [["1/2", "1/2"], [1, 0]], "stationary": ["2/3", "1/3"]}
    {"variant": "finite_group", "probs": {"aab": "1/8", ...}}
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

from .groups import GroupError, GroupSpec
from .measures import Bernoulli, FiniteGroupInvariant, MarkovZ, MeasureError
from .symbolic import (
    CapExceeded,
    CoverError,
    Pattern,
    SystemSpec,
    folner_partition,
    make_cover,
    trivial_cover,
    window_partition,
)


class ConfigError(ValueError):
    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(path, "file not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"parse error: {exc}") from exc


def _coord(x) -> tuple:
    return (int(x),) if isinstance(x, int) else tuple(int(c) for c in x)


def _symbols(pattern, alphabet, n: int) -> tuple:
    if isinstance(pattern, str) and all(len(a) == 1 for a in alphabet):
        pattern = list(pattern)
    if len(pattern) != n:
        raise CoverError(f"pattern {pattern!r} does not match a window of size {n}")
    index = {a: i for i, a in enumerate(alphabet)}
    try:
        return tuple(index[s] for s in pattern)
    except KeyError as exc:
        raise CoverError(f"unknown symbol {exc.args[0]!r}") from exc


def parse_system(doc: dict) -> SystemSpec:
    group = GroupSpec.from_dict(doc.get("group", {"free_rank": 1}))
    alphabet = tuple(str(a) for a in doc["alphabet"])
    eff = group.effective()
    forbidden = []
    for f in doc.get("forbidden", []):
        window = [eff.reduce(_coord(w)) for w in f["window"]]
        forbidden.append(Pattern(tuple(window), _symbols(f["symbols"], alphabet, len(window))))
    return SystemSpec(group, alphabet, tuple(forbidden))


def parse_cover(doc: dict, system):
    eff = system.effective_group
    if doc.get("trivial"):
        return trivial_cover(system)
    if "window_partition" in doc:
        return window_partition(system, [eff.reduce(_coord(w)) for w in doc["window_partition"]])
    if "folner_partition" in doc:
        return folner_partition(system, int(doc["folner_partition"]))
    given = [eff.reduce(_coord(w)) for w in doc["window"]]
    order = sorted(range(len(given)), key=lambda i: given[i])
    cells = []
    for cell in doc["cells"]:
        pats = []
        for p in cell:
            syms = _symbols(p, system.alphabet, len(given))
            pats.append(tuple(syms[i] for i in order))
        cells.append(pats)
    return make_cover(system, given, cells, doc.get("partition"))


def parse_measure(doc: dict, system):
    variant = doc.get("variant")
    if variant == "bernoulli":
        mu = Bernoulli(tuple(doc["p"]))
    elif variant == "markov_z":
        mu = MarkovZ(tuple(map(tuple, doc["transition"])), tuple(doc["stationary"]))
    elif variant == "finite_group":
        eff = system.effective_group
        if not eff.is_finite:
            raise MeasureError("finite_group measure needs a finite effective group")
        n = eff.order
        raw = doc["probs"]
        if isinstance(raw, list):
            configs = itertools.product(range(system.n_symbols), repeat=n)
            probs = dict(zip(configs, raw))
        else:
            probs = {_symbols(k.split(",") if "," in k else k, system.alphabet, n): v
                     for k, v in raw.items()}
        mu = FiniteGroupInvariant(eff, system.n_symbols, probs)
    else:
        raise MeasureError(f"unknown measure variant {variant!r}")
    mu.validate(system)
    return mu


def load_system(path) -> SystemSpec:
    try:
        return parse_system(read_json(path))
    except (KeyError, TypeError) as exc:
        raise ConfigError(path, f"missing or malformed field {exc}") from exc
    except (GroupError, CoverError, CapExceeded) as exc:
        raise ConfigError(path, str(exc)) from exc


def load_cover(path, system):
    try:
        return parse_cover(read_json(path), system)
    except (KeyError, TypeError) as exc:
        raise ConfigError(path, f"missing or malformed field {exc}") from exc
    except (GroupError, CoverError, CapExceeded) as exc:
        raise ConfigError(path, str(exc)) from exc


def load_measure(path, system):
    try:
        return parse_measure(read_json(path), system)
    except (KeyError, TypeError) as exc:
        raise ConfigError(path, f"missing or malformed field {exc}") from exc
    except (MeasureError, CoverError, CapExceeded) as exc:
        raise ConfigError(path, str(exc)) from exc
