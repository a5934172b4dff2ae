"""Set-function inequality checkers and the seeded Shearer search harness."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .counting import CELL_CAP, counting_N
from .defaults import worker_count
from .groups import GroupSpec, all_subsets, subset_translate
from .measures import (
    Bernoulli,
    ConfigurationSpace,
    FiniteGroupInvariant,
    cond_shannon,
    shannon_entropy,
    uniform_bernoulli,
)
from .symbolic import (
    PATTERN_CAP,
    SystemSpec,
    cover_power,
    make_cover,
    trivial_cover,
    window_partition,
    zero_coordinate_partition,
)

TOL = 1e-9
FAMILIES = ("shannon", "cond_shannon", "counting", "cond_counting")


class SetFunctionOracle:
    """F -> one of H(P^F), H(P^F | Q^F), H(U^F), H(U^F | W^F).

    Subsets are given in full group coordinates (or effective ones) and are
    keyed by their projection to the effective group. The empty set has
    value 0. Counting families also expose the integer N.
    """

    def __init__(self, family: str, system, *, mu=None, P=None, Q=None, base="e",
                 cache: bool = True, cap: int = PATTERN_CAP, cell_cap: int = CELL_CAP):
        if family not in FAMILIES:
            raise ValueError(f"unknown oracle family {family!r}")
        if family.startswith("cond") and Q is None:
            raise ValueError(f"{family} needs a conditioning partition/cover")
        if family in ("shannon", "cond_shannon") and mu is None:
            raise ValueError(f"{family} needs a measure")
        self.family, self.system, self.mu, self.P, self.Q = family, system, mu, P, Q
        self.base, self.cap, self.cell_cap = base, cap, cell_cap
        self.use_cache = cache
        self._cache: dict = {}

    @property
    def exact(self) -> bool:
        return self.family in ("counting", "cond_counting")

    def key(self, F: Iterable) -> tuple:
        g = self.system.group
        return tuple(sorted({g.project(x) if len(x) == g.rank else tuple(x) for x in F}))

    def _evaluate(self, key: tuple):
        if not key:
            return (0.0, 1) if self.exact else (0.0, None)
        PF = cover_power(self.P, key, self.cap)
        if self.family == "shannon":
            return shannon_entropy(self.mu, PF, self.base), None
        if self.family == "cond_shannon":
            return cond_shannon(self.mu, PF, cover_power(self.Q, key, self.cap), self.base, self.cap), None
        W = trivial_cover(self.system) if self.family == "counting" else cover_power(self.Q, key, self.cap)
        res = counting_N(PF, W, self.base, self.cell_cap, self.cap)
        return res.log_value, res.n_value

    def _lookup(self, F):
        k = self.key(F)
        if not self.use_cache:
            return self._evaluate(k)
        if k not in self._cache:
            self._cache[k] = self._evaluate(k)
        return self._cache[k]

    def value(self, F) -> float:
        return self._lookup(F)[0]

    def n_value(self, F) -> int:
        if not self.exact:
            raise TypeError("integer N is only defined for counting oracles")
        return self._lookup(F)[1]

    __call__ = value

    def describe(self) -> dict:
        return {"family": self.family, "exact": self.exact}


class FastCondShannon:
    """H(P^F | Q^F) on a finite effective group via the configuration arrays."""

    family = "cond_shannon"
    exact = False

    def __init__(self, space: ConfigurationSpace, mu, P, Q, base="e"):
        self.space = space
        self.p = space.probabilities(mu)
        self.lab_P = space.labels(P)
        self.lab_Q = space.labels(Q)
        self.base = base
        self._cache: dict = {}

    def key(self, F) -> tuple:
        return tuple(sorted(set(F)))

    def _ids(self, labs, rows):
        ids = np.zeros(self.space.n_configs, dtype=np.int64)
        for lab in labs:
            for r in rows:
                ids = ids * (int(lab[r].max()) + 1) + lab[r]
                _, ids = np.unique(ids, return_inverse=True)
                ids = ids.reshape(-1)
        return ids

    def value(self, F) -> float:
        k = self.key(F)
        if k not in self._cache:
            if not k:
                self._cache[k] = 0.0
            else:
                rows = [self.space.index[g] for g in k]
                h_q = self.space.entropy(self.p, self._ids([self.lab_Q], rows), self.base)
                h_pq = self.space.entropy(self.p, self._ids([self.lab_P, self.lab_Q], rows), self.base)
                self._cache[k] = max(h_pq - h_q, 0.0)
        return self._cache[k]

    __call__ = value


@dataclass
class ViolationRecord:
    inequality: str
    sets: list
    left: float
    right: float
    magnitude: float
    exact: bool
    suspect: bool = False
    left_N: int | None = None
    right_N: int | None = None


@dataclass
class CheckReport:
    property: str
    oracle: dict
    checked: int = 0
    tol: float = TOL
    violations: list = field(default_factory=list)

    @property
    def confirmed(self) -> list:
        return [v for v in self.violations if not v.suspect]

    @property
    def passed(self) -> bool:
        return not self.confirmed

    @property
    def suspect(self) -> list:
        return [v for v in self.violations if v.suspect]

    def to_dict(self) -> dict:
        return {"property": self.property, "oracle": self.oracle, "checked": self.checked,
                "tol": self.tol, "passed": self.passed,
                "violations": [asdict(v) for v in self.confirmed],
                "suspect": [asdict(v) for v in self.suspect]}


def _fmt_sets(*sets) -> list:
    return [sorted(list(x) for x in s) for s in sets]


def _record(report, name, sets, left, right, tol, lN=None, rN=None, exact=False):
    report.checked += 1
    if exact:
        if lN > rN:
            report.violations.append(ViolationRecord(name, _fmt_sets(*sets), left, right,
                                                      math.log(lN) - math.log(rN), True, False, lN, rN))
        return
    excess = left - right
    if excess > tol:
        report.violations.append(ViolationRecord(name, _fmt_sets(*sets), left, right, excess,
                                                  False, excess <= 10 * tol))


def subset_pairs(window: Iterable) -> list[tuple[frozenset, frozenset]]:
    """All unordered pairs (with repetition) of subsets of ``window``."""
    subs = all_subsets(window)
    return [(subs[i], subs[j]) for i in range(len(subs)) for j in range(i, len(subs))]


def check_subadditivity(oracle, family, tol: float = TOL) -> CheckReport:
    """h(F1 u F2) <= h(F1) + h(F2); integer form N(u) <= N(F1) N(F2) for counting oracles."""
    rep = CheckReport("subadditivity", oracle.describe(), tol=tol)
    for F1, F2 in family:
        F1, F2 = frozenset(F1), frozenset(F2)
        U = F1 | F2
        if oracle.exact:
            _record(rep, "subadditivity", (F1, F2), oracle(U), oracle(F1) + oracle(F2), tol,
                    oracle.n_value(U), oracle.n_value(F1) * oracle.n_value(F2), exact=True)
        else:
            _record(rep, "subadditivity", (F1, F2), oracle(U), oracle(F1) + oracle(F2), tol)
    return rep


def check_strong_subadditivity(oracle, family, tol: float = TOL) -> CheckReport:
    """h(F1 u F2) + h(F1 n F2) <= h(F1) + h(F2)."""
    rep = CheckReport("strong_subadditivity", oracle.describe(), tol=tol)
    for F1, F2 in family:
        F1, F2 = frozenset(F1), frozenset(F2)
        U, I = F1 | F2, F1 & F2
        left, right = oracle(U) + oracle(I), oracle(F1) + oracle(F2)
        if oracle.exact:
            _record(rep, "strong_subadditivity", (F1, F2), left, right, tol,
                    oracle.n_value(U) * oracle.n_value(I),
                    oracle.n_value(F1) * oracle.n_value(F2), exact=True)
        else:
            _record(rep, "strong_subadditivity", (F1, F2), left, right, tol)
    return rep


class ShearerFamilyError(ValueError):
    pass


def validate_k_cover(F, cover_family, k: int) -> None:
    F = frozenset(F)
    if k < 1:
        raise ShearerFamilyError("multiplicity k must be >= 1")
    for i, E in enumerate(cover_family):
        if not frozenset(E) <= F:
            raise ShearerFamilyError(f"set {i} of the family is not contained in F")
    for x in F:
        c = sum(1 for E in cover_family if x in E)
        if c < k:
            raise ShearerFamilyError(f"element {x} is covered {c} < {k} times")


def check_shearer(oracle, F, cover_family, k: int, tol: float = TOL) -> CheckReport:
    """h(F) <= (1/k) sum h(E_i) for a family covering each point of F at least k times."""
    F = frozenset(F)
    cover_family = [frozenset(E) for E in cover_family]
    validate_k_cover(F, cover_family, k)
    rep = CheckReport("shearer", oracle.describe(), tol=tol)
    left = oracle(F)
    right = sum(oracle(E) for E in cover_family) / k
    if oracle.exact:
        lN = oracle.n_value(F) ** k
        rN = math.prod(oracle.n_value(E) for E in cover_family)
        _record(rep, "shearer", (F, *cover_family), left, right, tol, lN, rN, exact=True)
    else:
        _record(rep, "shearer", (F, *cover_family), left, right, tol)
    return rep


def k_covers(F, k: int, max_size: int | None = None, max_family: int | None = None):
    """All families of distinct nonempty subsets of F (size <= max_size) covering
    every element at least k times, in a deterministic order."""
    F = sorted(F)
    max_size = len(F) if max_size is None else max_size
    pool = [frozenset(c) for r in range(1, max_size + 1) for c in itertools.combinations(F, r)]
    max_family = len(pool) if max_family is None else max_family
    for r in range(1, max_family + 1):
        for fam in itertools.combinations(pool, r):
            if all(sum(1 for E in fam if x in E) >= k for x in F):
                yield list(fam)


def check_invariance(oracle, family, translates, tol: float = TOL) -> CheckReport:
    """h(F + g) = h(F) for every F in family and g in translates."""
    rep = CheckReport("invariance", oracle.describe(), tol=tol)
    group = oracle.system.group
    for F in family:
        F = frozenset(F)
        for g in translates:
            Fg = subset_translate(group, F, g)
            a, b = oracle(Fg), oracle(F)
            rep.checked += 1
            if oracle.exact:
                na, nb = oracle.n_value(Fg), oracle.n_value(F)
                if na != nb:
                    rep.violations.append(ViolationRecord(
                        "invariance", _fmt_sets(F, [g]), a, b, abs(math.log(na) - math.log(nb)),
                        True, False, na, nb))
            elif abs(a - b) > tol:
                rep.violations.append(ViolationRecord(
                    "invariance", _fmt_sets(F, [g]), a, b, abs(a - b), False, abs(a - b) <= 10 * tol))
    return rep


# Example: strong subadditivity fails for conditional entropies on Z_3

def example82_setup(trivial_z: bool = False):
    """Full 2-shift on Z_3 (or on Z x Z_3 with the Z coordinate acting trivially)."""
    if trivial_z:
        group = GroupSpec(1, (3,), (True, False))
        elem = lambda i: (0, i)  # noqa: E731
    else:
        group = GroupSpec(0, (3,))
        elem = lambda i: (i,)  # noqa: E731
    system = SystemSpec(group, ("a", "b"))
    P = zero_coordinate_partition(system)
    Q = cover_power(P, [elem(0), elem(1)])
    R = cover_power(P, [elem(1), elem(2)])
    D, E, F = frozenset({elem(0)}), frozenset({elem(1)}), frozenset({elem(2)})
    return system, P, Q, R, (D, E, F)


def example82(trivial_z: bool = False) -> dict:
    system, P, Q, R, (D, E, F) = example82_setup(trivial_z)
    mu = uniform_bernoulli(2)
    counting = SetFunctionOracle("cond_counting", system, P=Q, Q=R)
    shannon = SetFunctionOracle("cond_shannon", system, mu=mu, P=Q, Q=R)
    names = ["E", "DuEuF", "DuE", "EuF"]
    sets = [E, D | E | F, D | E, E | F]
    N_values = [counting.n_value(S) for S in sets]
    H_values = [shannon(S) for S in sets]
    pair = [(D | E, E | F)]
    ssa_counting = check_strong_subadditivity(counting, pair)
    ssa_shannon = check_strong_subadditivity(shannon, pair)
    log2 = math.log(2)
    failures = []
    if N_values != [2, 1, 1, 1]:
        failures.append(f"N values {N_values} != [2, 1, 1, 1]")
    for name, h, want in zip(names, H_values, [log2, 0.0, 0.0, 0.0]):
        if abs(h - want) > 1e-12:
            failures.append(f"H({name}) = {h}, expected {want}")
    for label, rep in (("counting", ssa_counting), ("shannon", ssa_shannon)):
        if len(rep.violations) != 1 or abs(rep.violations[0].magnitude - log2) > 1e-12:
            failures.append(f"{label}: expected one strong-subadditivity violation of size log 2")
    return {
        "group": system.group.to_dict(),
        "sets": {"D": sorted(D), "E": sorted(E), "F": sorted(F)},
        "pairs": names,
        "N": dict(zip(names, N_values)),
        "H_shannon": dict(zip(names, H_values)),
        "strong_subadditivity": {"counting": ssa_counting.to_dict(), "shannon": ssa_shannon.to_dict()},
        "passed": not failures,
        "failures": failures,
    }


# Search harness for Shearer's inequality of conditional Shannon entropy

GROUPS = [(m,) for m in range(2, 13)] + [(2, 2), (2, 3), (2, 4), (3, 3), (2, 2, 2), (2, 6)]


@dataclass
class GenConfig:
    max_group_order: int = 12
    max_alphabet: int = 3
    max_partition_window: int = 3
    max_denominator: int = 64
    config_cap: int = 4096
    max_k: int = 3
    tol: float = TOL

    def to_dict(self) -> dict:
        return asdict(self)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream: trial t always sees the same generator."""
    return np.random.default_rng([int(seed), int(trial)])


def _random_measure(rng, space: ConfigurationSpace, k: int, den: int):
    if rng.random() < 0.5:
        cuts = np.sort(rng.integers(0, den + 1, size=k - 1))
        parts = np.diff(np.concatenate([[0], cuts, [den]]))
        return Bernoulli(tuple(Fraction(int(c), den) for c in parts))
    orbits = space.orbits()
    weights = [0] * len(orbits)
    remaining = den
    for o in rng.permutation(len(orbits)):
        size = len(orbits[o])
        w = int(rng.integers(0, remaining // size + 1))
        weights[o] = w
        remaining -= w * size
    fixed = [i for i, o in enumerate(orbits) if len(o) == 1]
    weights[fixed[int(rng.integers(len(fixed)))]] += remaining
    probs = {}
    for o, w in zip(orbits, weights):
        for row in o:
            if w:
                probs[tuple(int(s) for s in space.configs[row])] = Fraction(w, den)
    return FiniteGroupInvariant(space.group, k, probs)


def _random_partition(rng, system, elements, max_window: int, coarsen_of=None):
    if coarsen_of is not None:
        n = len(coarsen_of.cells)
        r = int(rng.integers(1, n + 1))
        labels = rng.integers(0, r, size=n)
        groups = [[i for i in range(n) if labels[i] == v] for v in sorted(set(labels.tolist()))]
        cells = [frozenset().union(*(coarsen_of.cells[i] for i in g)) for g in groups]
        return make_cover(system, coarsen_of.window, cells, partition=True)
    size = int(rng.integers(1, min(max_window, len(elements)) + 1))
    picks = sorted(rng.choice(len(elements), size=size, replace=False).tolist())
    window = [elements[i] for i in picks]
    base = window_partition(system, window)
    n = len(base.cells)
    r = int(rng.integers(1, n + 1))
    labels = rng.integers(0, r, size=n)
    cells = [frozenset().union(*(base.cells[i] for i in range(n) if labels[i] == v))
             for v in sorted(set(labels.tolist()))]
    return make_cover(system, base.window, cells, partition=True)


def _random_k_cover(rng, F: list, k: int) -> list[frozenset]:
    family = []
    for _ in range(k):
        blocks = int(rng.integers(2 if len(F) > 1 else 1, len(F) + 1))
        assign = rng.integers(0, blocks, size=len(F))
        for b in range(blocks):
            E = frozenset(F[i] for i in range(len(F)) if assign[i] == b)
            if E:
                family.append(E)
    if rng.random() < 0.3:
        extra = frozenset(F[i] for i in range(len(F)) if rng.random() < 0.5)
        if extra:
            family.append(extra)
    return family


def run_trial(seed: int, trial: int, cfg: GenConfig) -> dict:
    rng = trial_rng(seed, trial)
    k_sym = int(rng.integers(2, cfg.max_alphabet + 1))
    options = [m for m in GROUPS if math.prod(m) <= cfg.max_group_order
               and k_sym ** math.prod(m) <= cfg.config_cap]
    moduli = options[int(rng.integers(len(options)))]
    system = SystemSpec(GroupSpec(0, moduli), tuple("abc"[:k_sym]))
    space = ConfigurationSpace(system, cfg.config_cap)
    elements = space.elements
    mu = _random_measure(rng, space, k_sym, cfg.max_denominator)
    P = _random_partition(rng, system, elements, cfg.max_partition_window)
    if rng.random() < 0.5:
        Q = _random_partition(rng, system, elements, cfg.max_partition_window, coarsen_of=P)
    else:
        Q = _random_partition(rng, system, elements, cfg.max_partition_window)
    size = int(rng.integers(min(2, len(elements)), len(elements) + 1))
    F = sorted(elements[i] for i in rng.choice(len(elements), size=size, replace=False).tolist())
    k = int(rng.integers(1, cfg.max_k + 1))
    family = _random_k_cover(rng, F, k)
    oracle = FastCondShannon(space, mu, P, Q)
    hF = oracle(F)
    hE = [oracle(E) for E in family]
    margin = sum(hE) / k - hF
    return {
        "trial": trial,
        "group": list(moduli),
        "alphabet": k_sym,
        "measure": mu.to_dict(),
        "P": {"window": [list(w) for w in P.window], "cells": P.sorted_cells()},
        "Q": {"window": [list(w) for w in Q.window], "cells": Q.sorted_cells()},
        "F": [list(x) for x in F],
        "k": k,
        "family": [sorted(list(x) for x in E) for E in family],
        "h_F": hF,
        "h_family": hE,
        "margin": margin,
    }


def search_shearer_conditional(seed: int, trials: int, gen_config: GenConfig | None = None,
                               threads: int | None = None, keep: int = 10) -> dict:
    """Sample random instances and test Shearer's inequality for H(P^F | Q^F).

    Records violations (margin below -tol) and the ``keep`` smallest margins.
    The report depends only on (seed, trials, gen_config).
    """
    cfg = gen_config or GenConfig()
    threads = threads or worker_count()
    if threads > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: run_trial(seed, t, cfg), range(trials)))
    else:
        results = [run_trial(seed, t, cfg) for t in range(trials)]
    results.sort(key=lambda r: r["trial"])
    violations = [r for r in results if r["margin"] < -cfg.tol]
    tightest = sorted(results, key=lambda r: (r["margin"], r["trial"]))[:keep]
    return {
        "seed": int(seed),
        "trials": int(trials),
        "gen_config": cfg.to_dict(),
        "violations": violations,
        "tightest": tightest,
        "best_margin": tightest[0]["margin"] if tightest else None,
    }
