"""Invariant measures on subshifts and the Shannon-type entropies they induce.

Probabilities are exact ``Fraction`` values whenever the measure parameters
are rational; entropies are floats.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .groups import GroupSpec, elem_add, folner_box
from .symbolic import (
    PATTERN_CAP,
    Cover,
    CoverError,
    canonical_window,
    cover_power,
    join,
)

log = logging.getLogger(__name__)

TOL = 1e-9
MARKOV_HULL_CAP = 512


class MeasureError(ValueError):
    pass


def parse_prob(x) -> Fraction | float:
    """Accept ints, Fractions, "p/q" strings and floats."""
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise MeasureError(f"cannot parse probability {x!r}") from exc
    if isinstance(x, float):
        return x
    raise MeasureError(f"cannot parse probability {x!r}")


def _sums_to_one(values, what: str) -> None:
    total = sum(values)
    if isinstance(total, Fraction):
        ok = total == 1
    else:
        ok = abs(total - 1) <= 1e-12
    if not ok:
        raise MeasureError(f"normalization: {what} sums to {total}, not 1")
    if any(v < 0 for v in values):
        raise MeasureError(f"{what} has negative entries")


@dataclass(frozen=True)
class Bernoulli:
    p: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(parse_prob(v) for v in self.p))
        _sums_to_one(self.p, "Bernoulli vector")

    def validate(self, system) -> None:
        if len(self.p) != system.n_symbols:
            raise MeasureError("Bernoulli vector length differs from the alphabet size")

    def prob(self, window, symbols):
        out = Fraction(1) if all(isinstance(v, Fraction) for v in self.p) else 1.0
        for s in symbols:
            out *= self.p[s]
        return out

    def to_dict(self) -> dict:
        return {"variant": "bernoulli", "p": [str(v) for v in self.p]}


@dataclass(frozen=True)
class MarkovZ:
    transition: tuple
    stationary: tuple

    def __post_init__(self):
        M = tuple(tuple(parse_prob(v) for v in row) for row in self.transition)
        pi = tuple(parse_prob(v) for v in self.stationary)
        object.__setattr__(self, "transition", M)
        object.__setattr__(self, "stationary", pi)
        k = len(pi)
        if any(len(row) != k for row in M) or len(M) != k:
            raise MeasureError("transition matrix must be square and match the stationary vector")
        for i, row in enumerate(M):
            _sums_to_one(row, f"transition row {i}")
        _sums_to_one(pi, "stationary vector")
        for j in range(k):
            lhs = sum(pi[i] * M[i][j] for i in range(k))
            if isinstance(lhs, Fraction) and isinstance(pi[j], Fraction):
                bad = lhs != pi[j]
            else:
                bad = abs(lhs - pi[j]) > 1e-12
            if bad:
                raise MeasureError("stationary vector does not satisfy pi M = pi")

    def validate(self, system) -> None:
        eff = system.effective_group
        if eff.free_rank != 1 or eff.finite_moduli:
            raise MeasureError("MarkovZ requires the effective group to be Z")
        if len(self.stationary) != system.n_symbols:
            raise MeasureError("Markov chain size differs from the alphabet size")

    def prob(self, window, symbols, hull_cap: int = MARKOV_HULL_CAP):
        if not window:
            return Fraction(1) if isinstance(self.stationary[0], Fraction) else 1.0
        fixed = {w[0]: s for w, s in zip(window, symbols)}
        lo, hi = min(fixed), max(fixed)
        if hi - lo + 1 > hull_cap:
            raise MeasureError(f"Markov hull width {hi - lo + 1} exceeds cap {hull_cap}")
        k = len(self.stationary)
        zero = self.stationary[0] * 0
        v = [self.stationary[s] if s == fixed[lo] else zero for s in range(k)]
        for pos in range(lo + 1, hi + 1):
            v = [sum(v[i] * self.transition[i][j] for i in range(k)) for j in range(k)]
            if pos in fixed:
                s = fixed[pos]
                v = [v[j] if j == s else zero for j in range(k)]
        return sum(v)

    def entropy_rate(self, base="e") -> float:
        k = len(self.stationary)
        h = -math.fsum(float(self.stationary[i]) * float(m) * math.log(float(m))
                       for i in range(k) for m in self.transition[i] if m > 0)
        return h if base in ("e", None) else h / math.log(float(base))

    def to_dict(self) -> dict:
        return {"variant": "markov_z", "transition": [[str(v) for v in r] for r in self.transition],
                "stationary": [str(v) for v in self.stationary]}


@dataclass(frozen=True, eq=False)
class FiniteGroupInvariant:
    """Shift-invariant distribution on A^{G_eff} for a finite effective group.

    ``probs`` maps configurations (symbol-index tuples aligned with the sorted
    group elements) to probabilities; missing configurations have mass 0.
    """

    group: GroupSpec
    n_symbols: int
    probs: dict
    _marginals: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.group.is_finite:
            raise MeasureError("finite-group measure needs a finite effective group")
        probs = {tuple(c): parse_prob(v) for c, v in self.probs.items()}
        object.__setattr__(self, "probs", probs)
        _sums_to_one(list(probs.values()), "configuration probabilities")
        elems = self.elements
        idx = {g: i for i, g in enumerate(elems)}
        for c in probs:
            if len(c) != len(elems) or any(not 0 <= s < self.n_symbols for s in c):
                raise MeasureError(f"bad configuration {c}")
        for g in elems:
            perm = [idx[elem_add(self.group, h, g)] for h in elems]
            for c, v in probs.items():
                shifted = tuple(c[j] for j in perm)
                w = probs.get(shifted, 0)
                if isinstance(v, Fraction) and isinstance(w, (Fraction, int)):
                    bad = w != v
                else:
                    bad = abs(w - v) > 1e-12
                if bad:
                    raise MeasureError(f"measure is not shift-invariant at configuration {c}")

    @property
    def elements(self) -> list:
        return sorted(self.group.all_elements())

    def validate(self, system) -> None:
        if system.effective_group != self.group:
            raise MeasureError("measure group differs from the system's effective group")
        if system.n_symbols != self.n_symbols:
            raise MeasureError("measure alphabet size differs from the system")

    def prob(self, window, symbols):
        window = tuple(window)
        marg = self._marginals.get(window)
        if marg is None:
            idx = {g: i for i, g in enumerate(self.elements)}
            cols = [idx[w] for w in window]
            marg = {}
            for c, v in self.probs.items():
                key = tuple(c[j] for j in cols)
                marg[key] = marg.get(key, 0) + v
            self._marginals[window] = marg
        return marg.get(tuple(symbols), 0)

    def to_dict(self) -> dict:
        return {"variant": "finite_group",
                "probs": {"".join(map(str, c)) if self.n_symbols <= 10 else ",".join(map(str, c)): str(v)
                          for c, v in sorted(self.probs.items())}}


def uniform_bernoulli(k: int) -> Bernoulli:
    return Bernoulli(tuple(Fraction(1, k) for _ in range(k)))


def stationary_distribution(M) -> tuple:
    """Stationary vector of an irreducible stochastic matrix (exact for rationals)."""
    M = [[parse_prob(v) for v in row] for row in M]
    k = len(M)
    if all(isinstance(v, Fraction) for row in M for v in row):
        import sympy

        A = sympy.Matrix(k, k, lambda i, j: sympy.Rational(M[j][i].numerator, M[j][i].denominator)
                         - (1 if i == j else 0))
        null = A.nullspace()
        if len(null) != 1:
            raise MeasureError("stationary distribution is not unique")
        v = null[0]
        total = sum(v)
        return tuple(Fraction(int((x / total).p), int((x / total).q)) for x in v)
    w, V = np.linalg.eig(np.array(M, dtype=float).T)
    v = np.real(V[:, np.argmin(np.abs(w - 1))])
    v = v / v.sum()
    return tuple(float(x) for x in v)


def pattern_prob(mu, window, symbols=None):
    """mu of the cylinder of a pattern; accepts a Pattern or (window, symbols)."""
    if symbols is None:
        window, symbols = window.window, window.symbols
    return mu.prob(tuple(window), tuple(symbols))


def cell_prob(mu, window, cell):
    return sum((mu.prob(window, p) for p in sorted(cell)), Fraction(0))


def entropy_of(probs: Iterable, base="e") -> float:
    h = -math.fsum(float(p) * math.log(float(p)) for p in probs if p > 0)
    return h if base in ("e", None) else h / math.log(float(base))


def shannon_entropy(mu, P: Cover, base="e") -> float:
    if not P.is_partition:
        raise CoverError("Shannon entropy needs a partition")
    return entropy_of((cell_prob(mu, P.window, c) for c in P.cells), base)


def cond_shannon(mu, P: Cover, Q: Cover, base="e", cap: int = PATTERN_CAP) -> float:
    """H(P v Q) - H(Q), clamped at 0 within tolerance."""
    if not (P.is_partition and Q.is_partition):
        raise CoverError("conditional Shannon entropy needs partitions")
    h = shannon_entropy(mu, join(P, Q, cap), base) - shannon_entropy(mu, Q, base)
    if h < -1e-12:
        raise ArithmeticError(f"negative conditional entropy {h}")
    return max(h, 0.0)


@dataclass
class EntropyTable:
    rows: list[dict] = field(default_factory=list)
    running_inf: float = math.inf
    certified: bool = True
    exact: bool = False
    label: str = ""

    def add(self, row: dict, *estimates: float) -> None:
        self.running_inf = min(self.running_inf, *estimates)
        row["running_inf"] = self.running_inf
        self.rows.append(row)

    def to_dict(self) -> dict:
        return {"label": self.label, "rows": self.rows, "running_inf": self.running_inf,
                "certified": self.certified, "exact": self.exact}


def _is_plain_z(system) -> bool:
    g = system.group
    return g.free_rank == 1 and not g.finite_moduli and not any(g.trivial_mask)


def dyn_entropy_table(mu, P: Cover, n_max: int, base="e", cap: int = PATTERN_CAP) -> EntropyTable:
    """Rows H(P^{F_n}) / |F_n|.

    Over Z the increments H(P^{[0,n)}) - H(P^{[0,n-1)}) are also upper
    bounds for the dynamical entropy (nonincreasing by strong
    subadditivity); the running infimum takes both estimates.
    """
    system = P.system
    table = EntropyTable(label="dynamical")
    plain_z = _is_plain_z(system)
    prev = 0.0
    last_n = 1 if system.group.is_finite else n_max
    table.exact = system.group.is_finite
    for n in range(1, last_n + 1):
        box = folner_box(system.effective_group, n)
        size = len(folner_box(system.group, n))
        H = shannon_entropy(mu, cover_power(P, box, cap), base)
        row = {"n": n, "window_size": size, "H": H, "normalized": H / size}
        estimates = [H / size]
        if plain_z:
            row["increment"] = H - prev
            estimates.append(H - prev)
        prev = H
        table.add(row, *estimates)
    return table


def cond_dyn_table(mu, P: Cover, Q: Cover, n_max: int, base="e", cap: int = PATTERN_CAP) -> EntropyTable:
    """Rows H(P^{F_n} | Q^{F_n}) / |F_n|; the running inf is not certified."""
    system = P.system
    table = EntropyTable(label="conditional", certified=False)
    last_n = 1 if system.group.is_finite else n_max
    table.exact = system.group.is_finite
    for n in range(1, last_n + 1):
        box = folner_box(system.effective_group, n)
        size = len(folner_box(system.group, n))
        H = cond_shannon(mu, cover_power(P, box, cap), cover_power(Q, box, cap), base, cap)
        table.add({"n": n, "window_size": size, "H": H, "normalized": H / size}, H / size)
    return table


def measure_schedule(system, P_pow: Cover, base_set=(), j_max: int = 12):
    eff = system.effective_group
    extra = set(P_pow.window) | set(base_set)
    for j in range(1, j_max + 1):
        yield canonical_window(set(folner_box(eff, j)) | extra)


@dataclass
class RelativeResult:
    value: float
    stabilized_at: int | None
    exact: bool
    history: list[float]

    def to_dict(self) -> dict:
        return {"value": self.value, "stabilized_at": self.stabilized_at,
                "exact": self.exact, "history": self.history}


def rel_cond_shannon(mu, P_pow: Cover, Q: Cover, b_schedule=None, tol: float = TOL,
                     base="e", cap: int = PATTERN_CAP) -> RelativeResult:
    """H(P_pow | Q^B_j) along a growing schedule, approximating H(P_pow | Q^G).

    Exact once B_j covers a finite effective group; otherwise stops when the
    decrease between successive values drops below ``tol``.
    """
    system = P_pow.system
    eff = system.effective_group
    group_elems = frozenset(eff.all_elements()) if eff.is_finite else None
    if b_schedule is None:
        b_schedule = measure_schedule(system, P_pow)
    history: list[float] = []
    for j, B in enumerate(b_schedule, start=1):
        B = frozenset(B)
        v = cond_shannon(mu, P_pow, cover_power(Q, B, cap), base, cap)
        if history and v > history[-1] + 1e-12:
            raise AssertionError("conditional entropy increased along a growing schedule")
        history.append(v)
        if group_elems is not None and group_elems <= B:
            return RelativeResult(v, j, True, history)
        if len(history) >= 2 and history[-2] - v < tol:
            return RelativeResult(v, j, False, history)
    if not history:
        raise ValueError("empty schedule")
    log.warning("schedule exhausted before the relative entropy stabilized")
    return RelativeResult(history[-1], None, False, history)


def pinsker_gap_table(mu, P: Cover, Q: Cover, n_max: int, tol: float = TOL, j_max: int = 10,
                      base="e", cap: int = PATTERN_CAP) -> list[dict]:
    """Conditional row minus relative row for n = 1..n_max."""
    system = P.system
    rows = []
    last_n = 1 if system.group.is_finite else n_max
    for n in range(1, last_n + 1):
        box = folner_box(system.effective_group, n)
        size = len(folner_box(system.group, n))
        P_pow = cover_power(P, box, cap)
        cond = cond_shannon(mu, P_pow, cover_power(Q, box, cap), base, cap)
        rel = rel_cond_shannon(mu, P_pow, Q, measure_schedule(system, P_pow, box, j_max), tol, base, cap)
        gap = (cond - rel.value) / size
        if gap < -TOL:
            raise AssertionError(f"relative entropy exceeds conditional entropy at n={n}")
        rows.append({"n": n, "window_size": size, "conditional": cond / size,
                     "relative": rel.value / size, "gap": gap, "exact": rel.exact})
    return rows


class ConfigurationSpace:
    """All admissible configurations on a finite effective group, as arrays.

    Fast vectorized path for entropies of partitions of the form P^F when
    the effective group is finite.
    """

    def __init__(self, system, cap: int = 4096):
        eff = system.effective_group
        if not eff.is_finite:
            raise MeasureError("configuration space needs a finite effective group")
        self.system = system
        self.group = eff
        self.elements = sorted(eff.all_elements())
        k, n = system.n_symbols, len(self.elements)
        if k ** n > cap:
            raise OverflowError(f"|A|^|G| = {k}^{n} exceeds cap {cap}")
        self.k = k
        self.index = {g: i for i, g in enumerate(self.elements)}
        self.configs = np.array(system.language(tuple(self.elements)), dtype=np.int64).reshape(-1, n)
        self.codes = self.configs @ (k ** np.arange(n - 1, -1, -1, dtype=np.int64))
        self.code_to_row = {int(c): i for i, c in enumerate(self.codes)}
        self.shift = {g: np.array([self.index[elem_add(eff, h, g)] for h in self.elements])
                      for g in self.elements}
        self._orbits = None

    @property
    def n_configs(self) -> int:
        return len(self.configs)

    def orbits(self) -> list[list[int]]:
        """Shift orbits as lists of configuration rows, ordered by smallest member."""
        if self._orbits is None:
            n = len(self.elements)
            powk = self.k ** np.arange(n - 1, -1, -1, dtype=np.int64)
            rep = np.full(self.n_configs, np.iinfo(np.int64).max)
            for g, perm in self.shift.items():
                rep = np.minimum(rep, self.configs[:, perm] @ powk)
            groups: dict[int, list[int]] = {}
            for i, r in enumerate(rep):
                groups.setdefault(int(r), []).append(i)
            self._orbits = sorted(groups.values(), key=lambda o: o[0])
        return self._orbits

    def shifted(self, g) -> np.ndarray:
        return self.configs[:, self.shift[g]]

    def labels(self, P: Cover) -> np.ndarray:
        """labels[i, x] = cell of P containing the shift of x by elements[i]."""
        out = np.empty((len(self.elements), self.n_configs), dtype=np.int64)
        look = P.cell_lookup()
        if not P.is_partition:
            raise CoverError("labels need a partition")
        w = len(P.window)
        powk = self.k ** np.arange(w - 1, -1, -1, dtype=np.int64)
        table = np.full(self.k ** w, -1, dtype=np.int64)
        for pat, cells in look.items():
            table[int(np.dot(pat, powk)) if w else 0] = cells[0]
        for i, g in enumerate(self.elements):
            cols = [self.index[elem_add(self.group, a, g)] for a in P.window]
            codes = self.configs[:, cols] @ powk if w else np.zeros(self.n_configs, dtype=np.int64)
            out[i] = table[codes]
        return out

    def cell_ids(self, labels: Sequence[np.ndarray], F) -> np.ndarray:
        """Cell index of every configuration in the join over F of the given label arrays."""
        rows = [self.index[g] for g in sorted(F)]
        if not rows:
            return np.zeros(self.n_configs, dtype=np.int64)
        stack = np.concatenate([lab[rows] for lab in labels], axis=0).T
        _, inv = np.unique(stack, axis=0, return_inverse=True)
        return inv.reshape(-1)

    def probabilities(self, mu) -> np.ndarray:
        if isinstance(mu, Bernoulli):
            p = np.array([float(x) for x in mu.p])
            return np.prod(p[self.configs], axis=1)
        if isinstance(mu, FiniteGroupInvariant):
            return np.array([float(mu.probs.get(tuple(int(s) for s in c), 0)) for c in self.configs])
        win = tuple(self.elements)
        return np.array([float(mu.prob(win, tuple(c))) for c in self.configs])

    @staticmethod
    def entropy(p: np.ndarray, ids: np.ndarray, base="e") -> float:
        mass = np.bincount(ids, weights=p)
        mass = mass[mass > 0]
        h = float(-np.sum(mass * np.log(mass)))
        return h if base in ("e", None) else h / math.log(float(base))
