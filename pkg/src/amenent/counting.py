"""Conditional counting entropy N(U, W) and its Folner averages."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .groups import folner_box
from .symbolic import (
    PATTERN_CAP,
    Cover,
    canonical_window,
    common_window,
    cover_power,
    trivial_cover,
)

log = logging.getLogger(__name__)

CELL_CAP = 24


class CoverageError(ValueError):
    pass


def log_in(x: float, base: float | str = "e") -> float:
    if base in ("e", None, math.e):
        return math.log(x)
    return math.log(x) / math.log(float(base))


@dataclass
class CountingResult:
    n_value: int
    log_value: float
    witness: list[tuple[int, ...]] = field(default_factory=list)
    base: str = "e"

    def to_dict(self) -> dict:
        return {"N": self.n_value, "H": self.log_value,
                "witness": [list(w) for w in self.witness]}


def _greedy(universe: int, masks: Sequence[int]) -> list[int]:
    chosen: list[int] = []
    left = universe
    while left:
        best = max(range(len(masks)), key=lambda i: (bin(masks[i] & left).count("1"), -i))
        chosen.append(best)
        left &= ~masks[best]
    return chosen


def exact_set_cover(universe: int, masks: Sequence[int]) -> list[int]:
    """Minimum subfamily of ``masks`` whose union contains ``universe``.

    Branch-and-bound: branch on the uncovered element with the fewest
    covering sets, sets tried in index order; bounded by a greedy incumbent
    and the ceiling of uncovered/largest-set. Among minimum covers the one
    found first in this order is returned.
    """
    best = sorted(_greedy(universe, masks))
    maxsize = max((bin(m).count("1") for m in masks), default=0)

    def search(left: int, chosen: list[int]):
        nonlocal best
        if not left:
            if len(chosen) < len(best) or (len(chosen) == len(best) and sorted(chosen) < best):
                best = sorted(chosen)
            return
        remaining = bin(left).count("1")
        if len(chosen) + -(-remaining // maxsize) > len(best):
            return
        if len(chosen) + 1 > len(best):
            return
        pivot_opts = None
        probe = left
        while probe:
            b = probe & -probe
            probe ^= b
            opts = [i for i, m in enumerate(masks) if m & b]
            if pivot_opts is None or len(opts) < len(pivot_opts):
                pivot_opts = opts
                if len(opts) == 1:
                    break
        for i in pivot_opts:
            chosen.append(i)
            search(left & ~masks[i], chosen)
            chosen.pop()

    search(universe, [])
    return best


def min_subcover_size(U: Cover, cell: Iterable, cell_cap: int = CELL_CAP) -> tuple[int, tuple[int, ...]]:
    """Minimum number of cells of U covering ``cell`` (patterns on U's window).

    Cells forced by elements with a single covering cell are taken first and
    dominated cells dropped; the cap applies to what is left for the search.
    """
    cell = set(cell)
    if not cell:
        return 0, ()
    index = {p: i for i, p in enumerate(sorted(cell))}
    look = U.cell_lookup()
    if any(p not in look for p in index):
        raise CoverageError("cell is not covered by the cover's cells")
    # only cells meeting the target matter; masks[i] belongs to U.cells[ids[i]]
    ids = sorted({i for p in index for i in look[p]})
    masks = [0] * len(ids)
    pos = {c: t for t, c in enumerate(ids)}
    for p, j in index.items():
        for i in look[p]:
            masks[pos[i]] |= 1 << j
    universe = (1 << len(index)) - 1

    left = universe
    holders = [0] * len(index)
    for p, j in index.items():
        holders[j] = len(look[p])
    forced = sorted({pos[look[p][0]] for p, j in index.items() if holders[j] == 1})
    for i in forced:
        left &= ~masks[i]
    if not left:
        return len(forced), tuple(sorted(ids[i] for i in forced))

    # drop empty and dominated candidates (keep the lowest index among equals)
    taken = set(forced)
    cand = [(i, masks[i] & left) for i in range(len(masks)) if i not in taken and masks[i] & left]
    kept = []
    for i, m in cand:
        dominated = False
        for j, n in cand:
            if j != i and m | n == n and (m != n or j < i):
                dominated = True
                break
        if not dominated:
            kept.append((i, m))
    if len(kept) > cell_cap:
        raise OverflowError(f"{len(kept)} candidate cells exceed the cover-cell cap {cell_cap}")
    sub = exact_set_cover(left, [m for _, m in kept])
    chosen = sorted(ids[i] for i in forced + [kept[k][0] for k in sub])
    return len(chosen), tuple(chosen)


def counting_N(U: Cover, W: Cover, base="e", cell_cap: int = CELL_CAP,
               cap: int = PATTERN_CAP) -> CountingResult:
    """N(U, W): worst cell of W, counted in cells of U needed to cover it."""
    U2, W2 = common_window(U, W, cap=cap)
    best = 0
    witness: list = []
    for cell in W2.cells:
        if not cell:
            continue
        n, wit = min_subcover_size(U2, cell, cell_cap)
        witness.append(wit)
        best = max(best, n)
    if best == 0:
        raise CoverageError("conditioning cover has no nonempty cells")
    return CountingResult(best, log_in(best, base), witness, str(base))


def counting_H(U: Cover, W: Cover, **kw) -> float:
    return counting_N(U, W, **kw).log_value


@dataclass
class ConvergenceTable:
    rows: list[dict] = field(default_factory=list)
    running_extremum: float = math.inf
    truncated: bool = False
    label: str = ""

    def add(self, row: dict) -> None:
        self.running_extremum = min(self.running_extremum, row["value"])
        row["running_inf"] = self.running_extremum
        self.rows.append(row)

    @property
    def final(self) -> float:
        return self.rows[-1]["value"]

    def to_dict(self) -> dict:
        return {"label": self.label, "rows": self.rows, "running_inf": self.running_extremum,
                "truncated": self.truncated}


def _box_sizes(system, n: int):
    eff_box = folner_box(system.effective_group, n)
    full = len(folner_box(system.group, n))
    return eff_box, full


def topo_cond_sequence(system, U: Cover, W: Cover, n_max: int, base="e",
                       cell_cap: int = CELL_CAP, cap: int = PATTERN_CAP) -> ConvergenceTable:
    """Rows H(U^{F_n} | W^{F_n}) / |F_n| for n = 1..n_max."""
    table = ConvergenceTable(label="conditional")
    for n in range(1, n_max + 1):
        box, size = _box_sizes(system, n)
        try:
            res = counting_N(cover_power(U, box, cap), cover_power(W, box, cap), base, cell_cap, cap)
        except (OverflowError, RuntimeError) as exc:
            log.warning("table truncated at n=%d: %s", n, exc)
            table.truncated = True
            break
        table.add({"n": n, "window_size": size, "N": res.n_value, "value": res.log_value / size})
    return table


def topo_entropy_sequence(system, U: Cover, n_max: int, **kw) -> ConvergenceTable:
    return topo_cond_sequence(system, U, trivial_cover(system), n_max, **kw)


def default_schedule(system, U_pow: Cover, j_max: int = 12):
    """B_j = effective box [0, j) together with the window of U_pow."""
    eff = system.effective_group
    for j in range(1, j_max + 1):
        yield canonical_window(set(folner_box(eff, j)) | set(U_pow.window))


@dataclass
class StabilizedResult:
    result: CountingResult
    stabilized_at: int | None
    exact: bool
    history: list[int]

    def to_dict(self) -> dict:
        return {"N": self.result.n_value, "H": self.result.log_value,
                "stabilized_at": self.stabilized_at, "exact": self.exact, "history": self.history}


def relative_N_stabilized(U_pow: Cover, W: Cover, b_schedule: Iterable | None = None,
                          plateau: int = 3, base="e", cell_cap: int = CELL_CAP,
                          cap: int = PATTERN_CAP) -> StabilizedResult:
    """Approximate N(U_pow, W^G) along growing sets B_j.

    Stops once the value repeats ``plateau`` times in a row, or exactly when
    B_j exhausts a finite effective group.
    """
    if plateau < 2:
        raise ValueError("plateau must be >= 2")
    system = U_pow.system
    eff = system.effective_group
    group_elems = frozenset(eff.all_elements()) if eff.is_finite else None
    if b_schedule is None:
        b_schedule = default_schedule(system, U_pow)
    history: list[int] = []
    last = None
    for j, B in enumerate(b_schedule, start=1):
        B = frozenset(B)
        res = counting_N(U_pow, cover_power(W, B, cap), base, cell_cap, cap)
        if history and res.n_value > history[-1]:
            raise AssertionError("N(U, W^B) increased along a growing schedule")
        history.append(res.n_value)
        last = res
        if group_elems is not None and group_elems <= B:
            return StabilizedResult(res, j, True, history)
        if len(history) >= plateau and len(set(history[-plateau:])) == 1:
            return StabilizedResult(res, j, False, history)
    if last is None:
        raise ValueError("empty schedule")
    log.warning("schedule exhausted without a plateau; returning last value")
    return StabilizedResult(last, None, False, history)


def topo_rel_sequence(system, U: Cover, W: Cover, n_max: int, b_schedule=None, plateau: int = 3,
                      base="e", cell_cap: int = CELL_CAP, cap: int = PATTERN_CAP) -> ConvergenceTable:
    """Rows log N(U^{F_n}, W^G-approx) / |F_n|, each with its exactness flag."""
    table = ConvergenceTable(label="relative")
    for n in range(1, n_max + 1):
        box, size = _box_sizes(system, n)
        try:
            U_pow = cover_power(U, box, cap)
            sched = b_schedule(n) if callable(b_schedule) else b_schedule
            st = relative_N_stabilized(U_pow, W, sched, plateau, base, cell_cap, cap)
            cond = counting_N(U_pow, cover_power(W, box, cap), base, cell_cap, cap)
        except (OverflowError, RuntimeError) as exc:
            log.warning("table truncated at n=%d: %s", n, exc)
            table.truncated = True
            break
        if cond.n_value < st.result.n_value:
            raise AssertionError("windowwise domination N(U^F, W^F) >= N(U^F, W^B) failed")
        table.add({"n": n, "window_size": size, "N": st.result.n_value, "N_conditional": cond.n_value,
                   "value": st.result.log_value / size, "exact": st.exact,
                   "stabilized_at": st.stabilized_at})
    return table
