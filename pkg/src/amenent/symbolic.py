"""Subshift languages and the algebra of cylinder covers.

Windows are sorted tuples of effective group elements (the trivially acting
coordinates projected away). A pattern on a window is a tuple of symbol
indices aligned with the window's order. A cover is a window plus a tuple
of cells, each cell a frozenset of patterns on that window; the union of the
cells is the locally admissible language of the window.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .groups import Element, GroupSpec, elem_add, elem_neg, folner_box

PATTERN_CAP = 2 ** 24

Window = tuple
PatternT = tuple


class CapExceeded(RuntimeError):
    pass


class CoverError(ValueError):
    pass


def canonical_window(elements: Iterable[Element]) -> Window:
    return tuple(sorted(set(elements)))


@dataclass(frozen=True)
class Pattern:
    """A configuration on a finite window of the effective group."""

    window: Window
    symbols: PatternT

    def __post_init__(self):
        if len(self.window) != len(self.symbols):
            raise CoverError("pattern must assign one symbol per window element")
        order = sorted(range(len(self.window)), key=lambda i: self.window[i])
        object.__setattr__(self, "window", tuple(self.window[i] for i in order))
        object.__setattr__(self, "symbols", tuple(self.symbols[i] for i in order))

    def as_dict(self) -> dict:
        return dict(zip(self.window, self.symbols))


@dataclass(frozen=True)
class SystemSpec:
    """A locally admissible subshift: full shift minus forbidden patterns."""

    group: GroupSpec
    alphabet: tuple[str, ...]
    forbidden: tuple[Pattern, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "forbidden", tuple(self.forbidden))
        if len(self.alphabet) < 1:
            raise CoverError("alphabet must be nonempty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise CoverError("alphabet symbols must be distinct")
        for p in self.forbidden:
            if not p.window:
                raise CoverError("forbidden patterns must have nonempty windows")
            for s in p.symbols:
                if not 0 <= s < len(self.alphabet):
                    raise CoverError(f"forbidden pattern uses unknown symbol index {s}")

    @property
    def effective_group(self) -> GroupSpec:
        return self.group.effective()

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    def language(self, window: Window, cap: int = PATTERN_CAP) -> tuple[PatternT, ...]:
        return _locally_admissible(self, canonical_window(window), cap)

    def describe(self) -> str:
        return "locally admissible"


def _forbidden_constraints(system: SystemSpec, window: Window):
    """(positions, symbols) for every translate of a forbidden pattern inside window."""
    eff = system.effective_group
    index = {w: i for i, w in enumerate(window)}
    out = set()
    for p in system.forbidden:
        base = p.window[0]
        for w in window:
            shift = elem_add(eff, w, elem_neg(eff, base))
            pos = []
            for f in p.window:
                j = index.get(elem_add(eff, f, shift))
                if j is None:
                    break
                pos.append(j)
            else:
                out.add((tuple(pos), p.symbols))
    return sorted(out)


@lru_cache(maxsize=512)
def _locally_admissible(system: SystemSpec, window: Window, cap: int) -> tuple[PatternT, ...]:
    k = system.n_symbols
    n = len(window)
    if k ** n > cap:
        raise CapExceeded(f"|A|^|window| = {k}^{n} exceeds pattern cap {cap}")
    if not system.forbidden:
        return tuple(itertools.product(range(k), repeat=n))
    constraints = _forbidden_constraints(system, window)
    # check each constraint once its last position is assigned
    by_last: dict[int, list] = {}
    for pos, sym in constraints:
        by_last.setdefault(max(pos), []).append((pos, sym))
    out: list[PatternT] = []
    current = [0] * n

    def extend(i: int):
        if i == n:
            out.append(tuple(current))
            return
        for s in range(k):
            current[i] = s
            if all(any(current[j] != t for j, t in zip(pos, sym)) for pos, sym in by_last.get(i, ())):
                extend(i + 1)

    extend(0)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ItinerarySystem:
    """Symbolic factor generated by a partition via the itinerary map.

    The language on a window is the image of the source language under
    cellwise relabeling; it is computed window by window rather than through
    forbidden patterns.
    """

    source: SystemSpec
    partition: "Cover"

    @property
    def group(self) -> GroupSpec:
        return self.source.group

    @property
    def effective_group(self) -> GroupSpec:
        return self.source.effective_group

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(f"c{i}" for i in range(len(self.partition.cells)))

    @property
    def n_symbols(self) -> int:
        return len(self.partition.cells)

    @property
    def forbidden(self) -> tuple:
        return ()

    def describe(self) -> str:
        return "itinerary image of a locally admissible language"

    def language(self, window: Window, cap: int = PATTERN_CAP) -> tuple[PatternT, ...]:
        window = canonical_window(window)
        if not window:
            return ((),)
        eff = self.effective_group
        pw = self.partition.window
        big = canonical_window(elem_add(eff, a, g) for g in window for a in pw)
        idx = {w: i for i, w in enumerate(big)}
        cell_of = self.partition.cell_lookup()
        gathers = [tuple(idx[elem_add(eff, a, g)] for a in pw) for g in window]
        image = set()
        for pat in self.source.language(big, cap):
            image.add(tuple(cell_of[tuple(pat[j] for j in gather)][0] for gather in gathers))
        return tuple(sorted(image))


def admissible_patterns(system, window: Iterable[Element], cap: int = PATTERN_CAP) -> list[PatternT]:
    return list(system.language(canonical_window(window), cap))


@dataclass(frozen=True, eq=False)
class Cover:
    system: object
    window: Window
    cells: tuple[frozenset, ...]
    is_partition: bool = False
    _lookup: dict = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def cell_lookup(self) -> dict:
        """pattern -> tuple of indices of cells containing it"""
        if self._lookup is None:
            look: dict = {}
            for i, c in enumerate(self.cells):
                for p in c:
                    look.setdefault(p, []).append(i)
            object.__setattr__(self, "_lookup", {p: tuple(v) for p, v in look.items()})
        return self._lookup

    def __len__(self) -> int:
        return len(self.cells)

    def sorted_cells(self) -> list[list[PatternT]]:
        return [sorted(c) for c in self.cells]

    def same_as(self, other: "Cover") -> bool:
        """Equality up to relabeling of cells."""
        return self.window == other.window and set(self.cells) == set(other.cells)


def make_cover(system, window: Iterable[Element], cells: Iterable[Iterable[PatternT]],
               partition: bool | None = None, cap: int = PATTERN_CAP) -> Cover:
    """Build a validated cover; ``partition=None`` infers the flag."""
    window = canonical_window(window)
    lang = set(system.language(window, cap))
    cell_sets = []
    for c in cells:
        c = frozenset(tuple(p) for p in c)
        bad = c - lang
        if bad:
            raise CoverError(f"cell contains non-admissible patterns {sorted(bad)[:3]}")
        if c:
            cell_sets.append(c)
    union = frozenset().union(*cell_sets) if cell_sets else frozenset()
    if union != lang:
        raise CoverError(f"cells miss {len(lang - union)} admissible patterns")
    disjoint = sum(len(c) for c in cell_sets) == len(union)
    if partition is None:
        partition = disjoint
    elif partition and not disjoint:
        for i, a in enumerate(cell_sets):
            for j in range(i + 1, len(cell_sets)):
                if a & cell_sets[j]:
                    raise CoverError(f"partition cells {i} and {j} overlap")
    return Cover(system, window, tuple(cell_sets), bool(partition))


def trivial_cover(system) -> Cover:
    """The cover {X}."""
    return Cover(system, (), (frozenset({()}),), True)


def window_partition(system, window: Iterable[Element], cap: int = PATTERN_CAP) -> Cover:
    """Partition into cylinders of all admissible patterns on ``window``."""
    window = canonical_window(window)
    lang = system.language(window, cap)
    return Cover(system, window, tuple(frozenset({p}) for p in lang), True)


def zero_coordinate_partition(system) -> Cover:
    eff = system.effective_group
    return window_partition(system, [eff.zero()])


def folner_partition(system, k: int, cap: int = PATTERN_CAP) -> Cover:
    """Partition by patterns on the effective box [0, k)^d x finite part."""
    return window_partition(system, folner_box(system.effective_group, k), cap)


def _restriction_map(big: Window, small: Window) -> tuple[int, ...]:
    idx = {w: i for i, w in enumerate(big)}
    return tuple(idx[w] for w in small)


def pullback(U: Cover, g: Element) -> Cover:
    """g^{-1}(U): the cover by cylinders translated by the effective part of g."""
    system = U.system
    eff = system.effective_group
    g_eff = system.group.project(g) if len(g) == system.group.rank else g
    moved = [elem_add(eff, w, g_eff) for w in U.window]
    order = sorted(range(len(moved)), key=lambda i: moved[i])
    window = tuple(moved[i] for i in order)
    cells = tuple(frozenset(tuple(p[i] for i in order) for p in c) for c in U.cells)
    return Cover(system, window, cells, U.is_partition)


def join_many(covers: Sequence[Cover], cap: int = PATTERN_CAP) -> Cover:
    """Common refinement; cells labelled by index tuples in lexicographic order."""
    if not covers:
        raise CoverError("join of no covers")
    system = covers[0].system
    window = canonical_window(w for U in covers for w in U.window)
    lang = system.language(window, cap)
    maps = [_restriction_map(window, U.window) for U in covers]
    looks = [U.cell_lookup() for U in covers]
    buckets: dict[tuple, list] = {}
    for p in lang:
        options = []
        for m, look in zip(maps, looks):
            opts = look.get(tuple(p[i] for i in m))
            if opts is None:
                break
            options.append(opts)
        else:
            for label in itertools.product(*options):
                buckets.setdefault(label, []).append(p)
    cells = tuple(frozenset(buckets[k]) for k in sorted(buckets))
    return Cover(system, window, cells, all(U.is_partition for U in covers))


def join(U: Cover, W: Cover, cap: int = PATTERN_CAP) -> Cover:
    return join_many([U, W], cap)


def cover_power(U: Cover, F: Iterable[Element], cap: int = PATTERN_CAP) -> Cover:
    """U^F, the join of the pullbacks of U over F; U^{empty set} = {X}."""
    system = U.system
    F = sorted(set(system.group.project(g) if len(g) == system.group.rank else g for g in F))
    if not F:
        return trivial_cover(system)
    return join_many([pullback(U, g) for g in F], cap)


def extend_cover(U: Cover, window: Iterable[Element], cap: int = PATTERN_CAP) -> Cover:
    """The same cover expressed on a larger window (cells keep their order)."""
    window = canonical_window(window)
    if window == U.window:
        return U
    if not set(U.window) <= set(window):
        raise CoverError("target window must contain the cover's window")
    m = _restriction_map(window, U.window)
    look = U.cell_lookup()
    cells = [[] for _ in U.cells]
    for p in U.system.language(window, cap):
        for i in look.get(tuple(p[j] for j in m), ()):
            cells[i].append(p)
    return Cover(U.system, window, tuple(frozenset(c) for c in cells), U.is_partition)


def common_window(*covers: Cover, cap: int = PATTERN_CAP) -> list[Cover]:
    window = canonical_window(w for U in covers for w in U.window)
    return [extend_cover(U, window, cap) for U in covers]


def refines(U: Cover, W: Cover, cap: int = PATTERN_CAP) -> bool:
    """True iff every cell of U lies inside some cell of W."""
    U2, W2 = common_window(U, W, cap=cap)
    return all(any(c <= d for d in W2.cells) for c in U2.cells)


def itinerary_factor(system, P: Cover) -> ItinerarySystem:
    if not P.is_partition:
        raise CoverError("itinerary factor requires a partition")
    return ItinerarySystem(system, P)


def merge_partition(P: Cover, groups: Sequence[Sequence[int]]) -> Cover:
    """Coarsen a partition by merging the listed groups of cell indices."""
    cells = [frozenset().union(*(P.cells[i] for i in grp)) for grp in groups]
    return make_cover(P.system, P.window, cells, partition=True)
