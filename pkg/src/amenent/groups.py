"""Arithmetic on groups of the form Z^d x Z_m1 x ... x Z_mk.

Elements are plain integer tuples, free coordinates first, then the finite
coordinates reduced modulo their moduli. Finite subsets are frozensets of
such tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Element = tuple[int, ...]
Subset = frozenset


class GroupError(ValueError):
    pass


class TilingError(GroupError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    free_rank: int = 1
    finite_moduli: tuple[int, ...] = ()
    trivial_mask: tuple[bool, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "finite_moduli", tuple(int(m) for m in self.finite_moduli))
        if self.trivial_mask is None:
            object.__setattr__(self, "trivial_mask", (False,) * self.rank)
        else:
            object.__setattr__(self, "trivial_mask", tuple(bool(b) for b in self.trivial_mask))
        if self.free_rank < 0:
            raise GroupError("free_rank must be nonnegative")
        if any(m < 2 for m in self.finite_moduli):
            raise GroupError(f"every modulus must be >= 2, got {self.finite_moduli}")
        if len(self.trivial_mask) != self.rank:
            raise GroupError(
                f"trivial_mask has length {len(self.trivial_mask)}, expected {self.rank}"
            )

    @property
    def rank(self) -> int:
        return self.free_rank + len(self.finite_moduli)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int | None:
        if not self.is_finite:
            return None
        n = 1
        for m in self.finite_moduli:
            n *= m
        return n

    def effective(self) -> "GroupSpec":
        """The quotient by the trivially acting coordinates."""
        d = self.free_rank
        free = sum(1 for i in range(d) if not self.trivial_mask[i])
        mods = tuple(m for i, m in enumerate(self.finite_moduli) if not self.trivial_mask[d + i])
        return GroupSpec(free, mods)

    @property
    def effective_is_finite(self) -> bool:
        return all(self.trivial_mask[: self.free_rank])

    def project(self, g: Element) -> Element:
        """Drop trivially acting coordinates of ``g``."""
        self.check(g)
        return tuple(c for c, t in zip(g, self.trivial_mask) if not t)

    def project_subset(self, F: Iterable[Element]) -> frozenset:
        return frozenset(self.project(g) for g in F)

    def reduce(self, coords: Sequence[int]) -> Element:
        if len(coords) != self.rank:
            raise GroupError(f"element {tuple(coords)} has wrong length for rank {self.rank}")
        d = self.free_rank
        return tuple(int(c) if i < d else int(c) % self.finite_moduli[i - d]
                     for i, c in enumerate(coords))

    def check(self, g: Element) -> None:
        if len(g) != self.rank or any(
                not 0 <= c < m for c, m in zip(g[self.free_rank:], self.finite_moduli)):
            raise GroupError(f"element {g} does not conform to {self}")

    def zero(self) -> Element:
        return (0,) * self.rank

    def elements_finite_part(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(m) for m in self.finite_moduli)))

    def all_elements(self) -> list[Element]:
        if not self.is_finite:
            raise GroupError("group is infinite")
        return self.elements_finite_part()

    def to_dict(self) -> dict:
        return {
            "free_rank": self.free_rank,
            "finite_moduli": list(self.finite_moduli),
            "trivial_mask": list(self.trivial_mask),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroupSpec":
        return cls(int(d.get("free_rank", 0)), tuple(d.get("finite_moduli", ())),
                   tuple(d["trivial_mask"]) if "trivial_mask" in d else None)


def elem_add(spec: GroupSpec, g: Element, h: Element) -> Element:
    spec.check(g)
    spec.check(h)
    return spec.reduce([a + b for a, b in zip(g, h)])


def elem_neg(spec: GroupSpec, g: Element) -> Element:
    spec.check(g)
    return spec.reduce([-a for a in g])


def subset_translate(spec: GroupSpec, F: Iterable[Element], g: Element) -> frozenset:
    return frozenset(elem_add(spec, f, g) for f in F)


def minkowski_sum(spec: GroupSpec, A: Iterable[Element], B: Iterable[Element]) -> frozenset:
    B = list(B)
    return frozenset(elem_add(spec, a, b) for a in A for b in B)


def folner_box(spec: GroupSpec, n: int) -> frozenset:
    """[0, n)^d times the whole finite part."""
    if n < 1:
        raise GroupError("box size must be >= 1")
    free = itertools.product(range(n), repeat=spec.free_rank)
    fin = spec.elements_finite_part()
    return frozenset(a + b for a in free for b in fin)


def b_core(spec: GroupSpec, F: Iterable[Element], B: Iterable[Element]) -> frozenset:
    """Elements g of F whose translate B + g stays inside F."""
    F = frozenset(F)
    B = list(B)
    return frozenset(g for g in F if all(elem_add(spec, b, g) in F for b in B))


def invariance_defect(spec: GroupSpec, F: Iterable[Element], B: Iterable[Element]) -> float:
    """|BF symmetric-difference F| / |F|."""
    F = frozenset(F)
    if not F:
        raise GroupError("invariance defect of the empty set is undefined")
    BF = minkowski_sum(spec, B, F)
    return len(BF ^ F) / len(F)


@dataclass(frozen=True)
class TilingDecomposition:
    tiles: tuple[frozenset, ...]
    pieces: tuple[tuple[int, Element], ...]

    def placed(self, spec: GroupSpec) -> list[frozenset]:
        return [subset_translate(spec, self.tiles[i], c) for i, c in self.pieces]

    def to_dict(self) -> dict:
        return {
            "tiles": [sorted(list(t)) for t in self.tiles],
            "pieces": [{"tile": i, "translate": list(c)} for i, c in self.pieces],
        }


def _check_disjoint_union(spec, F, decomposition):
    seen: set = set()
    for piece in decomposition.placed(spec):
        if seen & piece:
            raise AssertionError("tiling pieces overlap")
        seen |= piece
    if seen != F:
        raise AssertionError("tiling pieces do not cover the set")


def tile_box(spec: GroupSpec, F: Iterable[Element], tiles: Sequence[Iterable[Element]]) -> TilingDecomposition:
    """Exactly decompose ``F`` into disjoint translates of ``tiles``.

    Depth-first placement: the lexicographically smallest uncovered element
    is covered first, trying tiles in index order, so the returned sequence
    of tile indices is the lexicographically smallest feasible one.
    Raises TilingError when no exact decomposition exists.
    """
    F = frozenset(F)
    tiles = tuple(frozenset(t) for t in tiles)
    zero = spec.zero()
    for i, t in enumerate(tiles):
        if zero not in t:
            raise GroupError(f"tile {i} does not contain the unit")
    if not F:
        return TilingDecomposition(tiles, ())
    # anchors: translates c with a + c = target, a in tile; for Z^d without
    # finite part only the minimal tile element can land on the minimal cell
    ordered = sorted(F)
    single_anchor = not spec.finite_moduli
    anchors = [sorted(t)[:1] if single_anchor else sorted(t) for t in tiles]
    failed: set = set()

    def solve(covered: frozenset) -> list | None:
        if len(covered) == len(F):
            return []
        if covered in failed:
            return None
        target = next(x for x in ordered if x not in covered)
        for i, t in enumerate(tiles):
            for a in anchors[i]:
                c = elem_add(spec, target, elem_neg(spec, a))
                placed = subset_translate(spec, t, c)
                if placed <= F and not (placed & covered):
                    rest = solve(covered | placed)
                    if rest is not None:
                        return [(i, c)] + rest
        failed.add(covered)
        return None

    pieces = solve(frozenset())
    if pieces is None:
        raise TilingError(f"no exact tiling of a set of size {len(F)} by the given tiles")
    out = TilingDecomposition(tiles, tuple(pieces))
    _check_disjoint_union(spec, F, out)
    return out


def interval(a: int, b: int) -> frozenset:
    """[a, b) as a subset of Z."""
    return frozenset((i,) for i in range(a, b))


def all_subsets(F: Iterable[Element]) -> list[frozenset]:
    items = sorted(F)
    out = []
    for r in range(len(items) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(items, r))
    return out
