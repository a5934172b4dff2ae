import itertools

import pytest
from hypothesis import given, strategies as st

from amenent.groups import (
    GroupError,
    GroupSpec,
    TilingError,
    b_core,
    elem_add,
    elem_neg,
    folner_box,
    interval,
    invariance_defect,
    minkowski_sum,
    subset_translate,
    tile_box,
)

Z = GroupSpec(1)
Z2 = GroupSpec(2)
ZxZ3 = GroupSpec(1, (3,))


def test_addition_reduces_finite_coordinates():
    # free coordinates come first: (5, 2) is 5 in Z and 2 in Z_3
    assert elem_add(ZxZ3, (5, 2), (-5, 2)) == (0, 1)
    assert elem_neg(ZxZ3, (4, 1)) == (-4, 2)


def test_reduce_and_check():
    assert ZxZ3.reduce((7, 5)) == (7, 2)
    with pytest.raises(GroupError):
        ZxZ3.check((1, 3))
    with pytest.raises(GroupError):
        ZxZ3.check((1,))


def test_effective_group_drops_masked_coordinates():
    g = GroupSpec(1, (3,), (True, False))
    assert g.effective() == GroupSpec(0, (3,))
    assert g.project((17, 2)) == (2,)
    assert g.effective_is_finite and not g.is_finite


def test_roundtrip_dict():
    g = GroupSpec(2, (2, 4), (False, True, False, False))
    assert GroupSpec.from_dict(g.to_dict()) == g


def test_folner_box_sizes():
    assert len(folner_box(Z, 5)) == 5
    assert len(folner_box(Z2, 3)) == 9
    assert len(folner_box(ZxZ3, 4)) == 12
    assert folner_box(GroupSpec(0, (2, 2)), 7) == frozenset(itertools.product(range(2), range(2)))
    with pytest.raises(GroupError):
        folner_box(Z, 0)


def test_minkowski_and_translate():
    assert minkowski_sum(Z, interval(0, 2), interval(0, 3)) == interval(0, 4)
    assert subset_translate(Z, interval(0, 3), (-1,)) == interval(-1, 2)


def test_core_and_defect_small():
    F = interval(0, 5)
    B = [(-1,), (0,), (1,)]
    assert b_core(Z, F, B) == interval(1, 4)
    assert invariance_defect(Z, F, B) == pytest.approx(2 / 5)
    with pytest.raises(GroupError):
        invariance_defect(Z, [], B)


def test_tiling_of_seven_matches_lexicographic_choice():
    dec = tile_box(Z, interval(0, 7), [interval(0, 2), interval(0, 3)])
    assert dec.pieces == ((0, (0,)), (0, (2,)), (1, (4,)))


def test_tiling_rejects_tiles_without_unit():
    with pytest.raises(GroupError):
        tile_box(Z, interval(0, 4), [interval(1, 3)])


def test_tiling_infeasible():
    with pytest.raises(TilingError):
        tile_box(Z, interval(0, 5), [interval(0, 2)])


def test_tiling_two_dimensional_and_finite():
    square = frozenset(itertools.product(range(2), range(2)))
    dec = tile_box(Z2, folner_box(Z2, 4), [square])
    assert len(dec.pieces) == 4
    g = GroupSpec(0, (6,))
    dec = tile_box(g, g.all_elements(), [frozenset({(0,), (3,)})])
    assert sorted(c for _, c in dec.pieces) == [(0,), (1,), (2,)]


@given(st.sets(st.integers(0, 11), min_size=1), st.sets(st.integers(-2, 2), min_size=1))
def test_core_is_the_set_where_translates_stay_inside(F, B):
    F = {(x,) for x in F}
    B = {(b,) for b in B}
    core = b_core(Z, F, B)
    assert core <= F
    for g in F:
        assert (g in core) == all((g[0] + b[0],) in F for b in B)


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 2)), max_size=6),
       st.tuples(st.integers(-9, 9), st.integers(0, 2)))
def test_translate_round_trip(F, g):
    moved = subset_translate(ZxZ3, F, g)
    assert len(moved) == len(set(F))
    assert subset_translate(ZxZ3, moved, elem_neg(ZxZ3, g)) == frozenset(F)


def test_tiling_single_tile():
    assert tile_box(Z, interval(0, 2), [interval(0, 2)]).pieces == ((0, (0,)),)
