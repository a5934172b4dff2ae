import itertools

import pytest

from amenent.groups import GroupSpec
from amenent.symbolic import (
    CapExceeded,
    CoverError,
    Pattern,
    SystemSpec,
    cover_power,
    folner_partition,
    itinerary_factor,
    join,
    make_cover,
    merge_partition,
    pullback,
    refines,
    trivial_cover,
    window_partition,
    zero_coordinate_partition,
)


def test_golden_mean_language_counts(golden):
    # words of length n without "11" are counted by Fibonacci numbers
    for n in range(1, 12):
        assert len(golden.language(tuple((i,) for i in range(n)))) == [2, 3, 5, 8, 13, 21, 34, 55,
                                                                        89, 144, 233][n - 1]


def test_language_on_noncontiguous_window(golden):
    # {0, 2}: the middle symbol can always be 0
    assert len(golden.language(((0,), (2,)))) == 4


def test_language_cap(full_shift):
    with pytest.raises(CapExceeded):
        full_shift.language(tuple((i,) for i in range(12)), cap=1000)


def test_two_dimensional_forbidden_pattern():
    # no two horizontally adjacent ones
    g = GroupSpec(2)
    sys2 = SystemSpec(g, ("0", "1"), (Pattern(((0, 0), (1, 0)), (1, 1)),))
    window = tuple(sorted(itertools.product(range(2), range(2))))
    brute = [c for c in itertools.product(range(2), repeat=4)
             if not any(c[window.index((0, y))] and c[window.index((1, y))] for y in range(2))]
    assert sorted(sys2.language(window)) == sorted(brute)


def test_make_cover_validates(full_shift):
    with pytest.raises(CoverError, match="miss"):
        make_cover(full_shift, [(0,)], [[(0,)]])
    with pytest.raises(CoverError, match="overlap"):
        make_cover(full_shift, [(0,)], [[(0,)], [(0,), (1,)]], partition=True)
    U = make_cover(full_shift, [(0,)], [[(0,)], [(0,), (1,)]])
    assert not U.is_partition


def test_pullback_moves_window(full_shift):
    P = zero_coordinate_partition(full_shift)
    assert pullback(P, (3,)).window == ((3,),)


def test_cover_power_is_window_partition(golden):
    P = zero_coordinate_partition(golden)
    PF = cover_power(P, [(0,), (1,), (2,)])
    assert PF.same_as(window_partition(golden, [(0,), (1,), (2,)]))
    assert cover_power(P, []).same_as(trivial_cover(golden))


def test_join_labels_lexicographic(full_shift):
    U = make_cover(full_shift, [(0,)], [[(0,), (1,)], [(1,)]])
    V = zero_coordinate_partition(full_shift)
    J = join(U, V)
    # labels (0,0), (0,1), (1,1); (1,0) is empty
    assert [sorted(c) for c in J.cells] == [[(0,)], [(1,)], [(1,)]]


def test_refines_and_merge():
    sys3 = SystemSpec(GroupSpec(0, (3,)), ("a", "b"))
    P = folner_partition(sys3, 1)
    P01 = window_partition(sys3, [(0,), (1,)])
    coarse = merge_partition(P01, [[0, 3], [1, 2]])
    assert refines(P01, coarse) and not refines(coarse, P01)
    assert refines(P01, zero_coordinate_partition(sys3))
    assert len(P.cells) == 8


def test_itinerary_factor_is_image_language(golden):
    P = merge_partition(window_partition(golden, [(0,), (1,)]), [[0], [1, 2]])
    Y = itinerary_factor(golden, P)
    # symbol c0 is "00", c1 is "01" or "10"; c1 c1 needs x1 x2 in {01,10} and x0 x1 in {01,10}
    words = set(Y.language(((0,), (1,))))
    assert words == {(0, 0), (0, 1), (1, 0), (1, 1)}
    with pytest.raises(CoverError):
        itinerary_factor(golden, make_cover(golden, [(0,)], [[(0,), (1,)], [(1,)]]))
