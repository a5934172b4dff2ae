import itertools
import math

import pytest

from amenent.counting import (
    counting_N,
    exact_set_cover,
    min_subcover_size,
    relative_N_stabilized,
    topo_cond_sequence,
    topo_entropy_sequence,
    topo_rel_sequence,
)
from amenent.groups import GroupSpec
from amenent.symbolic import (
    SystemSpec,
    cover_power,
    make_cover,
    trivial_cover,
    window_partition,
    zero_coordinate_partition,
)

from conftest import cyclic_full_shift


def brute_N(U, W):
    """max over W-cells of the smallest number of U-cells covering it, by enumeration."""
    from amenent.symbolic import common_window

    U2, W2 = common_window(U, W)
    best = 0
    for cell in W2.cells:
        for r in range(1, len(U2.cells) + 1):
            if any(cell <= frozenset().union(*c) for c in itertools.combinations(U2.cells, r)):
                best = max(best, r)
                break
    return best


def test_exact_set_cover_small():
    # universe {0,1,2,3}; greedy takes the triple then needs two more, optimum is two
    masks = [0b0111, 0b0011, 0b1100, 0b1000]
    chosen = exact_set_cover(0b1111, masks)
    assert len(chosen) == 2
    assert masks[chosen[0]] | masks[chosen[1]] == 0b1111


def test_exact_set_cover_greedy_trap():
    # greedy grabs the four-element set first and then needs both others
    universe = 0b111111
    masks = [0b011011, 0b000111, 0b111000]
    chosen = exact_set_cover(universe, masks)
    cover = 0
    for i in chosen:
        cover |= masks[i]
    assert cover == universe and len(chosen) == 2


def test_min_subcover_with_overlaps(full_shift):
    # cells {00,01}, {01,11}, {10,11}, {00,10}: any full cover needs two
    U = make_cover(full_shift, [(0,), (1,)], [[(0, 0), (0, 1)], [(0, 1), (1, 1)],
                                              [(1, 0), (1, 1)], [(0, 0), (1, 0)]])
    everything = frozenset(full_shift.language(((0,), (1,))))
    n, witness = min_subcover_size(U, everything)
    assert n == 2
    assert frozenset().union(*(U.cells[i] for i in witness)) >= everything


def test_counting_matches_brute_force_on_random_covers(full_shift):
    import random

    rnd = random.Random(7)
    window = [(0,), (1,), (2,)]
    lang = list(full_shift.language(tuple(window)))
    for _ in range(30):
        cells = [set(rnd.sample(lang, rnd.randint(1, 4))) for _ in range(rnd.randint(2, 6))]
        missing = set(lang) - set().union(*cells)
        cells.append(missing or {lang[0]})
        U = make_cover(full_shift, window, cells)
        W = make_cover(full_shift, [(0,)], [[(0,)], [(1,)]]) if rnd.random() < 0.5 \
            else trivial_cover(full_shift)
        assert counting_N(U, W).n_value == brute_N(U, W)


def test_counting_cap_raises(full_shift):
    # all pairs of words: nothing is forced and nothing is dominated
    window = [(0,), (1,), (2,)]
    lang = full_shift.language(tuple(window))
    U = make_cover(full_shift, window, itertools.combinations(lang, 2))
    assert counting_N(U, trivial_cover(full_shift), cell_cap=40).n_value == 4
    with pytest.raises(OverflowError):
        counting_N(U, trivial_cover(full_shift), cell_cap=10)


def test_partitions_count_cells_of_the_join(golden):
    P = zero_coordinate_partition(golden)
    F = [(i,) for i in range(5)]
    res = counting_N(cover_power(P, F), trivial_cover(golden))
    assert res.n_value == 13
    assert res.log_value == pytest.approx(math.log(13))
    assert counting_N(cover_power(P, F), trivial_cover(golden), base="2").log_value == \
        pytest.approx(math.log2(13))


def test_golden_mean_entropy_sequence(golden):
    P = zero_coordinate_partition(golden)
    t = topo_entropy_sequence(golden, P, 8)
    assert [r["N"] for r in t.rows] == [2, 3, 5, 8, 13, 21, 34, 55]
    assert t.running_extremum == pytest.approx(math.log(55) / 8)
    assert t.running_extremum > math.log((1 + math.sqrt(5)) / 2)


def test_conditional_sequence_of_refinement(full_shift):
    P = zero_coordinate_partition(full_shift)
    P01 = window_partition(full_shift, [(0,), (1,)])
    t = topo_cond_sequence(full_shift, P01, P, 5)
    # given the block on [0,n) only the symbol at n is free
    assert [r["N"] for r in t.rows] == [2] * 5
    assert t.final == pytest.approx(math.log(2) / 5)


def test_stabilized_relative_is_exact_on_finite_groups():
    sys = cyclic_full_shift(4)
    P = zero_coordinate_partition(sys)
    P01 = window_partition(sys, [(0,), (1,)])
    G = sys.group.all_elements()
    U_pow = cover_power(P01, [(0,)])
    st = relative_N_stabilized(U_pow, P)
    assert st.exact
    assert st.result.n_value == counting_N(U_pow, cover_power(P, G)).n_value == 1


def test_relative_sequence_on_z_plateaus(full_shift):
    P = zero_coordinate_partition(full_shift)
    P01 = window_partition(full_shift, [(0,), (1,)])
    t = topo_rel_sequence(full_shift, P01, P, 3)
    for r in t.rows:
        assert r["N"] == 1 and r["N_conditional"] == 2 and not r["exact"]


def test_itinerary_subsystem_counts():
    sys = SystemSpec(GroupSpec(1), ("a", "b", "c"))
    U = make_cover(sys, [(0,)], [[(0,), (1,)], [(1,), (2,)]])
    # each cell of U^{[0,n)} is a product; the cover needs all 2^n of them
    t = topo_entropy_sequence(sys, U, 3)
    assert [r["N"] for r in t.rows] == [2, 4, 8]
