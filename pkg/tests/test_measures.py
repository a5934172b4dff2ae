import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from amenent.groups import GroupSpec
from amenent.measures import (
    Bernoulli,
    ConfigurationSpace,
    FiniteGroupInvariant,
    MarkovZ,
    MeasureError,
    cond_shannon,
    dyn_entropy_table,
    entropy_of,
    parse_prob,
    pattern_prob,
    pinsker_gap_table,
    shannon_entropy,
    stationary_distribution,
    uniform_bernoulli,
)
from amenent.symbolic import cover_power, folner_partition, window_partition, zero_coordinate_partition

from conftest import cyclic_full_shift

GOLDEN = MarkovZ(((Fraction(1, 2), Fraction(1, 2)), (1, 0)), (Fraction(2, 3), Fraction(1, 3)))


def H(ps):
    return -sum(p * math.log(p) for p in ps if p > 0)


def test_parse_prob():
    assert parse_prob("3/8") == Fraction(3, 8)
    assert parse_prob(1) == Fraction(1)
    with pytest.raises(MeasureError):
        parse_prob("half")
    with pytest.raises(MeasureError, match="negative"):
        Bernoulli(("-1/2", "3/2"))


def test_normalization_is_checked():
    with pytest.raises(MeasureError, match="normalization"):
        Bernoulli(("1/2", "1/3"))
    with pytest.raises(MeasureError):
        MarkovZ(((Fraction(1, 2), Fraction(1, 2)), (1, 0)), (Fraction(1, 2), Fraction(1, 2)))


def test_stationary_distribution_is_exact():
    assert stationary_distribution(((Fraction(1, 2), Fraction(1, 2)), (1, 0))) == \
        (Fraction(2, 3), Fraction(1, 3))
    M = np.array([[0.9, 0.1], [0.3, 0.7]])
    pi = np.array(stationary_distribution(M), dtype=float)
    assert np.allclose(pi @ M, pi)


def test_markov_prob_against_gap_enumeration():
    M = GOLDEN.transition
    pi = GOLDEN.stationary

    def brute(window, symbols):
        lo, hi = window[0][0], window[-1][0]
        fixed = {w[0]: s for w, s in zip(window, symbols)}
        free = [i for i in range(lo, hi + 1) if i not in fixed]
        total = Fraction(0)
        for fill in itertools.product(range(2), repeat=len(free)):
            x = {**fixed, **dict(zip(free, fill))}
            p = Fraction(pi[x[lo]])
            for i in range(lo, hi):
                p *= Fraction(M[x[i]][x[i + 1]])
            total += p
        return total

    window = ((0,), (2,), (5,))
    for symbols in itertools.product(range(2), repeat=3):
        assert GOLDEN.prob(window, symbols) == brute(window, symbols)


def test_bernoulli_block_entropy(full_shift):
    mu = Bernoulli(("1/3", "2/3"))
    P = zero_coordinate_partition(full_shift)
    for n in range(1, 6):
        assert shannon_entropy(mu, cover_power(P, [(i,) for i in range(n)])) == \
            pytest.approx(n * H([1 / 3, 2 / 3]), abs=1e-12)


def test_markov_block_entropy_formula(golden):
    P = zero_coordinate_partition(golden)
    rate = GOLDEN.entropy_rate()
    assert rate == pytest.approx(2 / 3 * math.log(2))
    for n in range(1, 8):
        h = shannon_entropy(GOLDEN, cover_power(P, [(i,) for i in range(n)]))
        assert h == pytest.approx(H([2 / 3, 1 / 3]) + (n - 1) * rate, abs=1e-12)


def test_conditional_entropy_of_next_symbol(golden):
    P = zero_coordinate_partition(golden)
    P01 = window_partition(golden, [(0,), (1,)])
    assert cond_shannon(GOLDEN, P01, P) == pytest.approx(GOLDEN.entropy_rate(), abs=1e-12)
    assert cond_shannon(GOLDEN, P, P01) == 0.0


def test_dyn_table_running_inf_reaches_rate(golden):
    t = dyn_entropy_table(GOLDEN, zero_coordinate_partition(golden), 6)
    assert abs(t.running_inf - 2 / 3 * math.log(2)) < 1e-12
    assert t.certified


def test_finite_group_measure_invariance():
    g = GroupSpec(0, (3,))
    FiniteGroupInvariant(g, 2, {(0, 0, 1): "1/3", (0, 1, 0): "1/3", (1, 0, 0): "1/3"})
    with pytest.raises(MeasureError, match="shift-invariant"):
        FiniteGroupInvariant(g, 2, {(0, 0, 1): "1/2", (0, 1, 0): "1/2"})


def test_finite_group_marginals():
    g = GroupSpec(0, (3,))
    mu = FiniteGroupInvariant(g, 2, {(0, 0, 1): "1/3", (0, 1, 0): "1/3", (1, 0, 0): "1/3"})
    assert pattern_prob(mu, ((0,),), (1,)) == Fraction(1, 3)
    assert pattern_prob(mu, ((0,), (1,)), (1, 1)) == 0


def test_configuration_space_agrees_with_pattern_entropy():
    sys = cyclic_full_shift(2, 2)
    mu = Bernoulli(("1/4", "3/4"))
    space = ConfigurationSpace(sys)
    p = space.probabilities(mu)
    assert p.sum() == pytest.approx(1.0)
    P = zero_coordinate_partition(sys)
    labels = [space.labels(P)]
    F = [(0, 0), (1, 1)]
    assert space.entropy(p, space.cell_ids(labels, F)) == \
        pytest.approx(shannon_entropy(mu, cover_power(P, F)), abs=1e-12)
    # Burnside: (16 + 3 * 4) / 4 orbits
    assert len(space.orbits()) == 7


def test_entropy_of_base_two():
    assert entropy_of([Fraction(1, 4)] * 4, base="2") == pytest.approx(2.0)


def test_pinsker_gap_on_finite_group_vanishes():
    sys = cyclic_full_shift(3)
    P01 = window_partition(sys, [(0,), (1,)])
    P = zero_coordinate_partition(sys)
    rows = pinsker_gap_table(uniform_bernoulli(2), P01, P, 3)
    assert len(rows) == 1 and rows[0]["exact"]
    assert abs(rows[0]["gap"]) < 1e-12


def test_pinsker_gap_on_z_decreases(full_shift):
    P01 = window_partition(full_shift, [(0,), (1,)])
    P = zero_coordinate_partition(full_shift)
    rows = pinsker_gap_table(uniform_bernoulli(2), P01, P, 4)
    # the conditional rate is log 2 / n, the relative one is 0
    for r in rows:
        assert r["conditional"] == pytest.approx(math.log(2) / r["n"], abs=1e-12)
        assert r["relative"] == pytest.approx(0.0, abs=1e-12)


def test_folner_partition_entropy_under_invariant_measure():
    sys = cyclic_full_shift(4)
    mu = uniform_bernoulli(2)
    assert shannon_entropy(mu, folner_partition(sys, 1)) == pytest.approx(4 * math.log(2))
