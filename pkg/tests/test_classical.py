from fractions import Fraction as F
from math import comb

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freethin.classical import (
    CountDistribution,
    categorical_split,
    compound,
    parse_pmf,
    poisson_pmf,
    poissonness_defect,
    split_joint,
)
from freethin.errors import PreconditionError


def test_poisson_split_is_exact():
    s = split_joint(CountDistribution("poisson", 2, 60), F(3, 10))
    assert s.conclusive
    assert s.defect < 1e-12
    assert max(s.target_gaps) < 1e-12 and max(s.marginal_gaps) < 1e-12


def test_geometric_split_is_dependent():
    s = split_joint(CountDistribution("geometric", F(1, 2), 80), F(3, 10))
    assert s.defect > 1e-3


def test_p_one_split():
    s = split_joint(CountDistribution("geometric", F(1, 2), 40), 1)
    # only truncation separates the joint table from the product of marginals
    assert s.defect <= s.tail_mass
    assert all(v == 0 for v in s.marginals[1][1:])


def test_categorical_split():
    s = categorical_split(CountDistribution("poisson", 3, 60), [F(1, 2), F(3, 10), F(1, 5)])
    assert s.defect < 1e-12 and max(s.pairwise_defects.values()) < 1e-12
    assert max(s.target_gaps) < 1e-12
    g = categorical_split(CountDistribution("geometric", F(1, 2), 40), [F(1, 2), F(3, 10), F(1, 5)])
    assert g.defect > 1e-3


def test_two_way_categorical_is_the_binomial_split():
    N = CountDistribution("geometric", F(1, 3), 30)
    a = split_joint(N, F(2, 7))
    b = categorical_split(N, [F(2, 7), F(5, 7)])
    assert a.table.keys() == b.table.keys()
    with mpmath.workdps(50):
        assert max(abs(a.table[k] - b.table[k]) for k in a.table) < mpmath.mpf(10) ** -45
        assert abs(a.defect - b.defect) < mpmath.mpf(10) ** -45


def test_split_table_against_exact_rationals():
    pmf = [F(1, 10), F(1, 5), F(1, 4), F(1, 4), F(1, 5)]
    p = F(1, 3)
    s = split_joint(CountDistribution("custom", pmf, 4), p)
    with mpmath.workdps(50):
        for (i, j), w in s.table.items():
            exact = pmf[i + j] * comb(i + j, i) * p ** i * (1 - p) ** j
            assert abs(w - mpmath.mpf(exact.numerator) / exact.denominator) < mpmath.mpf(10) ** -45
        assert abs(mpmath.fsum(s.table.values()) - 1) < mpmath.mpf(10) ** -45


@settings(max_examples=15, deadline=None)
@given(st.fractions(min_value=0, max_value=1, max_denominator=20))
def test_defect_symmetric_in_p(p):
    N = CountDistribution("geometric", F(2, 5), 25)
    a = split_joint(N, p).defect
    b = split_joint(N, 1 - p).defect
    assert abs(a - b) < mpmath.mpf(10) ** -40


def test_defect_does_not_grow_with_cutoff_for_poisson():
    prev = None
    for K in (20, 30, 45, 60):
        d = split_joint(CountDistribution("poisson", 2, K), F(3, 10)).defect
        if prev is not None:
            assert d <= prev + mpmath.mpf(10) ** -40
        prev = d


def test_tail_mass_reported():
    short = CountDistribution("poisson", 2, 5)
    s = split_joint(short, F(1, 2))
    assert not s.conclusive and s.tail_mass > 1e-3
    assert CountDistribution("poisson", 2, 60).tail_mass < 1e-12


def test_compound_cases():
    P2 = CountDistribution("poisson", 2, 80)
    assert poissonness_defect(P2, {0: F(7, 10), 1: F(3, 10)}) < 1e-12
    assert poissonness_defect(P2, parse_pmf("0:0.5,2:0.5")) > 1e-3
    G = CountDistribution("geometric", F(1, 2), 80)
    assert poissonness_defect(G, {0: F(7, 10), 1: F(3, 10)}) > 1e-3


@pytest.mark.parametrize("x", ["0:0.7,1:0.3", "0:0.5,2:0.5", "1:0.2,2:0.3,3:0.5"])
def test_wald_identity(x):
    N = CountDistribution("poisson", F(3, 2), 120)
    r = compound(N, parse_pmf(x), 120)
    assert abs(r.mean - r.wald_mean) < 1e-12 + r.tail_mass * 200


def test_compound_against_exact_rationals():
    npmf = [F(1, 4), F(1, 2), F(1, 4)]
    x = {0: F(1, 3), 1: F(1, 3), 2: F(1, 3)}
    r = compound(CountDistribution("custom", npmf, 2), x, 4)
    # X1 + X2 for N = 2 has pmf (1, 2, 3, 2, 1) / 9
    exact = [npmf[0] + npmf[1] / 3 + npmf[2] / 9, npmf[1] / 3 + npmf[2] * 2 / 9, npmf[1] / 3 + npmf[2] * 3 / 9,
             npmf[2] * 2 / 9, npmf[2] / 9]
    with mpmath.workdps(50):
        for a, b in zip(r.pmf, exact):
            assert abs(a - mpmath.mpf(b.numerator) / b.denominator) < mpmath.mpf(10) ** -45


def test_parsing_and_errors():
    assert CountDistribution.parse("poisson:2", 10).param == 2
    assert CountDistribution.parse("custom:0.5,0.5", 3).pmf[2] == 0
    assert parse_pmf("0:1/2,2:1/2") == {0: F(1, 2), 2: F(1, 2)}
    with pytest.raises(PreconditionError):
        CountDistribution("binomial", 2, 10)
    with pytest.raises(PreconditionError):
        CountDistribution("poisson", -1, 10)
    with pytest.raises(PreconditionError):
        split_joint(CountDistribution("poisson", 1, 10), F(3, 2))
    with pytest.raises(PreconditionError):
        categorical_split(CountDistribution("poisson", 1, 10), [F(1, 2), F(1, 3)])
    with pytest.raises(PreconditionError):
        compound(CountDistribution("poisson", 1, 10), {-1: 1})


def test_poisson_pmf_values():
    with mpmath.workdps(50):
        pm = poisson_pmf(2, 3)
        assert abs(pm[3] - mpmath.exp(-2) * 8 / 6) < mpmath.mpf(10) ** -45
