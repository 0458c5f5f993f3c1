from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freethin.cumulants import (
    CumulantSpec,
    MomentSeq,
    affine_moments,
    cumulants_to_moments,
    free_cumulant,
    kappa_pi,
    moment_from_cumulants,
    moments_to_cumulants,
    phi_pi,
    product_cumulant,
)
from freethin.errors import PreconditionError, ResourceBoundError
from freethin.nc_lattice import NonCrossingPartition as NC, kreweras, lattice

import oracles

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=9)


def test_phi_pi_examples():
    m = MomentSeq((F(2), F(3), F(5)))
    args = ("a", "a", "a")
    assert phi_pi(NC.one(3), args, m) == 5
    assert phi_pi(NC.zero(3), args, m) == 8
    assert phi_pi(NC.parse("1,3|2"), args, m) == 3 * 2
    with pytest.raises(PreconditionError):
        phi_pi(NC.one(2), args, m)


def test_phi_pi_passes_positions_in_order():
    seen = []

    def mf(t):
        seen.append(t)
        return 1

    phi_pi(NC.parse("1,4|2,3"), ("w", "x", "y", "z"), mf)
    assert seen == [("w", "z"), ("x", "y")]


def test_bernoulli_cumulants_from_moments():
    p = F(3, 10)
    k = moments_to_cumulants([p, p, p])
    assert k.values == (p, p - p ** 2, p - 3 * p ** 2 + 2 * p ** 3)


def test_semicircle_has_only_second_cumulant():
    m = [0, 1, 0, 2, 0, 5, 0, 14]
    assert moments_to_cumulants(m).values == (0, 1, 0, 0, 0, 0, 0, 0)
    assert moments_to_cumulants([0] * 6).values == (0,) * 6


def test_free_poisson_moments_are_catalan():
    assert cumulants_to_moments([1] * 10).values == tuple(oracles.catalan(n) for n in range(1, 11))
    lam = F(7, 3)
    assert cumulants_to_moments([lam, lam]).values == (lam, lam + lam ** 2)


def test_transforms_against_enumeration_oracle():
    kappa = [F(1, 2), F(-1, 3), F(2), F(5, 7), F(-3)]
    for n in range(1, 6):
        assert cumulants_to_moments(kappa).values[n - 1] == oracles.moments_by_enumeration(kappa, n)


def test_single_variable_routes_agree():
    m = MomentSeq((F(1), F(3), F(-2), F(7), F(1, 3)))
    direct = moments_to_cumulants(m)
    for n in range(1, 6):
        assert free_cumulant(tuple(range(n)), m) == direct.at(n)
        assert moment_from_cumulants(tuple(range(n)), direct) == m.at(n)


def test_order_above_cap_is_refused():
    with pytest.raises(ResourceBoundError):
        moments_to_cumulants([1] * 13)
    with pytest.raises(ResourceBoundError):
        cumulants_to_moments([1] * 5, cap=4)


def test_product_formula_small_orders():
    lam, p = F(5, 2), F(3, 10)
    kp = CumulantSpec((lam,) * 4)
    kb = moments_to_cumulants([p] * 4)
    assert product_cumulant(1, kp, kb) == lam * p
    assert product_cumulant(2, kp, kb) == lam * p * (lam * (1 - p) + p)
    one = CumulantSpec((F(1),) * 8)
    for n in range(1, 9):
        assert product_cumulant(n, one, moments_to_cumulants([p] * n)) == p


def test_product_formula_fast_path_matches_generic():
    ka = CumulantSpec((F(2), F(-1), F(1, 3), F(4), F(1, 2), F(3)))
    kb = CumulantSpec((F(1, 5), F(7), F(-2), F(1), F(0), F(2, 3)))
    for n in range(1, 7):
        generic = product_cumulant(n, lambda t: ka(t), lambda t: kb(t))
        assert product_cumulant(n, ka, kb) == generic


def test_product_with_unit_returns_first_factor():
    ka = CumulantSpec((F(2), F(-1), F(1, 3), F(4), F(1, 2)))
    unit = CumulantSpec((F(1), 0, 0, 0, 0))
    for n in range(1, 6):
        assert product_cumulant(n, ka, unit) == ka.at(n)


def test_product_formula_by_hand_sum_n4():
    ka = CumulantSpec((F(2), F(3), F(5), F(7)))
    kb = CumulantSpec((F(1, 2), F(1, 3), F(1, 5), F(1, 7)))
    total = 0
    for pi in lattice(4):
        total += kappa_pi(pi, (0,) * 4, ka) * kappa_pi(kreweras(pi), (0,) * 4, kb)
    assert product_cumulant(4, ka, kb) == total


def test_lambda_symmetry_identity():
    # sum_pi lam^|pi| kappa_K(pi)[b] = sum_pi lam^(n+1-|pi|) kappa_pi[b]
    lam, p = F(7, 4), F(2, 9)
    kb = moments_to_cumulants([p] * 7)
    for n in range(1, 8):
        t = lattice(n)
        left = sum(lam ** len(pi) * kappa_pi(t.kreweras(pi), (0,) * n, kb) for pi in t)
        right = sum(lam ** (n + 1 - len(pi)) * kappa_pi(pi, (0,) * n, kb) for pi in t)
        assert left == right


def test_affine_moments_of_complement():
    p = F(1, 4)
    assert affine_moments([p] * 4) == (1 - p,) * 4
    assert affine_moments([F(1), F(2)], const=3, coef=2) == (5, 9 + 12 + 8)


def test_complex_scalars_pass_through():
    z = complex(0.3, 0.4)
    k = moments_to_cumulants([z, z, z])
    assert abs(k.at(2) - (z - z * z)) < 1e-12


@settings(max_examples=40)
@given(st.lists(rationals, min_size=1, max_size=8))
def test_roundtrip_is_exact(m):
    assert cumulants_to_moments(moments_to_cumulants(m)).values == tuple(m)
    assert moments_to_cumulants(cumulants_to_moments(m)).values == tuple(m)


@settings(max_examples=40)
@given(
    st.integers(1, 5),
    rationals,
    rationals,
    st.lists(rationals, min_size=5, max_size=5),
    st.lists(rationals, min_size=5, max_size=5),
)
def test_free_cumulant_is_linear_in_first_slot(n, a, b, x, y):
    # a multilinear oracle: each letter contributes a factor depending on the block size
    table = {"x": x, "y": y, "z": [a * xi + b * yi for xi, yi in zip(x, y)]}

    def mf(t):
        out = 1
        for s in t:
            out *= table[s][len(t) - 1]
        return out

    rest = ("x",) * (n - 1)
    lhs = free_cumulant(("z",) + rest, mf)
    rhs = a * free_cumulant(("x",) + rest, mf) + b * free_cumulant(("y",) + rest, mf)
    assert lhs == rhs
