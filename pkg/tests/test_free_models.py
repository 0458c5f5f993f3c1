from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freethin.cumulants import cumulants_to_moments
from freethin.errors import PreconditionError, ResourceBoundError
from freethin.free_models import (
    DerivedMoments,
    FreeBernoulli,
    FreeCategorical,
    FreeFamilySpec,
    FreePoisson,
    Letter,
    Semicircular,
    SequenceMomentFamily,
    joint_distribution,
    mixed_cumulant,
    nonconstant_patterns,
    word,
    word_moment,
)

import oracles


def oracle_word_moment(spec, w):
    """Expand affine letters into signed plain words, then sum over all
    non-crossing partitions with single-family blocks."""
    total = 0
    choices = []
    for x in w:
        opts = []
        if x.const != 0:
            opts.append((x.const, None))
        if x.coef != 0:
            opts.append((x.coef, Letter(x.family, x.gen)))
        choices.append(opts)
    for pick in product(*choices):
        coef = 1
        plain = []
        for c, letter in pick:
            coef *= c
            if letter is not None:
                plain.append(letter)
        if not plain:
            total += coef
            continue
        n = len(plain)
        s = 0
        for blocks in oracles.brute_nc(n):
            term = 1
            for b in blocks:
                fams = {plain[i - 1].family for i in b}
                if len(fams) > 1:
                    term = 0
                    break
                fam = spec[plain[b[0] - 1].family]
                term *= fam.cumulant(tuple(plain[i - 1].gen for i in b))
            s += term
        total += coef * s
    return total


def mixed_spec():
    return FreeFamilySpec([
        FreePoisson(F(2), F(1, 2), id="P"),
        Semicircular(F(3), id="S"),
        FreeBernoulli(F(1, 3), id="B"),
        FreeCategorical([F(1, 5), F(1, 2), F(3, 10)], id="C"),
    ])


def test_small_words():
    lam, p = F(5, 2), F(3, 10)
    spec = FreeFamilySpec([FreePoisson(lam, id="P"), FreeBernoulli(p, id="B")])
    assert word_moment(spec, word("P", "B")) == lam * p
    assert word_moment(spec, word("P", "1-B")) == lam * (1 - p)
    s = FreeFamilySpec([Semicircular(1, id="S")])
    assert word_moment(s, word("S", "S", "S", "S")) == 2
    assert word_moment(s, word("S", "S", "S")) == 0


def test_semicircle_moments_scale_with_variance():
    a2 = F(9, 4)
    spec = FreeFamilySpec([Semicircular(a2, id="S")])
    for k in range(1, 6):
        assert word_moment(spec, word(*["S"] * (2 * k))) == a2 ** k * oracles.catalan(k)


@pytest.mark.parametrize("fam", [
    FreePoisson(F(7, 3), F(2, 5), id="X"),
    FreeBernoulli(F(2, 7), id="X"),
    Semicircular(F(5), id="X"),
    SequenceMomentFamily([F(1), F(2), F(-1), F(4), F(1, 2), F(3)], id="X"),
])
def test_single_family_words_are_its_moments(fam):
    spec = FreeFamilySpec([fam])
    ms = cumulants_to_moments([fam.cumulant((0,) * k) for k in range(1, 7)]).values
    for n in range(1, 7):
        assert word_moment(spec, word(*["X"] * n)) == ms[n - 1]


def test_compressed_idempotent_is_free_poisson():
    # s a s with s semicircular of variance v and a idempotent with phi(a) = t
    v, t = F(3, 2), F(2, 5)
    spec = FreeFamilySpec([Semicircular(v, id="S"), FreeBernoulli(t, id="A")])
    dm = DerivedMoments(spec, [word("S", "A", "S")])
    target = cumulants_to_moments([t * v ** k for k in range(1, 5)]).values
    for k in range(1, 5):
        assert dm.moment((0,) * k) == target[k - 1]


def test_two_way_categorical_is_bernoulli_and_complement():
    p = F(3, 8)
    cat = FreeFamilySpec([FreeCategorical([p, 1 - p], id="C")])
    ber = FreeFamilySpec([FreeBernoulli(p, id="B")])
    c1, c2 = Letter("C", 1), Letter("C", 2)
    b, nb = Letter("B"), Letter("B").complement()
    for n in range(1, 9):
        for pat in product((0, 1), repeat=n):
            lhs = word_moment(cat, tuple(c1 if i == 0 else c2 for i in pat))
            rhs = word_moment(ber, tuple(b if i == 0 else nb for i in pat))
            assert lhs == rhs


@pytest.mark.parametrize("alpha", [F(1), F(3, 2)])
def test_craig_identity_for_unit_rate_poisson(alpha):
    # kappa_m(p a_1, ..., p a_m) = alpha^m phi(a_1 ... a_m) for p of rate one
    spec = FreeFamilySpec([FreePoisson(1, alpha, id="P"), FreeCategorical([F(1, 4), F(1, 4), F(1, 2)], id="C")])
    derived = [word("P", Letter("C", g)) for g in (1, 2, 3)]
    dm = DerivedMoments(spec, derived)
    for m in range(1, 5):
        for pat in product(range(3), repeat=m):
            inner = word_moment(spec, tuple(Letter("C", g + 1) for g in pat))
            assert dm.cumulant(pat) == alpha ** m * inner


def test_joint_distribution_square():
    p = F(1, 3)
    spec = FreeFamilySpec([FreePoisson(1, id="P"), FreeBernoulli(p, id="B")])
    out = joint_distribution(spec, [word("P", "B")], [(0,), (0, 0)])
    assert out == {(0,): p, (0, 0): p + p ** 2}


def test_polynomial_derived_variables():
    spec = mixed_spec()
    d = [[(2, word("P")), (-1, word("S", "S"))]]
    dm = DerivedMoments(spec, d)
    x = 2 * word_moment(spec, word("P")) - word_moment(spec, word("S", "S"))
    assert dm.moment((0,)) == x


def test_errors():
    spec = mixed_spec()
    with pytest.raises(PreconditionError):
        word_moment(spec, ())
    with pytest.raises(PreconditionError):
        word_moment(spec, word("Z"))
    with pytest.raises(PreconditionError):
        word_moment(spec, (Letter("C", 7),))
    with pytest.raises(ResourceBoundError):
        word_moment(spec, word(*["P"] * 13))
    with pytest.raises(ResourceBoundError):
        mixed_cumulant(spec, [word("P")], (0,) * 13)
    with pytest.raises(PreconditionError):
        FreeFamilySpec([FreePoisson(id="P"), FreeBernoulli(F(1, 2), id="P")])
    with pytest.raises(PreconditionError):
        FreeCategorical([F(1, 2), F(1, 3)])
    with pytest.raises(PreconditionError):
        word_moment(FreeFamilySpec([SequenceMomentFamily([1, 2], id="X")]), word("X", "X", "X"))


def test_spec_from_json():
    spec = FreeFamilySpec.from_json({"families": [
        {"type": "free_poisson", "id": "P", "rate": "2", "jump": "1/2"},
        {"type": "free_bernoulli", "id": "B", "p": "1/3"},
    ]})
    assert word_moment(spec, word("P", "B")) == F(1, 3)
    with pytest.raises(PreconditionError):
        FreeFamilySpec.from_json({"families": [{"type": "nope", "id": "X"}]})


def test_nonconstant_patterns_count():
    pats = list(nonconstant_patterns(2, 4))
    assert len(pats) == (4 - 2) + (8 - 2) + (16 - 2)
    assert all(len(set(p)) > 1 for p in pats)


LETTERS = [
    Letter("P"), Letter("S"), Letter("B"), Letter("B").complement(),
    Letter("C", 1), Letter("C", 2), Letter("C", 3), Letter("P", 0, F(2), F(-1)),
]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(LETTERS), min_size=1, max_size=7))
def test_word_moment_matches_partition_sum(letters):
    spec = mixed_spec()
    assert word_moment(spec, tuple(letters)) == oracle_word_moment(spec, tuple(letters))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(LETTERS), min_size=2, max_size=7), st.integers(0, 6))
def test_word_moment_is_tracial(letters, shift):
    spec = mixed_spec()
    w = tuple(letters)
    k = shift % len(w)
    assert word_moment(spec, w) == word_moment(spec, w[k:] + w[:k])
