"""Model distributions and the moment oracle for words in free families.

A word is a sequence of ``Letter``s. A letter is the affine element
``const*1 + coef*g`` where ``g`` is a generator of one family. Families are
freely independent of each other, so phi of a word is the sum over
non-crossing partitions whose blocks stay inside one family, of the product
of that family's joint cumulants on the blocks. The sum is evaluated by the
first-block recursion over contiguous sub-words, not by enumerating NC(n).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Iterable, Sequence

from .cumulants import cumulants_to_moments, free_cumulant, moments_to_cumulants
from .errors import PreconditionError, ResourceBoundError
from .nc_lattice import DEFAULT_CAP


@dataclass(frozen=True)
class Letter:
    family: str
    gen: object = 0
    coef: object = 1
    const: object = 0

    def complement(self) -> "Letter":
        """The letter for ``1 - g``."""
        return Letter(self.family, self.gen, -self.coef, 1 - self.const)

    def __str__(self) -> str:
        base = self.family if self.gen == 0 else f"{self.family}{self.gen}"
        if self.const == 0 and self.coef == 1:
            return base
        return f"({self.const}+{self.coef}*{base})"


def word(*letters) -> tuple:
    """Build a word from ``Letter``s or family-id strings ("P", "1-B" allowed)."""
    out = []
    for x in letters:
        if isinstance(x, Letter):
            out.append(x)
        elif isinstance(x, str) and x.startswith("1-"):
            out.append(Letter(x[2:]).complement())
        else:
            out.append(Letter(x))
    return tuple(out)


class Family:
    """A family of generators with known joint moments and cumulants."""

    id: str
    generators: tuple = (0,)

    def moment(self, gens: tuple):
        raise NotImplementedError

    def cumulant(self, gens: tuple):
        raise NotImplementedError

    def _check(self, gens):
        for g in gens:
            if g not in self.generators:
                raise PreconditionError(f"family {self.id!r} has no generator {g!r}")


class _SingleGenerator(Family):
    cap: int = DEFAULT_CAP

    def __init__(self):
        self._m: dict = {}
        self._k: dict = {}
        self._lock = threading.Lock()

    def kappa(self, n: int):
        raise NotImplementedError

    def mom(self, n: int):
        raise NotImplementedError

    def cumulant(self, gens):
        self._check(gens)
        return self.kappa(len(gens))

    def moment(self, gens):
        self._check(gens)
        return 1 if not gens else self.mom(len(gens))

    def cumulant_seq(self, order: int) -> tuple:
        return tuple(self.kappa(k) for k in range(1, order + 1))

    def moment_seq(self, order: int) -> tuple:
        return tuple(self.mom(k) for k in range(1, order + 1))


class CumulantFamily(_SingleGenerator):
    """Single generator given by its free cumulants ``kappa_fn(n)``."""

    def __init__(self, id: str, kappa_fn: Callable[[int], object]):
        super().__init__()
        self.id = id
        self._kappa_fn = kappa_fn

    def kappa(self, n):
        return self._kappa_fn(n)

    def mom(self, n):
        if n not in self._m:
            ms = cumulants_to_moments([self.kappa(k) for k in range(1, n + 1)], cap=max(self.cap, n))
            with self._lock:
                for k, v in enumerate(ms.values, 1):
                    self._m[k] = v
        return self._m[n]


class MomentFamily(_SingleGenerator):
    """Single generator given by its moments ``moment_fn(n)``."""

    def __init__(self, id: str, moment_fn: Callable[[int], object]):
        super().__init__()
        self.id = id
        self._moment_fn = moment_fn

    def mom(self, n):
        return self._moment_fn(n)

    def kappa(self, n):
        if n not in self._k:
            ks = moments_to_cumulants([self.mom(k) for k in range(1, n + 1)], cap=max(self.cap, n))
            with self._lock:
                for k, v in enumerate(ks.values, 1):
                    self._k[k] = v
        return self._k[n]


class FreePoisson(CumulantFamily):
    """Free Poisson with rate lambda and jump alpha: kappa_n = lambda * alpha^n."""

    def __init__(self, rate=1, jump=1, id: str = "P"):
        self.rate, self.jump = rate, jump
        super().__init__(id, lambda n: rate * jump ** n)


class Semicircular(CumulantFamily):
    """Centered semicircular element: kappa_2 = variance, all other cumulants 0."""

    def __init__(self, variance=1, id: str = "S"):
        self.variance = variance
        super().__init__(id, lambda n: variance if n == 2 else 0)


class FreeBernoulli(MomentFamily):
    """All moments equal to ``p``.

    ``p`` may be any scalar (generalized mode); this also models an idempotent
    test element with phi(b) = p.
    """

    def __init__(self, p, id: str = "B"):
        self.p = p
        super().__init__(id, lambda n: p)


Idempotent = FreeBernoulli


class SequenceMomentFamily(MomentFamily):
    """Single generator with an explicit, truncated moment list."""

    def __init__(self, moments: Sequence, id: str = "B"):
        self.moments = tuple(moments)

        def fn(n):
            if n > len(self.moments):
                raise PreconditionError(f"moment data for {id!r} truncated at order {len(self.moments)}")
            return self.moments[n - 1]

        super().__init__(id, fn)


class JointMomentFamily(Family):
    """Several generators with a joint moment oracle on generator words.

    Joint cumulants come from Moebius inversion of the moments of the
    sub-words, computed lazily per word.
    """

    def __init__(self, id: str, generators: Iterable, moment_fn: Callable[[tuple], object], cap: int = DEFAULT_CAP):
        self.id = id
        self.generators = tuple(generators)
        self._moment_fn = moment_fn
        self.cap = cap
        self._k: dict = {}
        self._lock = threading.Lock()

    def moment(self, gens):
        self._check(gens)
        return 1 if not gens else self._moment_fn(tuple(gens))

    def cumulant(self, gens):
        gens = tuple(gens)
        if gens not in self._k:
            self._check(gens)
            value = free_cumulant(gens, self.moment, cap=max(self.cap, len(gens)))
            with self._lock:
                self._k[gens] = value
        return self._k[gens]


class FreeCategorical(JointMomentFamily):
    """Free categorical tuple (b_1, ..., b_k), generators numbered 1..k.

    phi of a generator word is p_l if the word is a power of b_l and 0 as
    soon as two different generators occur (after collapsing equal runs, an
    alternating product of powers has vanishing moment).
    """

    def __init__(self, p: Sequence, id: str = "C", cap: int = DEFAULT_CAP):
        p = tuple(p)
        if len(p) < 2:
            raise PreconditionError("a categorical tuple needs k >= 2")
        exact = all(isinstance(x, (int, Fraction)) for x in p)
        if (sum(p) != 1) if exact else abs(sum(p) - 1) > 1e-12:
            raise PreconditionError(f"probabilities {p} do not sum to 1")
        self.p = p
        super().__init__(id, range(1, len(p) + 1), self._moment, cap=cap)

    def _moment(self, gens):
        first = gens[0]
        if all(g == first for g in gens):
            return self.p[first - 1]
        return 0


@dataclass
class FreeFamilySpec:
    """Freely independent families, keyed by id."""

    families: list
    cap: int = DEFAULT_CAP
    by_id: dict = field(init=False)

    def __post_init__(self):
        self.by_id = {}
        for f in self.families:
            if f.id in self.by_id:
                raise PreconditionError(f"duplicate family id {f.id!r}")
            self.by_id[f.id] = f

    def __getitem__(self, fid) -> Family:
        try:
            return self.by_id[fid]
        except KeyError:
            raise PreconditionError(f"unknown family {fid!r}") from None

    @classmethod
    def from_json(cls, data: dict, cap: int = DEFAULT_CAP) -> "FreeFamilySpec":
        from .scalars import parse_list, parse_scalar

        fams = []
        for entry in data["families"]:
            kind, fid = entry["type"], entry["id"]
            if kind == "free_poisson":
                fams.append(FreePoisson(parse_scalar(entry.get("rate", 1)), parse_scalar(entry.get("jump", 1)), id=fid))
            elif kind == "free_bernoulli":
                fams.append(FreeBernoulli(parse_scalar(entry["p"]), id=fid))
            elif kind == "semicircular":
                fams.append(Semicircular(parse_scalar(entry.get("variance", 1)), id=fid))
            elif kind == "free_categorical":
                p = entry["p"]
                p = parse_list(p) if isinstance(p, str) else [parse_scalar(x) for x in p]
                fams.append(FreeCategorical(p, id=fid, cap=cap))
            elif kind == "moments":
                fams.append(SequenceMomentFamily([parse_scalar(x) for x in entry["moments"]], id=fid))
            else:
                raise PreconditionError(f"unknown family type {kind!r}")
        return cls(fams, cap=cap)


def _block_cumulant(fam: Family, letters: tuple):
    # multilinearity; a constant in any slot kills kappa_s for s >= 2
    if len(letters) == 1:
        (x,) = letters
        return x.const + x.coef * fam.cumulant((x.gen,))
    coef = 1
    for x in letters:
        coef = coef * x.coef
    if coef == 0:
        return 0
    return coef * fam.cumulant(tuple(x.gen for x in letters))


class _WordEvaluator:
    def __init__(self, spec: FreeFamilySpec, w: tuple):
        self.spec = spec
        self.w = w
        self.fams = [spec[x.family] for x in w]
        self.memo: dict = {}

    def phi(self, i: int, j: int):
        if i >= j:
            return 1
        key = (i, j)
        if key in self.memo:
            return self.memo[key]
        fam = self.fams[i]
        same = [k for k in range(i + 1, j) if self.fams[k] is fam]
        total = 0
        for r in range(len(same) + 1):
            for rest in combinations(same, r):
                block = (i,) + rest
                kappa = _block_cumulant(fam, tuple(self.w[k] for k in block))
                if kappa == 0:
                    continue
                term = kappa
                bounds = block + (j,)
                for a, b in zip(bounds, bounds[1:]):
                    term = term * self.phi(a + 1, b)
                    if term == 0:
                        break
                total = total + term
        self.memo[key] = total
        return total


def word_moment(spec: FreeFamilySpec, w: Sequence) -> object:
    """phi of the product of the letters of ``w``."""
    w = tuple(w)
    if not w:
        raise PreconditionError("empty word")
    if len(w) > spec.cap:
        raise ResourceBoundError(f"word length {len(w)} exceeds cap {spec.cap}")
    for x in w:
        spec[x.family]._check((x.gen,))
    return _WordEvaluator(spec, w).phi(0, len(w))


def _as_poly(x) -> tuple:
    """A derived variable: a word, or a list of (coefficient, word) terms."""
    if isinstance(x, tuple) and x and isinstance(x[0], Letter):
        return ((1, x),)
    if isinstance(x, Letter):
        return ((1, (x,)),)
    return tuple((c, tuple(wd)) for c, wd in x)


class DerivedMoments:
    """Mixed moments and free cumulants of derived variables d_1..d_k.

    Each d_i is a polynomial (linear combination of words) in the families of
    ``spec``. Results are memoized per index pattern (0-based).
    """

    def __init__(self, spec: FreeFamilySpec, derived: Sequence):
        self.spec = spec
        self.derived = [_as_poly(d) for d in derived]
        self._m: dict = {}
        self._k: dict = {}
        self._lock = threading.Lock()

    def moment(self, pattern: Sequence):
        pattern = tuple(pattern)
        if not pattern:
            raise PreconditionError("empty monomial")
        if pattern in self._m:
            return self._m[pattern]
        total = 0
        for terms in product(*(self.derived[i] for i in pattern)):
            coef = 1
            letters = ()
            for c, wd in terms:
                coef = coef * c
                letters = letters + wd
            if coef != 0:
                total = total + coef * word_moment(self.spec, letters)
        with self._lock:
            self._m[pattern] = total
        return total

    def cumulant(self, pattern: Sequence):
        pattern = tuple(pattern)
        if pattern not in self._k:
            value = free_cumulant(pattern, self.moment, cap=self.spec.cap)
            with self._lock:
                self._k[pattern] = value
        return self._k[pattern]


def joint_distribution(spec: FreeFamilySpec, polys: Sequence, monomials: Iterable) -> dict:
    """phi of each requested monomial (tuple of 0-based variable indices)."""
    dm = DerivedMoments(spec, polys)
    return {tuple(mono): dm.moment(mono) for mono in monomials}


def mixed_cumulant(spec: FreeFamilySpec, derived: Sequence, pattern: Sequence) -> object:
    """kappa_m(d_{i_1}, ..., d_{i_m}) for a 0-based index pattern."""
    if len(pattern) > spec.cap:
        raise ResourceBoundError(f"pattern length {len(pattern)} exceeds cap {spec.cap}")
    return DerivedMoments(spec, derived).cumulant(pattern)


def nonconstant_patterns(k: int, max_len: int):
    """All index patterns over range(k) of length 2..max_len that are not constant."""
    for m in range(2, max_len + 1):
        for pat in product(range(k), repeat=m):
            if len(set(pat)) > 1:
                yield pat
