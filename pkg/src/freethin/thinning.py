"""Exact verification of free Poisson thinning and its converses.

All verdicts in rational mode are exact zero / non-zero tests. Complex-float
inputs use ``scalars.is_zero`` with a tolerance; sympy inputs are expanded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

from .cumulants import CumulantSpec, moments_to_cumulants, product_cumulant
from .errors import PreconditionError, SingularPivotError
from .free_models import (
    DerivedMoments,
    FreeBernoulli,
    FreeCategorical,
    FreeFamilySpec,
    FreePoisson,
    Letter,
    nonconstant_patterns,
    word,
    word_moment,
)
from .nc_lattice import DEFAULT_CAP, lattice
from .scalars import DEFAULT_EPS, is_zero, to_json


def _fit_free_poisson(kappas):
    """(rate, jump) matching kappa_1, kappa_2, or None if impossible."""
    k1, k2 = kappas[0], kappas[1]
    if k1 == 0 or k2 == 0:
        return None
    jump = k2 / k1
    return k1 / jump, jump


def _is_free_poisson(kappas, eps=DEFAULT_EPS):
    fit = _fit_free_poisson(kappas)
    if fit is None:
        return False, None
    rate, jump = fit
    ok = all(is_zero(k - rate * jump ** n, eps) for n, k in enumerate(kappas, 1))
    return ok, fit


@dataclass
class ThinningReport:
    rate: object
    jump: object
    p: tuple
    order: int
    mixed_order: int
    cumulants: list  # cumulants[l][n-1] = kappa_n(p b_l)
    max_mixed: object
    mixed_witness: tuple | None
    marginal_free_poisson: list
    marginal_fit: list
    kappa2_defect: object
    kappa3_defect: object | None
    degenerate: bool = False
    notes: list = field(default_factory=list)

    @property
    def free(self) -> bool:
        return is_zero(self.max_mixed)

    def to_dict(self) -> dict:
        d = {
            "rate": self.rate,
            "jump": self.jump,
            "p": list(self.p),
            "order": self.order,
            "mixed_order": self.mixed_order,
            "cumulants": self.cumulants,
            "max_abs_mixed_cumulant": self.max_mixed,
            "mixed_witness": None if self.mixed_witness is None else [i + 1 for i in self.mixed_witness],
            "free": self.free,
            "marginal_free_poisson": self.marginal_free_poisson,
            "marginal_fit": self.marginal_fit,
            "kappa2_defect": self.kappa2_defect,
            "kappa3_defect": self.kappa3_defect,
            "degenerate": self.degenerate,
            "notes": self.notes,
        }
        out = to_json(d)
        out["decimal"] = {
            "kappa2_defect": float(self.kappa2_defect),
            "kappa3_defect": None if self.kappa3_defect is None else float(self.kappa3_defect),
            "max_abs_mixed_cumulant": float(self.max_mixed),
        }
        return out


def _check_params(rate, jump, order, cap):
    if not rate > 0 or not jump > 0:
        raise PreconditionError("rate and jump must be positive")
    if not 1 <= order <= cap:
        raise PreconditionError(f"order must lie in 1..{cap}")


def _mixed_scan(dm: DerivedMoments, k: int, mixed_order: int):
    worst, witness = 0, None
    for pat in nonconstant_patterns(k, mixed_order):
        v = abs(dm.cumulant(pat))
        if v > worst:
            worst, witness = v, pat
    return worst, witness


def verify_thinning(rate, jump, p, order: int, mixed_order: int | None = None, cap: int = DEFAULT_CAP) -> ThinningReport:
    """Cumulants of p*b and p*(1-b), their mixed cumulants and the obstruction values.

    Marginal cumulants use the Kreweras product formula; mixed cumulants use
    the word-moment oracle, so the two routes stay independent.
    """
    _check_params(rate, jump, order, cap)
    if not 0 <= p <= 1:
        raise PreconditionError("p must lie in [0, 1]")
    mixed_order = min(order, cap // 2) if mixed_order is None else mixed_order
    if 2 * mixed_order > cap:
        raise PreconditionError(f"mixed order {mixed_order} needs words longer than cap {cap}")
    n_max = max(order, 3)
    kp = CumulantSpec(tuple(rate * jump ** n for n in range(1, n_max + 1)))
    kb = moments_to_cumulants([p] * n_max, cap=cap)
    kc = moments_to_cumulants([1 - p] * n_max, cap=cap)
    pb = [product_cumulant(n, kp, kb, cap=cap) for n in range(1, n_max + 1)]
    pc = [product_cumulant(n, kp, kc, cap=cap) for n in range(1, n_max + 1)]

    spec = FreeFamilySpec([FreePoisson(rate, jump, id="P"), FreeBernoulli(p, id="B")], cap=cap)
    dm = DerivedMoments(spec, [word("P", "B"), word("P", "1-B")])
    worst, witness = _mixed_scan(dm, 2, mixed_order)

    marg = [_is_free_poisson(pb[:order]), _is_free_poisson(pc[:order])]
    k2_defect = pb[1] + pc[1] - kp.values[1]
    # kappa_3 excess of p*b over the free Poisson matching its first two cumulants
    fit = _fit_free_poisson(pb)
    k3_defect = None if fit is None else pb[2] - fit[0] * fit[1] ** 3
    notes = []
    degenerate = p in (0, 1)
    if degenerate:
        notes.append("p in {0,1}: one factor is 0 or the unit, freeness is trivial")
    return ThinningReport(
        rate=rate,
        jump=jump,
        p=(p, 1 - p),
        order=order,
        mixed_order=mixed_order,
        cumulants=[pb[:order], pc[:order]],
        max_mixed=worst,
        mixed_witness=witness,
        marginal_free_poisson=[m[0] for m in marg],
        marginal_fit=[m[1] for m in marg],
        kappa2_defect=k2_defect,
        kappa3_defect=k3_defect,
        degenerate=degenerate,
        notes=notes,
    )


def kappa2_defect_formula(rate, p, jump=1):
    return 2 * rate * (rate - 1) * p * (1 - p) * jump ** 2


def kappa3_defect_formula(rate, p, jump=1):
    """nu^2 beta^2 (1 - beta) at jump 1, scaled by jump^3."""
    beta = rate * (1 - p) + p
    nu = rate * p / beta
    return nu ** 2 * beta ** 2 * (1 - beta) * jump ** 3


def categorical_thinning(rate, probs: Sequence, order: int, jump=1, mixed_order: int | None = None,
                         cap: int = DEFAULT_CAP) -> ThinningReport:
    """k-way thinning of a free Poisson by a free categorical tuple."""
    _check_params(rate, jump, order, cap)
    probs = tuple(probs)
    if any(not 0 < x < 1 for x in probs):
        raise PreconditionError("categorical probabilities must lie in (0, 1)")
    cat = FreeCategorical(probs, id="C", cap=cap)  # validates the sum
    k = len(probs)
    mixed_order = min(order, cap // 2) if mixed_order is None else mixed_order
    spec = FreeFamilySpec([FreePoisson(rate, jump, id="P"), cat], cap=cap)
    dm = DerivedMoments(spec, [(Letter("P"), Letter("C", l)) for l in range(1, k + 1)])
    cums = [[dm.cumulant((l,) * n) for n in range(1, order + 1)] for l in range(k)]
    worst, witness = _mixed_scan(dm, k, mixed_order)
    marg = [_is_free_poisson(c) if order >= 2 else (None, None) for c in cums]
    k2_defect = sum(c[1] for c in cums) - rate * jump ** 2 if order >= 2 else None
    return ThinningReport(
        rate=rate,
        jump=jump,
        p=probs,
        order=order,
        mixed_order=mixed_order,
        cumulants=cums,
        max_mixed=worst,
        mixed_witness=witness,
        marginal_free_poisson=[m[0] for m in marg],
        marginal_fit=[m[1] for m in marg],
        kappa2_defect=k2_defect,
        kappa3_defect=None,
    )


@dataclass
class CraigResult:
    moment_condition: bool
    cumulants_vanish: bool
    witness: tuple | None  # 1-based index pattern violating the moment condition
    cumulant_witness: tuple | None

    @property
    def free(self) -> bool:
        return self.moment_condition

    @property
    def agree(self) -> bool:
        return self.moment_condition == self.cumulants_vanish


def craig_free_check(spec: FreeFamilySpec, a_words: Sequence, order: int, poisson_id: str = "P",
                     eps: float = DEFAULT_EPS) -> CraigResult:
    """Free Craig criterion for p*a_1, ..., p*a_k with p free Poisson of rate 1.

    Checks phi(a_{i_1}...a_{i_m}) = 0 over non-constant patterns and, on a
    separate route, the vanishing of the mixed cumulants of p*a_l.
    """
    fam = spec[poisson_id]
    if not isinstance(fam, FreePoisson) or fam.rate != 1:
        raise PreconditionError("the Craig criterion needs a free Poisson of rate 1")
    a_words = [tuple(w) if not isinstance(w, Letter) else (w,) for w in a_words]
    p_letter = (Letter(poisson_id),)
    dm = DerivedMoments(spec, [p_letter + w for w in a_words])
    witness = cum_witness = None
    for pat in nonconstant_patterns(len(a_words), order):
        if witness is None:
            letters = tuple(x for i in pat for x in a_words[i])
            if not is_zero(word_moment(spec, letters), eps):
                witness = tuple(i + 1 for i in pat)
        if cum_witness is None and not is_zero(dm.cumulant(pat), eps):
            cum_witness = tuple(i + 1 for i in pat)
        if witness is not None and cum_witness is not None:
            break
    return CraigResult(witness is None, cum_witness is None, witness, cum_witness)


@dataclass
class ReconstructionTrace:
    order: int
    kappas: list  # kappa_n(p) for n = 1..order
    pivots: list  # pivot used at step n = 2..order (or 1..order)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return to_json({"order": self.order, "kappas": self.kappas, "pivots": self.pivots, "notes": self.notes})


def _rest_sum(table, kp: Sequence, kb: Sequence, n: int):
    # sum over pi != 1_n of kappa_pi[p] * kappa_{K(pi)}[b]
    total = 0
    for (sa, sb), count in table.pair_types().items():
        if sa == (n,):
            continue
        term = count
        for s in sa:
            term = term * kp[s - 1]
        for s in sb:
            term = term * kb[s - 1]
        total = total + term
    return total


def reconstruct_rate_one(z, order: int, mean=1, cap: int = DEFAULT_CAP, eps: float = DEFAULT_EPS) -> ReconstructionTrace:
    """Solve for kappa_n(p) from the freeness of p*b and p*(1-b).

    ``z`` is the common value phi(b^n) = phi(b), possibly complex. Step n
    uses kappa_n(pb) + kappa_n(p(1-b)) = kappa_n(p); the unknown enters with
    coefficient z^n + (1-z)^n, so the pivot is Q_n(z) = 1 - z^n - (1-z)^n.
    A vanishing pivot raises ``SingularPivotError`` naming n.
    """
    if order > cap:
        raise PreconditionError(f"order {order} exceeds cap {cap}")
    kb = moments_to_cumulants([z] * order, cap=cap).values
    kc = moments_to_cumulants([1 - z] * order, cap=cap).values
    kp = [Fraction(mean) if isinstance(mean, int) else mean]
    pivots = []
    for n in range(2, order + 1):
        table = lattice(n, cap)
        pivot = 1 - z ** n - (1 - z) ** n
        pivots.append(pivot)
        if is_zero(pivot, eps):
            raise SingularPivotError(n, pivot, f"Q_{n}(phi(b)) = 0: phi(b) lies in the exceptional root set")
        rest = _rest_sum(table, kp, kb, n) + _rest_sum(table, kp, kc, n)
        kp.append(rest / pivot)
    notes = [f"no pivot vanished for 2 <= n <= {order}; membership in the root set beyond n={order} is not certified"]
    return ReconstructionTrace(order, kp, pivots, notes)


def reconstruct_from_marginal(p, jump, order: int, cap: int = DEFAULT_CAP) -> ReconstructionTrace:
    """Solve kappa_n(p) from kappa_n(p*b) = p*jump^n with b free Bernoulli(p)."""
    if order > cap:
        raise PreconditionError(f"order {order} exceeds cap {cap}")
    kb = moments_to_cumulants([p] * order, cap=cap).values
    kp = []
    pivots = []
    for n in range(1, order + 1):
        pivot = p ** n
        pivots.append(pivot)
        if pivot == 0:
            raise SingularPivotError(n, pivot, "p = 0: the marginal carries no information")
        rest = _rest_sum(lattice(n, cap), kp + [0], kb, n)
        kp.append((p * jump ** n - rest) / pivot)
    return ReconstructionTrace(order, kp, pivots)


@dataclass
class ForcedReport:
    order: int
    mixed_moments: dict  # (m1, m2) -> phi(b^m1 (1-b)^m2)
    all_vanish: bool
    constant_moments: bool
    witness: tuple | None
    support_01: bool | None = None
    atom_at_one: object = None

    def to_dict(self) -> dict:
        d = {
            "order": self.order,
            "mixed_moments": {f"{a},{b}": v for (a, b), v in self.mixed_moments.items()},
            "all_vanish": self.all_vanish,
            "constant_moments": self.constant_moments,
            "witness": self.witness,
            "support_01": self.support_01,
            "atom_at_one": self.atom_at_one,
        }
        return to_json(d)


def bernoulli_forced_check(moments: Sequence, order: int | None = None, measure: bool = False) -> ForcedReport:
    """Alternating moments phi(b^m1 (1-b)^m2), m1, m2 >= 1, m1 + m2 <= order.

    With a free rate-one Poisson these are exactly what freeness of p*b and
    p*(1-b) requires to vanish. In measure mode the moments are those of a
    probability measure nu and the integral of x^2 (1-x)^2 decides whether nu
    sits on {0, 1}.
    """
    m = (1,) + tuple(moments)
    order = len(moments) if order is None else order
    if order > len(moments):
        raise PreconditionError("moment data shorter than requested order")
    mixed = {}
    witness = None
    for total in range(2, order + 1):
        for m1 in range(1, total):
            m2 = total - m1
            v = sum(comb(m2, j) * (-1) ** j * m[m1 + j] for j in range(m2 + 1))
            mixed[(m1, m2)] = v
            if witness is None and not is_zero(v):
                witness = (m1, m2)
    constant = all(is_zero(m[n] - m[1]) for n in range(1, order + 1))
    report = ForcedReport(order, mixed, witness is None, constant, witness)
    if measure:
        if len(moments) < 4:
            raise PreconditionError("measure mode needs moments up to order 4")
        integral = m[2] - 2 * m[3] + m[4]
        report.support_01 = is_zero(integral)
        report.atom_at_one = m[1] if report.support_01 else None
    return report


def uniform_moments(order: int) -> tuple:
    """Moments 1/(k+1) of the uniform law on [0, 1]."""
    return tuple(Fraction(1, k + 1) for k in range(1, order + 1))
