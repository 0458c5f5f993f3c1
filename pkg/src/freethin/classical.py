"""Exact truncated-pmf checks of classical count thinning.

Everything is computed in mpmath at 50 significant digits so that defects
around 1e-12 are far above roundoff. Tables are truncated at a cutoff K; the
neglected tail mass is always reported next to the defects it limits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import mpmath

from .errors import PreconditionError
from .scalars import parse_scalar

DPS = 50
CONCLUSIVE_TAIL = 1e-12


def _mp(x):
    # Fractions go through numerator/denominator to stay exact up to DPS
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def poisson_pmf(lam, K: int) -> list:
    with mpmath.workdps(DPS):
        lam = _mp(lam)
        out = [mpmath.exp(-lam)]
        for k in range(1, K + 1):
            out.append(out[-1] * lam / k)
        return out


@dataclass
class CountDistribution:
    kind: str  # "poisson", "geometric" or "custom"
    param: object
    cutoff: int
    pmf: list = field(repr=False, default=None)

    def __post_init__(self):
        if self.cutoff < 0:
            raise PreconditionError("cutoff must be nonnegative")
        with mpmath.workdps(DPS):
            if self.kind == "poisson":
                if not _mp(self.param) > 0:
                    raise PreconditionError("Poisson rate must be positive")
                self.pmf = poisson_pmf(self.param, self.cutoff)
            elif self.kind == "geometric":
                q = _mp(self.param)
                if not 0 < q <= 1:
                    raise PreconditionError("geometric parameter must lie in (0, 1]")
                # P(N = k) = q (1 - q)^k, k >= 0
                self.pmf = [q * (1 - q) ** k for k in range(self.cutoff + 1)]
            elif self.kind == "custom":
                vals = [_mp(v) for v in self.param]
                if any(v < 0 for v in vals):
                    raise PreconditionError("pmf values must be nonnegative")
                self.pmf = (vals + [mpmath.mpf(0)] * (self.cutoff + 1))[: self.cutoff + 1]
            else:
                raise PreconditionError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str, cutoff: int) -> "CountDistribution":
        """``poisson:2``, ``geometric:0.5`` or ``custom:0.2,0.5,0.3``."""
        kind, _, arg = text.partition(":")
        if kind == "custom":
            return cls(kind, [parse_scalar(a) for a in arg.split(",")], cutoff)
        return cls(kind, parse_scalar(arg), cutoff)

    @property
    def tail_mass(self):
        with mpmath.workdps(DPS):
            return max(mpmath.mpf(0), 1 - mpmath.fsum(self.pmf))

    @property
    def mean(self):
        with mpmath.workdps(DPS):
            return mpmath.fsum(k * p for k, p in enumerate(self.pmf))


@dataclass
class SplitJoint:
    k: int
    cutoff: int
    table: dict = field(repr=False)  # index tuple -> probability
    marginals: list = field(repr=False)
    defect: object  # full independence, sup norm on the truncated table
    pairwise_defects: dict
    marginal_gaps: list  # sup gap of each marginal to Poisson(its mean)
    target_gaps: list  # sup gap to Poisson(lambda p_l) when N is Poisson
    tail_mass: object

    @property
    def conclusive(self) -> bool:
        return float(self.tail_mass) < CONCLUSIVE_TAIL

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "cutoff": self.cutoff,
            "defect": float(self.defect),
            "pairwise_defects": {f"{a},{b}": float(v) for (a, b), v in self.pairwise_defects.items()},
            "marginal_gaps": [float(g) for g in self.marginal_gaps],
            "target_gaps": [float(g) for g in self.target_gaps] if self.target_gaps else None,
            "tail_mass": float(self.tail_mass),
            "conclusive": self.conclusive,
        }


def _poisson_gap(pmf: list, lam) -> object:
    ref = poisson_pmf(lam, len(pmf) - 1)
    return max(abs(a - b) for a, b in zip(pmf, ref))


def categorical_split(N: CountDistribution, probs: Sequence, K: int | None = None) -> SplitJoint:
    """Multinomial split of N into k classes; independence and Poisson checks."""
    K = N.cutoff if K is None else K
    if K > N.cutoff:
        raise PreconditionError("table cutoff exceeds the distribution cutoff")
    with mpmath.workdps(DPS):
        ps = [_mp(p) for p in probs]
        if any(p < 0 for p in ps) or abs(mpmath.fsum(ps) - 1) > mpmath.mpf(10) ** (-DPS + 5):
            raise PreconditionError("probabilities must be nonnegative and sum to 1")
        k = len(ps)
        fact = [mpmath.factorial(i) for i in range(K + 1)]
        powers = [[p ** i for i in range(K + 1)] for p in ps]
        table = {}
        for idx in product(range(K + 1), repeat=k - 1):
            s = sum(idx)
            if s > K:
                continue
            for last in range(K - s + 1):
                full = idx + (last,)
                total = s + last
                w = N.pmf[total] * fact[total]
                for i, pw in zip(full, powers):
                    w = w * pw[i] / fact[i]
                table[full] = w
        marg = [[mpmath.mpf(0)] * (K + 1) for _ in range(k)]
        for full, w in table.items():
            for l, i in enumerate(full):
                marg[l][i] += w
        defect = mpmath.mpf(0)
        for full, w in table.items():
            prod_m = mpmath.mpf(1)
            for l, i in enumerate(full):
                prod_m *= marg[l][i]
            defect = max(defect, abs(w - prod_m))
        pairwise = {}
        for a in range(k):
            for b in range(a + 1, k):
                joint2: dict = {}
                for full, w in table.items():
                    key = (full[a], full[b])
                    joint2[key] = joint2.get(key, 0) + w
                pairwise[(a, b)] = max(abs(w - marg[a][i] * marg[b][j]) for (i, j), w in joint2.items())
        means = [mpmath.fsum(i * v for i, v in enumerate(mg)) for mg in marg]
        gaps = [_poisson_gap(mg, mu) for mg, mu in zip(marg, means)]
        target = [_poisson_gap(mg, _mp(N.param) * p) for mg, p in zip(marg, ps)] if N.kind == "poisson" else []
        return SplitJoint(k, K, table, marg, defect, pairwise, gaps, target, N.tail_mass)


def split_joint(N: CountDistribution, p, K: int | None = None) -> SplitJoint:
    """Binomial split of N into (S_N, N - S_N)."""
    with mpmath.workdps(DPS):
        p = _mp(p)
        if not 0 <= p <= 1:
            raise PreconditionError("p must lie in [0, 1]")
        return categorical_split(N, [p, 1 - p], K)


@dataclass
class CompoundReport:
    cutoff: int
    pmf: list = field(repr=False)
    mean: object
    wald_mean: object
    gap: object  # sup gap to Poisson(mean)
    tail_mass: object

    def to_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "defect": float(self.gap),
            "mean": float(self.mean),
            "wald_mean": float(self.wald_mean),
            "tail_mass": float(self.tail_mass),
        }


def parse_pmf(text: str) -> dict:
    """``"0:0.5,2:0.5"`` -> {0: 0.5, 2: 0.5} with exact values."""
    out = {}
    for item in text.split(","):
        k, v = item.split(":")
        out[int(k)] = parse_scalar(v.strip())
    return out


def compound(N: CountDistribution, x_pmf: dict, K: int | None = None) -> CompoundReport:
    """pmf of S_N = X_1 + ... + X_N by exact convolution, truncated at K."""
    K = N.cutoff if K is None else K
    if any(k < 0 for k in x_pmf):
        raise PreconditionError("X must take nonnegative integer values")
    with mpmath.workdps(DPS):
        x = [mpmath.mpf(0)] * (K + 1)
        for k, v in x_pmf.items():
            if k <= K:
                x[k] = _mp(v)
        conv = [mpmath.mpf(1)] + [mpmath.mpf(0)] * K  # pmf of X^{*0}
        out = [mpmath.mpf(0)] * (K + 1)
        # with X >= 1 a.s., X^{*j} lives on [j, inf) and j > K contributes nothing
        n_terms = min(K, N.cutoff) if x[0] == 0 else N.cutoff
        for j in range(n_terms + 1):
            w = N.pmf[j]
            for s in range(K + 1):
                out[s] += w * conv[s]
            conv = [mpmath.fsum(conv[s - t] * x[t] for t in range(s + 1)) for s in range(K + 1)]
        mean = mpmath.fsum(s * v for s, v in enumerate(out))
        ex = mpmath.fsum(_mp(v) * k for k, v in x_pmf.items())
        gap = _poisson_gap(out, mean)
        tail = max(mpmath.mpf(0), 1 - mpmath.fsum(out))
        return CompoundReport(K, out, mean, N.mean * ex, gap, tail)


def poissonness_defect(N: CountDistribution, x_pmf: dict, K: int | None = None):
    return compound(N, x_pmf, K).gap
