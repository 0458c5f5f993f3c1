"""Moment and free-cumulant functionals over NC(n).

A *multi-functional* is any callable taking a tuple of arguments (the letters
of a sub-word, in increasing position order) and returning a scalar. It plays
the role of phi_V or kappa_V on one block. ``MomentSeq`` and ``CumulantSpec``
are the single-variable special case: they only look at the tuple length.

Every identity is handled at a finite truncation order; nothing is symbolic
in n.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence

from .errors import PreconditionError, ResourceBoundError
from .nc_lattice import DEFAULT_CAP, NonCrossingPartition, lattice

MultiFunctional = Callable[[tuple], object]


@dataclass(frozen=True)
class ScalarSeq:
    """A truncated scalar sequence ``values[k-1]`` for orders k = 1..order."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def order(self) -> int:
        return len(self.values)

    def at(self, k: int):
        if not 1 <= k <= self.order:
            raise PreconditionError(f"order {k} outside 1..{self.order}")
        return self.values[k - 1]

    def __call__(self, args) -> object:
        return self.at(len(args))

    def __len__(self) -> int:
        return self.order


class MomentSeq(ScalarSeq):
    """Moments m_1..m_N of a single variable."""


class CumulantSpec(ScalarSeq):
    """Free cumulants kappa_1..kappa_N of a single variable."""


def _table(n: int, cap: int):
    if n > cap:
        raise ResourceBoundError(f"order {n} exceeds lattice cap {cap}")
    return lattice(n, cap)


def _prod(values):
    out = 1
    for v in values:
        out = out * v
    return out


def phi_pi(pi: NonCrossingPartition, args: Sequence, mf: MultiFunctional):
    """Multiplicative extension: product over blocks V of ``mf(args restricted to V)``."""
    if pi.n != len(args):
        raise PreconditionError(f"partition of {pi.n} points applied to {len(args)} arguments")
    return _prod(mf(tuple(args[i - 1] for i in block)) for block in pi.blocks)


kappa_pi = phi_pi


def free_cumulant(args: Sequence, mf: MultiFunctional, cap: int = DEFAULT_CAP):
    """kappa_n(args) = sum_pi Moeb(pi, 1_n) phi_pi[args]."""
    table = _table(len(args), cap)
    total = 0
    for pi, mu in zip(table.elements, table.moebius_to_top()):
        if mu:
            total = total + mu * phi_pi(pi, args, mf)
    return total


def moment_from_cumulants(args: Sequence, kf: MultiFunctional, cap: int = DEFAULT_CAP):
    """phi(a_1 ... a_n) = sum_pi kappa_pi[args]."""
    table = _table(len(args), cap)
    total = 0
    for pi in table.elements:
        total = total + phi_pi(pi, args, kf)
    return total


def _by_type(weights, seq: Sequence):
    total = 0
    for sizes, w in weights.items():
        if w:
            total = total + w * _prod(seq[s - 1] for s in sizes)
    return total


def moments_to_cumulants(m: MomentSeq | Sequence, cap: int = DEFAULT_CAP) -> CumulantSpec:
    values = tuple(m.values if isinstance(m, ScalarSeq) else m)
    if len(values) > cap:
        raise ResourceBoundError(f"order {len(values)} exceeds lattice cap {cap}")
    out = [_by_type(_table(n, cap).top_types(), values) for n in range(1, len(values) + 1)]
    return CumulantSpec(tuple(out))


def cumulants_to_moments(k: CumulantSpec | Sequence, cap: int = DEFAULT_CAP) -> MomentSeq:
    values = tuple(k.values if isinstance(k, ScalarSeq) else k)
    if len(values) > cap:
        raise ResourceBoundError(f"order {len(values)} exceeds lattice cap {cap}")
    out = [_by_type(_table(n, cap).block_types(), values) for n in range(1, len(values) + 1)]
    return MomentSeq(tuple(out))


def product_cumulant(
    n: int,
    kappa_a: MultiFunctional,
    kappa_b: MultiFunctional,
    args_a: Sequence | None = None,
    args_b: Sequence | None = None,
    cap: int = DEFAULT_CAP,
):
    """kappa_n(a_1 b_1, ..., a_n b_n) for free families {a_i} and {b_i}.

    Evaluates sum_pi kappa_pi[a] * kappa_{K(pi)}[b]. The argument tuples default
    to positions 0..n-1, which is all a single-variable ``CumulantSpec`` needs.
    """
    table = _table(n, cap)
    args_a = tuple(range(n)) if args_a is None else tuple(args_a)
    args_b = tuple(range(n)) if args_b is None else tuple(args_b)
    if len(args_a) != n or len(args_b) != n:
        raise PreconditionError("argument tuples must have length n")
    if isinstance(kappa_a, ScalarSeq) and isinstance(kappa_b, ScalarSeq):
        ka, kb = kappa_a.values, kappa_b.values
        if len(ka) < n or len(kb) < n:
            raise PreconditionError(f"cumulant data truncated below order {n}")
        total = 0
        for (sa, sb), count in table.pair_types().items():
            total = total + count * _prod(ka[s - 1] for s in sa) * _prod(kb[s - 1] for s in sb)
        return total
    ks = table.kreweras_indices()
    total = 0
    for pi, k in zip(table.elements, ks):
        total = total + phi_pi(pi, args_a, kappa_a) * phi_pi(table.elements[k], args_b, kappa_b)
    return total


def affine_moments(m: Sequence, const=1, coef=-1) -> tuple:
    """Moments of ``const*1 + coef*b`` from the moments of b (binomial expansion)."""
    full = (1,) + tuple(m)
    out = []
    for n in range(1, len(full)):
        out.append(sum(comb(n, j) * const ** (n - j) * coef ** j * full[j] for j in range(n + 1)))
    return tuple(out)
