"""Non-crossing partitions of {1..n}: enumeration, order, lattice operations,
Moebius function and the Kreweras complement.

Partitions are stored canonically: each block is an increasing tuple and the
blocks are ordered by their minimum element. Equality and hashing therefore
reduce to comparing block tuples.
"""
from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .errors import PreconditionError, ResourceBoundError

DEFAULT_CAP = 12


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def _blocks_cross(a, b) -> bool:
    # Two disjoint blocks cross iff their merged label sequence has >= 4 runs.
    merged = sorted([(x, 0) for x in a] + [(x, 1) for x in b])
    runs = 1
    for (_, u), (_, v) in zip(merged, merged[1:]):
        if u != v:
            runs += 1
            if runs >= 4:
                return True
    return False


def is_noncrossing(blocks) -> bool:
    blocks = list(blocks)
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if _blocks_cross(blocks[i], blocks[j]):
                return False
    return True


@dataclass(frozen=True, slots=True)
class NonCrossingPartition:
    """A non-crossing partition of ``{1, ..., n}`` in canonical form."""

    n: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else 0))
        object.__setattr__(self, "blocks", blocks)
        if self.n < 1:
            raise PreconditionError("ground set size must be positive")
        seen = [x for b in blocks for x in b]
        if any(len(b) == 0 for b in blocks) or sorted(seen) != list(range(1, self.n + 1)):
            raise PreconditionError(f"blocks {blocks} do not partition {{1..{self.n}}}")
        if not is_noncrossing(blocks):
            raise PreconditionError(f"partition {blocks} is crossing")

    @classmethod
    def _trusted(cls, n: int, blocks: tuple) -> "NonCrossingPartition":
        # bypasses validation; caller guarantees canonical non-crossing blocks
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    @classmethod
    def zero(cls, n: int) -> "NonCrossingPartition":
        return cls._trusted(n, tuple((i,) for i in range(1, n + 1)))

    @classmethod
    def one(cls, n: int) -> "NonCrossingPartition":
        return cls._trusted(n, (tuple(range(1, n + 1)),))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "NonCrossingPartition":
        """Parse the text form ``"1,3|2|4"``."""
        blocks = [tuple(int(t) for t in part.split(",") if t.strip()) for part in text.strip().split("|")]
        size = max(x for b in blocks for x in b) if n is None else n
        return cls(size, tuple(blocks))

    def __str__(self) -> str:
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def labels(self) -> list:
        """``labels[i-1]`` is the index of the block containing ``i``."""
        lab = [0] * self.n
        for k, b in enumerate(self.blocks):
            for x in b:
                lab[x - 1] = k
        return lab

    def block_sizes(self) -> tuple:
        return tuple(sorted(len(b) for b in self.blocks))

    def restrict(self, subset) -> "NonCrossingPartition":
        """Restriction to a union of blocks, relabelled order-preservingly to 1..|subset|."""
        subset = sorted(subset)
        pos = {x: i + 1 for i, x in enumerate(subset)}
        blocks = tuple(tuple(pos[x] for x in b) for b in self.blocks if b[0] in pos)
        return NonCrossingPartition._trusted(len(subset), blocks)


def _check_same_n(pi, sigma):
    if pi.n != sigma.n:
        raise PreconditionError(f"ground sets differ: {pi.n} != {sigma.n}")


def leq(pi: NonCrossingPartition, sigma: NonCrossingPartition) -> bool:
    """Reverse refinement: every block of ``pi`` lies inside a block of ``sigma``."""
    _check_same_n(pi, sigma)
    lab = sigma.labels()
    return all(len({lab[x - 1] for x in b}) == 1 for b in pi.blocks)


def meet(pi: NonCrossingPartition, sigma: NonCrossingPartition) -> NonCrossingPartition:
    _check_same_n(pi, sigma)
    lab = sigma.labels()
    parts = {}
    for k, b in enumerate(pi.blocks):
        for x in b:
            parts.setdefault((k, lab[x - 1]), []).append(x)
    return NonCrossingPartition(pi.n, tuple(tuple(v) for v in parts.values()))


def join(pi: NonCrossingPartition, sigma: NonCrossingPartition) -> NonCrossingPartition:
    """Least upper bound in NC(n).

    Starts from the set-partition join and keeps merging crossing blocks; the
    NC join can be strictly coarser than the set-partition join.
    """
    _check_same_n(pi, sigma)
    parent = list(range(pi.n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b in pi.blocks + sigma.blocks:
        for x in b[1:]:
            parent[find(x)] = find(b[0])
    while True:
        groups = {}
        for x in range(1, pi.n + 1):
            groups.setdefault(find(x), []).append(x)
        blocks = list(groups.values())
        merged = False
        for a, b in combinations(blocks, 2):
            if _blocks_cross(a, b):
                parent[find(b[0])] = find(a[0])
                merged = True
                break
        if not merged:
            return NonCrossingPartition(pi.n, tuple(tuple(b) for b in blocks))


def kreweras(pi: NonCrossingPartition) -> NonCrossingPartition:
    """Kreweras complement K(pi), computed as the permutation pi^{-1} o gamma.

    Blocks of ``pi`` are read as increasing cycles and gamma is the long cycle
    (1 2 ... n).
    """
    return NonCrossingPartition._trusted(pi.n, _kreweras_blocks(pi.n, pi.blocks))


def _kreweras_blocks(n: int, blocks: tuple) -> tuple:
    inv = [0] * (n + 1)
    for b in blocks:
        for i, x in enumerate(b):
            inv[x] = b[i - 1]
    # K(i) = pi^{-1}(gamma(i))
    k = [0] * (n + 1)
    for i in range(1, n + 1):
        k[i] = inv[i % n + 1]
    seen = [False] * (n + 1)
    out = []
    for i in range(1, n + 1):
        if not seen[i]:
            cyc = []
            j = i
            while not seen[j]:
                seen[j] = True
                cyc.append(j)
                j = k[j]
            out.append(tuple(sorted(cyc)))
    return tuple(out)


@lru_cache(maxsize=None)
def _shapes(n: int) -> tuple:
    """All NC partitions of {0..n-1} as canonical block tuples.

    Recursion on the block of 0: either {0} is a singleton, or its next element
    is k; then {1..k-1} is an independent NC partition and k's block (within
    {k..n-1}) is extended by 0.
    """
    if n == 0:
        return ((),)
    out = []
    for rest in _shapes(n - 1):
        out.append(((0,),) + tuple(tuple(x + 1 for x in b) for b in rest))
    for k in range(1, n):
        inners = [tuple(tuple(x + 1 for x in b) for b in p) for p in _shapes(k - 1)]
        for outer in _shapes(n - k):
            shifted = [tuple(x + k for x in b) for b in outer]
            head = (0,) + shifted[0]
            tail = tuple(shifted[1:])
            for inner in inners:
                out.append((head,) + inner + tail)
    return tuple(out)


def _raw_elements(n: int) -> list:
    return [tuple(tuple(x + 1 for x in b) for b in shape) for shape in _shapes(n)]


class LatticeTable:
    """All of NC(n) with order queries, Kreweras map and memoized Moebius values.

    Read-only after construction. Lazily filled caches are guarded by a lock
    and only ever receive deterministic values, so concurrent readers are safe.
    """

    def __init__(self, n: int, cap: int = DEFAULT_CAP):
        if not 1 <= n <= cap:
            raise ResourceBoundError(f"n={n} outside enumeration bound 1..{cap}")
        self.n = n
        self.cap = cap
        self.elements = [NonCrossingPartition._trusted(n, b) for b in _raw_elements(n)]
        self.index = {p.blocks: i for i, p in enumerate(self.elements)}
        self.moebius_cache: dict = {}
        self._lock = threading.Lock()
        self._kreweras = None
        self._order = None
        self._top_types = None
        self._top = None
        self._pair_types = None

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def bottom(self) -> NonCrossingPartition:
        return NonCrossingPartition.zero(self.n)

    @property
    def top(self) -> NonCrossingPartition:
        return NonCrossingPartition.one(self.n)

    def idx(self, pi: NonCrossingPartition) -> int:
        if pi.n != self.n:
            raise PreconditionError(f"partition of {pi.n} points used with NC({self.n})")
        return self.index[pi.blocks]

    def leq(self, pi, sigma) -> bool:
        return leq(pi, sigma)

    def kreweras_indices(self) -> list:
        """``kreweras_indices()[i]`` is the index of K(elements[i])."""
        if self._kreweras is None:
            ks = [self.index[_kreweras_blocks(self.n, p.blocks)] for p in self.elements]
            with self._lock:
                self._kreweras = ks
        return self._kreweras

    def kreweras(self, pi) -> NonCrossingPartition:
        return self.elements[self.kreweras_indices()[self.idx(pi)]]

    def order_matrix(self) -> np.ndarray:
        """Boolean zeta matrix ``Z[i, j] = elements[i] <= elements[j]``."""
        if self._order is None:
            if len(self.elements) > 5000:
                raise ResourceBoundError(f"order matrix of NC({self.n}) is too large")
            labs = [p.labels() for p in self.elements]
            size = len(self.elements)
            z = np.zeros((size, size), dtype=bool)
            for j, lab in enumerate(labs):
                for i, p in enumerate(self.elements):
                    z[i, j] = all(len({lab[x - 1] for x in b}) == 1 for b in p.blocks)
            with self._lock:
                self._order = z
        return self._order

    def moebius(self, pi, sigma) -> int:
        i, j = self.idx(pi), self.idx(sigma)
        key = (i, j)
        cached = self.moebius_cache.get(key)
        if cached is not None:
            return cached
        if not leq(pi, sigma):
            raise PreconditionError(f"moebius needs pi <= sigma, got {pi} and {sigma}")
        value = _interval_moebius(pi, sigma)
        with self._lock:
            self.moebius_cache[key] = value
        return value

    def moebius_to_top(self) -> list:
        """Moeb(pi, 1_n) for every element, in element order."""
        if self._top is None:
            # [pi, 1_n] is dual to [0_n, K(pi)]
            ks = self.kreweras_indices()
            vals = []
            for k in ks:
                v = 1
                for u in self.elements[k].blocks:
                    v *= bottom_top_moebius(len(u))
                vals.append(v)
            with self._lock:
                self._top = vals
        return self._top

    def top_types(self) -> Counter:
        """Sum of Moeb(pi, 1_n) grouped by the block-size multiset of pi."""
        if self._top_types is None:
            acc = Counter()
            for p, mu in zip(self.elements, self.moebius_to_top()):
                acc[p.block_sizes()] += mu
            with self._lock:
                self._top_types = acc
        return self._top_types

    def block_types(self) -> Counter:
        return Counter(p.block_sizes() for p in self.elements)

    def pair_types(self) -> Counter:
        """Counts of (sizes of pi, sizes of K(pi)) over NC(n)."""
        if self._pair_types is None:
            ks = self.kreweras_indices()
            acc = Counter()
            for p, k in zip(self.elements, ks):
                acc[(p.block_sizes(), self.elements[k].block_sizes())] += 1
            with self._lock:
                self._pair_types = acc
        return self._pair_types


@lru_cache(maxsize=None)
def bottom_top_moebius(k: int) -> int:
    """Moeb(0_k, 1_k) by the defining recursion.

    Uses Moeb(0_k, 1_k) = -sum_{tau < 1_k} Moeb(0_k, tau) together with the
    factorization [0_k, tau] = prod_V NC(|V|).
    """
    if k == 1:
        return 1
    total = 0
    for sizes, count in Counter(tuple(len(b) for b in raw) for raw in _shapes(k)).items():
        if sizes == (k,):
            continue
        term = count
        for s in sizes:
            term *= bottom_top_moebius(s)
        total += term
    return -total


def _interval_moebius(pi: NonCrossingPartition, sigma: NonCrossingPartition) -> int:
    # [pi, sigma] factors over the blocks W of sigma into [pi|W, 1_W], and
    # K is an order-reversing bijection, so [rho, 1_m] is dual to [0_m, K(rho)].
    value = 1
    for w in sigma.blocks:
        rho = pi.restrict(w)
        for u in _kreweras_blocks(rho.n, rho.blocks):
            value *= bottom_top_moebius(len(u))
    return value


_TABLES: dict = {}
_TABLES_LOCK = threading.Lock()


def lattice(n: int, cap: int = DEFAULT_CAP) -> LatticeTable:
    """Shared, cached ``LatticeTable`` for NC(n)."""
    if not 1 <= n <= cap:
        raise ResourceBoundError(f"n={n} outside enumeration bound 1..{cap}")
    table = _TABLES.get(n)
    if table is None:
        with _TABLES_LOCK:
            table = _TABLES.get(n)
            if table is None:
                table = LatticeTable(n, cap=max(cap, n))
                _TABLES[n] = table
    return table


def enumerate_nc(n: int, cap: int = DEFAULT_CAP) -> LatticeTable:
    """All of NC(n) in canonical enumeration order; ``n > cap`` is refused."""
    return lattice(n, cap)


def moebius(pi: NonCrossingPartition, sigma: NonCrossingPartition, cap: int = DEFAULT_CAP) -> int:
    _check_same_n(pi, sigma)
    return lattice(pi.n, cap).moebius(pi, sigma)
