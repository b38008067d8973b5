"""Exact ground truth at tiny sizes.

Plane trees are enumerated explicitly, and finite-size trace moments are
summed over every index tuple with the expectation of each tuple factorized
entry by entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rng_ensemble import DistributionKind, EntryDistribution, SubmatrixSpec

__all__ = [
    "PlaneTree",
    "MomentTable",
    "enumerate_plane_trees",
    "narayana_from_trees",
    "exact_trace_moment",
    "exact_trace_covariance",
    "TREE_BUDGET",
    "TUPLE_BUDGET",
]

TREE_BUDGET = 10
TUPLE_BUDGET = 10**7
_CHUNK = 1 << 17


@dataclass(frozen=True)
class PlaneTree:
    """Rooted plane tree; ``children`` is an ordered tuple of subtrees."""

    children: tuple["PlaneTree", ...] = ()

    @property
    def edges(self) -> int:
        return sum(1 + c.edges for c in self.children)

    def depth_counts(self) -> tuple[int, int]:
        """``(e, o)``: vertices at even and odd depth, root included in ``e``."""
        even, odd = 1, 0
        for c in self.children:
            ce, co = c.depth_counts()
            even += co
            odd += ce
        return even, odd

    @property
    def even(self) -> int:
        return self.depth_counts()[0]

    @property
    def odd(self) -> int:
        return self.depth_counts()[1]


@lru_cache(maxsize=None)
def _trees(k: int) -> tuple[PlaneTree, ...]:
    if k == 0:
        return (PlaneTree(),)
    out = []
    # first subtree of the root has j edges, the rest of the tree k - 1 - j
    for j in range(k):
        for first in _trees(j):
            for rest in _trees(k - 1 - j):
                out.append(PlaneTree((first,) + rest.children))
    return tuple(out)


def enumerate_plane_trees(k: int) -> list[PlaneTree]:
    """All rooted plane trees with ``k`` edges (``Catalan(k)`` of them)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > TREE_BUDGET:
        raise ValueError(f"enumeration budget: k = {k} exceeds {TREE_BUDGET}")
    return list(_trees(k))


def narayana_from_trees(k: int, gamma: float) -> tuple[float, float]:
    """``(sum gamma**o(T), sum gamma**e(T))`` over trees with ``k`` edges."""
    odd = even = 0.0
    for t in enumerate_plane_trees(k):
        e, o = t.depth_counts()
        odd += gamma**o
        even += gamma**e
    return odd, even


def _real_moment(kind: DistributionKind, p: int) -> float:
    if p % 2:
        return 0.0
    if kind is DistributionKind.REAL_GAUSSIAN:
        return float(math.prod(range(p - 1, 0, -2)))
    if kind is DistributionKind.RADEMACHER:
        return 1.0
    if kind is DistributionKind.UNIFORM_SYM:
        return 3.0 ** (p // 2) / (p + 1)
    raise ValueError(f"{kind} is not a real distribution")


@dataclass(frozen=True)
class MomentTable:
    """``table[p, q] = E[Z**p conj(Z)**q]`` for ``p + q <= order``."""

    distribution: EntryDistribution
    order: int
    table: np.ndarray

    @classmethod
    def for_distribution(cls, dist, order: int) -> "MomentTable":
        if not isinstance(dist, EntryDistribution):
            dist = EntryDistribution(dist)
        t = np.zeros((order + 1, order + 1))
        for p in range(order + 1):
            for q in range(order + 1 - p):
                if dist.kind is DistributionKind.COMPLEX_GAUSSIAN:
                    # circular law: only balanced monomials survive, E|Z|^{2p} = p!
                    t[p, q] = float(math.factorial(p)) if p == q else 0.0
                else:
                    t[p, q] = _real_moment(dist.kind, p + q)
        t.setflags(write=False)
        return cls(dist, order, t)

    def __call__(self, p: int, q: int) -> float:
        return float(self.table[p, q])


def _tuple_codes(flat: np.ndarray, k: int, spec: SubmatrixSpec) -> np.ndarray:
    """Entry codes of ``tr (S* S)^k`` for the tuples numbered ``flat``.

    A tuple is ``(i_1..i_k, j_1..j_k)`` and contributes
    ``prod_t conj(S[i_t, j_t]) S[i_t, j_{t+1}]``.  Each factor is encoded as
    ``2 * (row * 2**31 + col) + conj`` in absolute array indices.
    """
    (r0, r1), (c0, c1) = spec.row_range, spec.col_range
    m, n = r1 - r0, c1 - c0
    digits = []
    rest = flat
    for base in [m] * k + [n] * k:
        digits.append(rest % base)
        rest = rest // base
    rows = np.stack(digits[:k], axis=1) + r0
    cols = np.stack(digits[k:], axis=1) + c0
    nxt = np.roll(cols, -1, axis=1)
    width = np.int64(1 << 31)
    conj = 2 * (rows * width + cols) + 1
    plain = 2 * (rows * width + nxt)
    return np.concatenate((conj, plain), axis=1)


def _expectations(codes: np.ndarray, moments: MomentTable) -> np.ndarray:
    """``E prod`` of each row of entry codes, using independence across entries."""
    T, K = codes.shape
    s = np.sort(codes, axis=1)
    ids = s >> 1
    conj = (s & 1).astype(np.int64)
    start = np.ones_like(ids, dtype=bool)
    start[:, 1:] = ids[:, 1:] != ids[:, :-1]
    seg = np.cumsum(start.ravel()) - 1
    nseg = int(seg[-1]) + 1
    q = np.bincount(seg, weights=conj.ravel(), minlength=nseg).astype(np.int64)
    size = np.bincount(seg, minlength=nseg)
    p = size - q
    vals = moments.table[p, q]
    row_first_seg = seg.reshape(T, K)[:, 0]
    return np.multiply.reduceat(vals, row_first_seg)


def _check_budget(count: int):
    if count > TUPLE_BUDGET:
        raise ValueError(f"enumeration budget exceeded: {count} tuples > {TUPLE_BUDGET}")


def _moments_for(moments, order):
    if isinstance(moments, MomentTable):
        if moments.order < order:
            raise ValueError("moment table order too small")
        return moments
    return MomentTable.for_distribution(moments, order)


def _mean_sum(k, spec, moments):
    m, n = spec.shape
    total = (m * n) ** k
    acc = 0.0
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        acc += float(np.sum(_expectations(_tuple_codes(flat, k, spec), moments)))
    return acc


def exact_trace_moment(k: int, m: int, n: int, L: int, moments) -> float:
    """Exact ``E tr((S* S / L)^k)`` for an ``m x n`` block of iid entries.

    ``moments`` is a :class:`MomentTable` or an entry distribution.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    _check_budget((m * n) ** k)
    spec = SubmatrixSpec((0, m), (0, n))
    moments = _moments_for(moments, 2 * k)
    return _mean_sum(k, spec, moments) / L**k


def exact_trace_covariance(k: int, l: int, spec1: SubmatrixSpec, spec2: SubmatrixSpec, L: int,
                           moments) -> float:
    """Exact ``Cov(tr W_1^k, tr W_2^l)`` for two blocks of the same array."""
    if k < 1 or l < 1:
        raise ValueError("degrees must be at least 1")
    n1 = (spec1.shape[0] * spec1.shape[1]) ** k
    n2 = (spec2.shape[0] * spec2.shape[1]) ** l
    _check_budget(n1 * n2)
    moments = _moments_for(moments, 2 * (k + l))
    mean1 = _mean_sum(k, spec1, moments)
    mean2 = _mean_sum(l, spec2, moments)
    joint = 0.0
    # outer loop over tuples of the first trace, vectorized over the second
    per_outer = max(1, _CHUNK // n2)
    flat2 = np.arange(n2, dtype=np.int64)
    codes2 = _tuple_codes(flat2, l, spec2)
    for start in range(0, n1, per_outer):
        flat1 = np.arange(start, min(start + per_outer, n1), dtype=np.int64)
        codes1 = _tuple_codes(flat1, k, spec1)
        a = np.repeat(codes1, n2, axis=0)
        b = np.tile(codes2, (flat1.size, 1))
        joint += float(np.sum(_expectations(np.concatenate((a, b), axis=1), moments)))
    return (joint - mean1 * mean2) / L ** (k + l)
