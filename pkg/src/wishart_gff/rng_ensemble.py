"""Index-keyed iid arrays, overlapping submatrices and Wishart matrices.

Every entry ``Z[i, j]`` of the infinite array is a pure function of
``(seed, distribution, i, j)``: it is obtained by hashing the index pair
with a splitmix64-style mixer instead of drawing from a sequential stream.
Overlapping submatrices therefore share their common block bit-for-bit, and
results do not depend on evaluation order or on how work is split between
workers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DistributionKind",
    "EntryDistribution",
    "ArrayHandle",
    "SubmatrixSpec",
    "CornerFamilySpec",
    "entry",
    "materialize",
    "materialize_batch",
    "wishart",
    "corner_family",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 2.0**-53

# floors of y*mu*L are taken after adding this slack so that products such as
# 0.29 * 100 = 28.999999999999996 land on the intended integer
_FLOOR_SLACK = 1e-9


class DistributionKind(str, enum.Enum):
    REAL_GAUSSIAN = "real_gaussian"
    COMPLEX_GAUSSIAN = "complex_gaussian"
    RADEMACHER = "rademacher"
    UNIFORM_SYM = "uniform_sym"


_BETA = {
    DistributionKind.REAL_GAUSSIAN: 1,
    DistributionKind.COMPLEX_GAUSSIAN: 2,
    DistributionKind.RADEMACHER: 1,
    DistributionKind.UNIFORM_SYM: 1,
}

_FOURTH = {
    DistributionKind.REAL_GAUSSIAN: 3.0,
    DistributionKind.COMPLEX_GAUSSIAN: 2.0,
    DistributionKind.RADEMACHER: 1.0,
    DistributionKind.UNIFORM_SYM: 9.0 / 5.0,
}


@dataclass(frozen=True)
class EntryDistribution:
    """Law of a single centered, unit-variance array entry."""

    kind: DistributionKind

    def __post_init__(self):
        object.__setattr__(self, "kind", DistributionKind(self.kind))

    @property
    def beta(self) -> int:
        return _BETA[self.kind]

    @property
    def fourth_moment(self) -> float:
        """``E|Z|^4``."""
        return _FOURTH[self.kind]

    @property
    def is_complex(self) -> bool:
        return self.beta == 2


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; a bijection on uint64
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def _mix_int(x: int) -> int:
    with np.errstate(over="ignore"):
        return int(_mix(np.array([x & _MASK64], dtype=np.uint64))[0])


@dataclass(frozen=True)
class ArrayHandle:
    """Immutable handle on one realization of the infinite iid array."""

    seed: int
    distribution: EntryDistribution

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not isinstance(self.distribution, EntryDistribution):
            object.__setattr__(self, "distribution", EntryDistribution(self.distribution))

    def replicate(self, index: int) -> "ArrayHandle":
        """Handle for Monte Carlo replicate ``index``, derived from the seed."""
        return ArrayHandle(replicate_seed(self.seed, index), self.distribution)


def replicate_seed(seed: int, index: int) -> int:
    if index < 0:
        raise ValueError("replicate index must be nonnegative")
    return _mix_int(_mix_int(seed) ^ _mix_int((index + 1) * int(_GOLDEN)))


def _bits(keys: np.ndarray, rows: np.ndarray, cols: np.ndarray, stream: int) -> np.ndarray:
    counter = (rows.astype(np.uint64) << np.uint64(32)) | cols.astype(np.uint64)
    with np.errstate(over="ignore"):
        h = _mix(keys ^ counter)
        return _mix(h + np.uint64(stream + 1) * _GOLDEN)


def _open_unit(bits: np.ndarray) -> np.ndarray:
    # uniform on the open interval (0, 1), symmetric about 1/2
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53


def _draw(keys, rows, cols, dist: EntryDistribution) -> np.ndarray:
    kind = dist.kind
    if kind is DistributionKind.RADEMACHER:
        b = _bits(keys, rows, cols, 0)
        return np.where((b >> np.uint64(63)) == 0, 1.0, -1.0)
    if kind is DistributionKind.UNIFORM_SYM:
        u = _open_unit(_bits(keys, rows, cols, 0))
        return math.sqrt(3.0) * (2.0 * u - 1.0)
    u1 = _open_unit(_bits(keys, rows, cols, 0))
    u2 = _open_unit(_bits(keys, rows, cols, 1))
    angle = 2.0 * np.pi * u2
    if kind is DistributionKind.REAL_GAUSSIAN:
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(angle)
    # complex: independent real and imaginary parts, each of variance 1/2
    radius = np.sqrt(-np.log(u1))
    return radius * np.cos(angle) + 1j * (radius * np.sin(angle))


def entry(handle: ArrayHandle, i: int, j: int):
    """Entry ``Z[i, j]`` of the array (0-based indices)."""
    if i < 0 or j < 0:
        raise ValueError("array indices must be nonnegative")
    keys = np.array([handle.seed], dtype=np.uint64)
    v = _draw(keys, np.array([i]), np.array([j]), handle.distribution)[0]
    return complex(v) if handle.distribution.is_complex else float(v)


@dataclass(frozen=True)
class SubmatrixSpec:
    """Half-open index block ``[r0, r1) x [c0, c1)`` of the array."""

    row_range: tuple[int, int]
    col_range: tuple[int, int]

    def __post_init__(self):
        (r0, r1), (c0, c1) = self.row_range, self.col_range
        object.__setattr__(self, "row_range", (int(r0), int(r1)))
        object.__setattr__(self, "col_range", (int(c0), int(c1)))
        if r0 < 0 or c0 < 0:
            raise ValueError("submatrix indices must be nonnegative")
        if r1 <= r0 or c1 <= c0:
            raise ValueError(f"degenerate submatrix: rows {self.row_range}, cols {self.col_range}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.row_range[1] - self.row_range[0], self.col_range[1] - self.col_range[0])

    def overlap(self, other: "SubmatrixSpec") -> tuple[int, int]:
        """Number of shared rows and shared columns."""
        rows = min(self.row_range[1], other.row_range[1]) - max(self.row_range[0], other.row_range[0])
        cols = min(self.col_range[1], other.col_range[1]) - max(self.col_range[0], other.col_range[0])
        return max(rows, 0), max(cols, 0)


def _block_indices(spec: SubmatrixSpec):
    (r0, r1), (c0, c1) = spec.row_range, spec.col_range
    rows = np.arange(r0, r1, dtype=np.uint64)[:, None]
    cols = np.arange(c0, c1, dtype=np.uint64)[None, :]
    return rows, cols


def materialize(handle: ArrayHandle, spec: SubmatrixSpec) -> np.ndarray:
    """Dense copy of the block ``spec`` of the array behind ``handle``."""
    if spec.shape[0] <= 0 or spec.shape[1] <= 0:
        raise ValueError("degenerate submatrix")
    rows, cols = _block_indices(spec)
    keys = np.array(handle.seed, dtype=np.uint64)
    return _draw(keys, rows, cols, handle.distribution)


def materialize_batch(handle: ArrayHandle, spec: SubmatrixSpec, replicates: Sequence[int]) -> np.ndarray:
    """Stack of ``materialize(handle.replicate(r), spec)`` for each ``r``.

    Returns an array of shape ``(len(replicates), m, n)``.
    """
    rows, cols = _block_indices(spec)
    keys = np.array([replicate_seed(handle.seed, int(r)) for r in replicates], dtype=np.uint64)
    return _draw(keys[:, None, None], rows[None], cols[None], handle.distribution)


def wishart(S: np.ndarray, L: int) -> np.ndarray:
    """``A* A / L`` with ``A`` one of ``S``, ``S*``, whichever gives the smaller product.

    Works on a single matrix or on a stack of matrices (last two axes).
    """
    S = np.asarray(S)
    if S.ndim < 2 or S.shape[-1] == 0 or S.shape[-2] == 0:
        raise ValueError("degenerate submatrix")
    if L < 1:
        raise ValueError("L must be at least 1")
    A = S if S.shape[-2] >= S.shape[-1] else np.swapaxes(S, -1, -2).conj()
    AH = np.swapaxes(A, -1, -2).conj()
    W = AH @ A / L
    return (W + np.swapaxes(W, -1, -2).conj()) / 2


@dataclass(frozen=True)
class CornerFamilySpec:
    """Nested upper-left corners of a ``[mu L] x [nu L]`` array block."""

    mu: float
    nu: float
    L: int
    levels: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        levels = tuple(float(y) for y in self.levels)
        object.__setattr__(self, "levels", levels)
        if not (self.mu > 0 and self.nu > 0):
            raise ValueError("mu and nu must be positive")
        if self.mu < self.nu:
            raise ValueError("corner families require mu >= nu")
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if not levels:
            raise ValueError("at least one level is required")
        if any(not 0 < y <= 1 for y in levels):
            raise ValueError("levels must lie in (0, 1]")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be sorted and distinct")

    def dims(self, y: float) -> tuple[int, int]:
        return (
            int(math.floor(y * self.mu * self.L + _FLOOR_SLACK)),
            int(math.floor(y * self.nu * self.L + _FLOOR_SLACK)),
        )

    def submatrix(self, y: float) -> SubmatrixSpec:
        m, n = self.dims(y)
        if n == 0:
            raise ValueError(f"empty corner at level {y}")
        return SubmatrixSpec((0, m), (0, n))


def corner_family(handle: ArrayHandle, spec: CornerFamilySpec) -> dict[float, np.ndarray]:
    """Wishart matrix of every corner level, all cut from one array block."""
    specs = {y: spec.submatrix(y) for y in spec.levels}
    full = materialize(handle, specs[spec.levels[-1]])
    out = {}
    for y, sub in specs.items():
        m, n = sub.shape
        out[y] = wishart(full[:m, :n], spec.L)
    return out
