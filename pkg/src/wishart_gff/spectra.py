"""Eigenvalues, linear/planar statistics, height functions and MC moment estimates."""

from __future__ import annotations

import json
import os
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate, stats

from .rng_ensemble import (
    ArrayHandle,
    CornerFamilySpec,
    SubmatrixSpec,
    materialize_batch,
    wishart,
)

__all__ = [
    "SpectralSample",
    "PlanarTestFn",
    "LinearStat",
    "PlanarStat",
    "CovarianceReport",
    "eigenvalues",
    "linear_statistic",
    "sample_trace",
    "height_function",
    "height_ibp_residual",
    "planar_statistic",
    "sample_spectra",
    "simulate_statistics",
    "estimate_moments",
    "WORKERS_ENV",
]

WORKERS_ENV = "WISHART_GFF_WORKERS"

TestFunction = Union[Sequence[float], Callable[[np.ndarray], np.ndarray]]
Geometry = Union[CornerFamilySpec, tuple[Sequence[SubmatrixSpec], int]]


@dataclass
class SpectralSample:
    """Sorted spectra of one replicate, keyed by corner level or submatrix index."""

    eigs: dict[Hashable, np.ndarray]
    replicate: int = 0
    dims: dict[Hashable, tuple[int, int, int]] = field(default_factory=dict)
    traces: dict[Hashable, float] = field(default_factory=dict)

    def level(self, key: Hashable) -> np.ndarray:
        try:
            return self.eigs[key]
        except KeyError:
            raise KeyError(f"unknown level {key!r}; sample has {sorted(self.eigs, key=str)}") from None


def eigenvalues(W: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (or a stack of them)."""
    W = np.asarray(W)
    scale = max(np.max(np.abs(W)), 1.0) if W.size else 1.0
    if np.max(np.abs(W - np.swapaxes(W, -1, -2).conj()), initial=0.0) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigvalsh(W)


def _evaluate(f: TestFunction, x: np.ndarray) -> np.ndarray:
    if callable(f):
        return np.asarray(f(x), dtype=float)
    return npoly.polyval(x, np.asarray(f, dtype=float))


def linear_statistic(eigs: np.ndarray, f: TestFunction) -> float:
    """Uncentered ``sum_i f(lambda_i)``.

    ``f`` is either a callable or polynomial coefficients in increasing degree.
    """
    eigs = np.asarray(eigs, dtype=float)
    return float(np.sum(_evaluate(f, eigs)))


def sample_trace(sample: SpectralSample, key: Hashable, f: TestFunction) -> float:
    """``tr f(W(key))`` of one sample.

    For polynomial ``f`` the linear term uses ``tr W`` taken from the matrix
    entries when the sample carries it, so statistics that are constant in
    exact arithmetic (Rademacher ``tr W``) come out bit-identical.
    """
    eigs = sample.level(key)
    if callable(f) or key not in sample.traces:
        return linear_statistic(eigs, f)
    c = np.asarray(f, dtype=float)
    total = c[0] * eigs.size if c.size else 0.0
    if c.size > 1:
        total += c[1] * sample.traces[key]
    if c.size > 2:
        total += float(np.sum(np.polynomial.polynomial.polyval(eigs, np.concatenate(([0.0, 0.0], c[2:])))))
    return float(total)


def height_function(sample: SpectralSample, x: float, y: Hashable) -> int:
    """Number of eigenvalues of ``W(y)`` in ``[x, inf)``."""
    eigs = sample.level(y)
    return int(eigs.size - np.searchsorted(eigs, x, side="left"))


def _composite_simpson(f, a: float, b: float, step: float) -> float:
    if b <= a:
        return 0.0
    n = max(2, int(np.ceil((b - a) / step)))
    n += n % 2
    x = np.linspace(a, b, n + 1)
    return float(integrate.simpson(_evaluate(f, x), x=x))


def height_ibp_residual(
    sample: SpectralSample,
    f: Callable[[np.ndarray], np.ndarray],
    support: tuple[float, float],
    y: Hashable,
    quadrature_step: float = 1e-3,
    antiderivative: Callable[[float], float] | None = None,
) -> float:
    """``|int f(x) N_[x,inf) dx - sum_i F(lambda_i)|`` for one level of one sample.

    ``F`` is the antiderivative of ``f`` vanishing at the left end of its
    support; it is computed by adaptive quadrature unless supplied.  The
    left-hand side is integrated with composite Simpson between consecutive
    eigenvalues, where the counting function is constant.
    """
    eigs = sample.level(y)
    a, b = support
    top = float(eigs[-1]) if eigs.size else 0.0
    if a > 0.0 or b < top + 1.0:
        raise ValueError("support excludes spectrum")
    breaks = np.concatenate(([a], eigs, [b]))
    lhs = 0.0
    count = eigs.size
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        # on [lambda_(i), lambda_(i+1)) the count N_[x,inf) equals size - i
        lhs += count * _composite_simpson(f, lo, hi, quadrature_step)
        count -= 1
    if antiderivative is None:
        def antiderivative(t):
            return integrate.quad(lambda s: float(_evaluate(f, np.array([s]))[0]), a, t,
                                  epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    rhs = sum(antiderivative(float(lam)) for lam in eigs)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class PlanarTestFn:
    """One polynomial applied at every level of a discrete measure ``rho``."""

    rho: tuple[tuple[float, float], ...]
    poly: tuple[float, ...]

    def __post_init__(self):
        rho = tuple((float(y), float(w)) for y, w in self.rho)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))
        if not rho:
            raise ValueError("rho must have at least one atom")
        ys = [y for y, _ in rho]
        if any(not 0 < y <= 1 for y in ys):
            raise ValueError("rho atoms must lie in (0, 1]")
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValueError("rho support must be sorted and distinct")
        if any(w <= 0 for _, w in rho):
            raise ValueError("rho weights must be positive")
        if abs(sum(w for _, w in rho) - 1.0) > 1e-12:
            raise ValueError("rho weights must sum to 1")


def planar_statistic(sample: SpectralSample, t: PlanarTestFn) -> float:
    """``sum_t w_t * linear_statistic(W(y_t), poly)``."""
    return float(sum(w * sample_trace(sample, y, t.poly) for y, w in t.rho))


@dataclass(frozen=True)
class LinearStat:
    """``tr f(W(key))`` as a named statistic."""

    f: TestFunction
    key: Hashable = 1.0
    label: str | None = None

    @classmethod
    def monomial(cls, degree: int, key: Hashable = 1.0, label: str | None = None) -> "LinearStat":
        coeffs = tuple([0.0] * degree + [1.0])
        return cls(coeffs, key, label or f"tr W[{key}]^{degree}")

    @property
    def name(self) -> str:
        return self.label or f"linear[{self.key}]"

    def __call__(self, sample: SpectralSample) -> float:
        return sample_trace(sample, self.key, self.f)


@dataclass(frozen=True)
class PlanarStat:
    test_fn: PlanarTestFn
    label: str | None = None

    @property
    def name(self) -> str:
        return self.label or "planar"

    def __call__(self, sample: SpectralSample) -> float:
        return planar_statistic(sample, self.test_fn)


def _geometry_blocks(geometry: Geometry):
    if isinstance(geometry, CornerFamilySpec):
        subs = {y: geometry.submatrix(y) for y in geometry.levels}
        return subs, geometry.L
    specs, L = geometry
    return dict(enumerate(specs)), int(L)


def _bounding_block(subs: Mapping[Hashable, SubmatrixSpec]) -> SubmatrixSpec:
    r0 = min(s.row_range[0] for s in subs.values())
    r1 = max(s.row_range[1] for s in subs.values())
    c0 = min(s.col_range[0] for s in subs.values())
    c1 = max(s.col_range[1] for s in subs.values())
    return SubmatrixSpec((r0, r1), (c0, c1))


def sample_spectra(handle: ArrayHandle, geometry: Geometry, replicates: Sequence[int]) -> list[SpectralSample]:
    """Spectral samples of the given replicates.

    ``geometry`` is a corner family or a pair ``(submatrix specs, L)``; all
    blocks of one replicate are cut from the same array realization.
    """
    subs, L = _geometry_blocks(geometry)
    box = _bounding_block(subs)
    block = materialize_batch(handle, box, replicates)
    spectra = {}
    dims = {}
    traces = {}
    for key, s in subs.items():
        (r0, r1), (c0, c1) = s.row_range, s.col_range
        piece = block[:, r0 - box.row_range[0]:r1 - box.row_range[0], c0 - box.col_range[0]:c1 - box.col_range[0]]
        spectra[key] = eigenvalues(wishart(piece, L))
        dims[key] = (s.shape[0], s.shape[1], L)
        # tr W = sum |S_ij|^2 / L, exact for entries of unit modulus
        traces[key] = np.sum(np.abs(piece) ** 2, axis=(1, 2)) / L
    return [
        SpectralSample({k: v[i] for k, v in spectra.items()}, int(r), dims,
                       {k: float(v[i]) for k, v in traces.items()})
        for i, r in enumerate(replicates)
    ]


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def simulate_statistics(
    statistics: Sequence[Callable[[SpectralSample], float]],
    handle: ArrayHandle,
    geometry: Geometry,
    R: int,
    *,
    chunk: int | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """Matrix of shape ``(R, len(statistics))``; row ``r`` comes from replicate ``r``."""
    subs, _ = _geometry_blocks(geometry)
    size = max(s.shape[0] * s.shape[1] for s in subs.values())
    if chunk is None:
        chunk = max(1, min(R, 2_000_000 // max(size, 1)))
    starts = list(range(0, R, chunk))

    def run(start):
        reps = range(start, min(start + chunk, R))
        samples = sample_spectra(handle, geometry, reps)
        return [[float(s(sample)) for s in statistics] for sample in samples]

    n_workers = _workers(workers)
    if n_workers == 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(run, starts))  # map keeps chunk order
    return np.array([row for part in parts for row in part], dtype=float).reshape(R, len(statistics))


def _standardized(x: np.ndarray):
    k2 = stats.kstat(x, 2)
    if k2 <= 0:
        return 0.0, 0.0
    return stats.kstat(x, 3) / k2**1.5, stats.kstat(x, 4) / k2**2


def _cumulants(x: np.ndarray):
    return stats.kstat(x, 3), stats.kstat(x, 4)


@dataclass
class CovarianceReport:
    """Monte Carlo mean, covariance and cumulants of a set of statistics.

    Standard errors use batch means: the replicates are split into ``B``
    contiguous batches, the estimator is recomputed on each batch and the
    spread of the batch values gives the error bar.
    """

    labels: list[str]
    mean: np.ndarray
    cov: np.ndarray
    k3: np.ndarray
    k4: np.ndarray
    skew: np.ndarray
    kurt: np.ndarray
    se_mean: np.ndarray
    se_cov: np.ndarray
    se_k3: np.ndarray
    se_k4: np.ndarray
    se_skew: np.ndarray
    se_kurt: np.ndarray
    R: int
    B: int
    seed: int | None = None

    @classmethod
    def from_values(cls, values: np.ndarray, labels: Sequence[str], B: int = 20,
                    seed: int | None = None) -> "CovarianceReport":
        values = np.asarray(values, dtype=float)
        R, S = values.shape
        if B < 2 or R < 2 * B:
            raise ValueError(f"need R >= 2B >= 4 replicates, got R={R}, B={B}")
        if len(labels) != S:
            raise ValueError("one label per statistic is required")
        batches = np.array_split(values, B, axis=0)

        def cov_of(x):
            c = np.cov(x, rowvar=False, ddof=1).reshape(S, S)
            upper = np.triu(c)
            return upper + np.triu(upper, 1).T  # mirrored so the result is exactly symmetric

        def per_stat(x, fn):
            return np.array([fn(x[:, s]) for s in range(S)]).T

        def se(batch_values):
            return np.std(np.asarray(batch_values), axis=0, ddof=1) / np.sqrt(B)

        return cls(
            labels=list(labels),
            mean=values.mean(axis=0),
            cov=cov_of(values),
            k3=per_stat(values, lambda x: _cumulants(x)[0]),
            k4=per_stat(values, lambda x: _cumulants(x)[1]),
            skew=per_stat(values, lambda x: _standardized(x)[0]),
            kurt=per_stat(values, lambda x: _standardized(x)[1]),
            se_mean=se([b.mean(axis=0) for b in batches]),
            se_cov=se([cov_of(b) for b in batches]),
            se_k3=se([per_stat(b, lambda x: _cumulants(x)[0]) for b in batches]),
            se_k4=se([per_stat(b, lambda x: _cumulants(x)[1]) for b in batches]),
            se_skew=se([per_stat(b, lambda x: _standardized(x)[0]) for b in batches]),
            se_kurt=se([per_stat(b, lambda x: _standardized(x)[1]) for b in batches]),
            R=R,
            B=B,
            seed=seed,
        )

    def to_dict(self) -> dict:
        arr = lambda a: np.asarray(a).tolist()  # noqa: E731
        return {
            "labels": list(self.labels),
            "mean": arr(self.mean),
            "cov": arr(self.cov),
            "k3": arr(self.k3),
            "k4": arr(self.k4),
            "skew": arr(self.skew),
            "kurt": arr(self.kurt),
            "se_mean": arr(self.se_mean),
            "se_cov": arr(self.se_cov),
            "se_k3": arr(self.se_k3),
            "se_k4": arr(self.se_k4),
            "se_skew": arr(self.se_skew),
            "se_kurt": arr(self.se_kurt),
            "R": self.R,
            "B": self.B,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CovarianceReport":
        kw = {k: np.asarray(d[k], dtype=float) for k in
              ("mean", "cov", "k3", "k4", "skew", "kurt", "se_mean", "se_cov",
               "se_k3", "se_k4", "se_skew", "se_kurt")}
        return cls(labels=list(d["labels"]), R=int(d["R"]), B=int(d["B"]), seed=d.get("seed"), **kw)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    CSV_COLUMNS = ("statistic_i", "statistic_j", "mc_cov", "mc_se")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.CSV_COLUMNS)
            for i, j in zip(*np.triu_indices(len(self.labels))):
                w.writerow([self.labels[i], self.labels[j], repr(float(self.cov[i, j])),
                            repr(float(self.se_cov[i, j]))])


def estimate_moments(
    statistics: Sequence[Callable[[SpectralSample], float]],
    handle: ArrayHandle,
    geometry: Geometry,
    R: int,
    B: int = 20,
    *,
    labels: Sequence[str] | None = None,
    workers: int | None = None,
) -> CovarianceReport:
    """Simulate ``R`` replicates and summarize them with ``B`` batches."""
    if B < 2 or R < 2 * B:
        raise ValueError(f"need R >= 2B >= 4 replicates, got R={R}, B={B}")
    values = simulate_statistics(statistics, handle, geometry, R, workers=workers)
    if labels is None:
        labels = [getattr(s, "name", f"stat{i}") for i, s in enumerate(statistics)]
    return CovarianceReport.from_values(values, labels, B, seed=handle.seed)
