"""Fractional Sobolev norms of sampled test functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SobolevSpec", "fourier_transform", "sobolev_norm", "planar_sobolev_norm"]


@dataclass(frozen=True)
class SobolevSpec:
    """Order ``s`` and frequency range of a Sobolev norm.

    ``k_max`` defaults to the Nyquist frequency of the sampling grid; the
    frequency integral is done with ``order``-point Gauss-Legendre panels of
    width at most ``panel_width``.
    """

    s: float
    k_max: float | None = None
    panel_width: float = 0.5
    order: int = 16
    decay_tol: float = 1e-10

    def __post_init__(self):
        if not self.s > 1.5:
            raise ValueError("Sobolev order must exceed 3/2")


def fourier_transform(phi: np.ndarray, x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """``(1/2 pi) int e^{-ikx} phi(x) dx`` by the trapezoidal rule on a uniform grid."""
    dx = x[1] - x[0]
    k = np.asarray(k, dtype=float)
    out = np.empty(k.shape, dtype=complex)
    step = max(1, 2_000_000 // max(x.size, 1))
    for start in range(0, k.size, step):
        block = k[start:start + step]
        out[start:start + step] = np.exp(-1j * np.outer(block, x)) @ phi
    return out * dx / (2.0 * math.pi)


def _check_grid(phi, x, spec):
    phi = np.asarray(phi, dtype=complex if np.iscomplexobj(phi) else float)
    x = np.asarray(x, dtype=float)
    if phi.shape != x.shape or x.ndim != 1 or x.size < 3:
        raise ValueError("phi and x must be matching 1-d grids")
    dx = np.diff(x)
    if not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
        raise ValueError("grid must be uniform")
    if max(abs(phi[0]), abs(phi[-1])) > spec.decay_tol:
        raise ValueError("support exceeds grid")
    return phi, x


def sobolev_norm(phi, x, spec: SobolevSpec) -> float:
    """``sqrt(int (1+|k|)^{2s} |phi_hat(k)|^2 dk)`` over ``|k| <= k_max``."""
    phi, x = _check_grid(phi, x, spec)
    if not np.any(phi):
        return 0.0
    k_max = spec.k_max if spec.k_max is not None else math.pi / (x[1] - x[0])
    panels = max(1, int(math.ceil(k_max / spec.panel_width)))
    nodes, weights = np.polynomial.legendre.leggauss(spec.order)
    edges = np.linspace(0.0, k_max, panels + 1)
    half = 0.5 * np.diff(edges)
    k = (edges[:-1, None] + half[:, None] * (nodes[None, :] + 1.0)).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    k = np.concatenate((k, -k))
    w = np.concatenate((w, w))
    power = np.abs(fourier_transform(phi, x, k)) ** 2
    return float(math.sqrt(np.sum(w * (1.0 + np.abs(k)) ** (2.0 * spec.s) * power)))


def planar_sobolev_norm(psi, x, rho, spec: SobolevSpec) -> float:
    """``sqrt(sum_t w_t ||psi(., y_t)||_s^2)`` for a discrete measure ``rho``.

    ``psi`` is a sequence of slices, one per atom ``(y_t, w_t)`` of ``rho``.
    """
    if len(psi) != len(rho):
        raise ValueError("one slice of psi is needed per atom of rho")
    return math.sqrt(sum(w * sobolev_norm(p, x, spec) ** 2 for p, (_, w) in zip(psi, rho)))
