"""Coordinate chart of the spectral bulk, free-field kernels and the Marchenko-Pastur density."""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "omega_inverse",
    "omega_forward",
    "green_upper_half_plane",
    "gff_kernel",
    "lemma_kernel",
    "kernel_mode_series",
    "mp_density",
]


def omega_inverse(z: complex, mu: float, nu: float) -> tuple[float, float]:
    """Map ``z`` in the closed upper half-plane to bulk coordinates ``(x, y)``.

    The semicircle ``|z| = y`` goes to the horizontal segment
    ``[y (sqrt(mu) - sqrt(nu))**2, y (sqrt(mu) + sqrt(nu))**2]``.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValueError("omega_inverse expects Im z >= 0")
    r = abs(z)
    return r * (mu + nu) + 2.0 * math.sqrt(mu * nu) * z.real, r


def omega_forward(x: float, y: float, mu: float, nu: float, tol: float = 1e-12) -> complex:
    """Inverse of :func:`omega_inverse` on the bulk ``|x - y(mu+nu)| <= 2 y sqrt(mu nu)``."""
    if y <= 0:
        raise ValueError("outside bulk: y must be positive")
    half_width = 2.0 * y * math.sqrt(mu * nu)
    offset = x - y * (mu + nu)
    if abs(offset) > half_width * (1 + tol):
        raise ValueError("outside bulk")
    re = offset / (2.0 * math.sqrt(mu * nu))
    return complex(re, math.sqrt(max((y - re) * (y + re), 0.0)))


def green_upper_half_plane(w1: complex, w2: complex) -> float:
    """``(1/2 pi) log |(w1 - conj w2) / (w1 - w2)|``."""
    if w1 == w2:
        raise ValueError("kernel singularity")
    return math.log(abs((w1 - w2.conjugate()) / (w1 - w2))) / (2.0 * math.pi)


def gff_kernel(z1: complex, z2: complex, mu: float, nu: float) -> float:
    """Free-field covariance kernel between bulk points ``z = x + i y``.

    Each point is sent to the upper half-plane by :func:`omega_forward` and
    the half-plane Green's function is evaluated there.
    """
    z1, z2 = complex(z1), complex(z2)
    if z1 == z2:
        raise ValueError("kernel singularity")
    if z1.imag <= 0 or z2.imag <= 0:
        raise ValueError("points must lie in the open upper half-plane")
    w1 = omega_forward(z1.real, z1.imag, mu, nu)
    w2 = omega_forward(z2.real, z2.imag, mu, nu)
    return green_upper_half_plane(w1, w2)


def lemma_kernel(zeta1: complex, zeta2: complex, theta: float) -> float:
    """``log |(1/theta - zeta1 zeta2) / (1/theta - zeta1 conj(zeta2))|``."""
    if theta == 0.0:
        return 0.0
    t = 1.0 / theta
    num = t - zeta1 * zeta2
    den = t - zeta1 * np.conj(zeta2)
    if den == 0:
        raise ValueError("kernel singularity")
    return float(np.log(np.abs(num / den)))


def kernel_mode_series(r1: float, phi1: float, r2: float, phi2: float, theta: float,
                       nmax: int = 2000) -> float:
    """``2 sum_n (theta r1 r2)**n sin(n phi1) sin(n phi2) / n``, truncated at ``nmax``."""
    q = theta * r1 * r2
    n = np.arange(1, nmax + 1)
    return float(2.0 * np.sum(q**n * np.sin(n * phi1) * np.sin(n * phi2) / n))


def mp_density(x, mu: float, nu: float):
    """Limiting eigenvalue density of ``W = S* S / L`` per unit ``L``.

    Supported on ``[(sqrt mu - sqrt nu)**2, (sqrt mu + sqrt nu)**2]`` with
    total mass ``min(mu, nu)``, so ``L * density`` counts eigenvalues.
    """
    if mu <= 0 or nu <= 0:
        raise ValueError("mu and nu must be positive")
    x = np.asarray(x, dtype=float)
    lo = (math.sqrt(mu) - math.sqrt(nu)) ** 2
    hi = (math.sqrt(mu) + math.sqrt(nu)) ** 2
    inside = (x > lo) & (x < hi)
    xs = np.where(inside, x, 0.5 * (lo + hi))
    dens = np.sqrt(np.maximum((hi - xs) * (xs - lo), 0.0)) / (2.0 * math.pi * xs)
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out
