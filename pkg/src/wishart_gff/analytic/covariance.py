"""Limiting covariances of centered traces of overlapping Wishart matrices.

Three evaluators are provided and are expected to agree:

* :func:`covariance_modes` -- the exact finite Fourier-mode sum.  On the
  circles ``|y_i| = sqrt(gamma_i)`` the log kernel separates into modes
  ``c**n e^{in(a+b)} / n`` and the remaining factor of each variable is a
  trigonometric polynomial, so only ``n <= min(k, l)`` survive.
* :func:`t1_limit` + :func:`t2_limit` -- the glued-tree and glued-cycle
  walk counts, evaluated by coefficient extraction from ``F`` and ``G``.
* :func:`covariance_quadrature` -- trapezoidal quadrature of the double
  contour integral with the closed-form (logarithmic) kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Sequence, Union

import numpy as np

from .narayana import gen_F, gen_G, narayana_number, series_pow

__all__ = [
    "OverlapGeometry",
    "BetaWeights",
    "QuadratureConfig",
    "QuadratureError",
    "mode_integral",
    "t1_limit",
    "t2_limit",
    "covariance_modes",
    "polynomial_covariance",
    "covariance_quadrature",
    "planar_covariance",
    "covariance_matrix",
    "limit_mean",
]

Poly = Union[int, Sequence[float]]

_C_TOL = 1e-12


@dataclass(frozen=True)
class OverlapGeometry:
    """Limit shape of two submatrices: sizes ``(mu_i, nu_i)`` and overlap ``(mu12, nu12)``."""

    mu1: float
    nu1: float
    mu2: float
    nu2: float
    mu12: float
    nu12: float

    def __post_init__(self):
        for name in ("mu1", "nu1", "mu2", "nu2", "mu12", "nu12"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if min(self.mu1, self.nu1, self.mu2, self.nu2) <= 0:
            raise ValueError("submatrix shape parameters must be positive")
        if min(self.mu12, self.nu12) < 0:
            raise ValueError("overlap parameters must be nonnegative")
        if self.c > 1 + _C_TOL:
            raise ValueError(f"overlap parameters violate contour condition (c = {self.c!r} > 1)")
        tol = 1e-12 * max(self.mu1, self.mu2, self.nu1, self.nu2)
        if self.mu12 > min(self.mu1, self.mu2) + tol or self.nu12 > min(self.nu1, self.nu2) + tol:
            raise ValueError("overlap exceeds submatrix size")

    @property
    def theta(self) -> float:
        return self.mu12 * self.nu12 / (self.mu1 * self.nu1 * self.mu2 * self.nu2)

    @property
    def gamma1(self) -> float:
        return self.mu1 / self.nu1

    @property
    def gamma2(self) -> float:
        return self.mu2 / self.nu2

    @property
    def c(self) -> float:
        """Coupling ``theta * sqrt(mu1 nu1 mu2 nu2)``; lies in ``[0, 1]``."""
        return self.mu12 * self.nu12 / math.sqrt(self.mu1 * self.nu1 * self.mu2 * self.nu2)

    def swapped(self) -> "OverlapGeometry":
        return OverlapGeometry(self.mu2, self.nu2, self.mu1, self.nu1, self.mu12, self.nu12)

    @classmethod
    def identical(cls, mu: float, nu: float) -> "OverlapGeometry":
        return cls(mu, nu, mu, nu, mu, nu)

    @classmethod
    def nested(cls, y: float, z: float, mu: float, nu: float) -> "OverlapGeometry":
        """Corners of levels ``y`` and ``z`` of one ``mu x nu`` block."""
        lo = min(y, z)
        return cls(y * mu, y * nu, z * mu, z * nu, lo * mu, lo * nu)

    @classmethod
    def from_rects(cls, rows1, cols1, rows2, cols2) -> "OverlapGeometry":
        """Geometry of two rectangles given as intervals in units of ``L``."""
        def length(a):
            return a[1] - a[0]

        def shared(a, b):
            return max(0.0, min(a[1], b[1]) - max(a[0], b[0]))

        return cls(length(rows1), length(cols1), length(rows2), length(cols2),
                   shared(rows1, rows2), shared(cols1, cols2))

    @classmethod
    def from_specs(cls, spec1, spec2, L: int) -> "OverlapGeometry":
        """Geometry realized by two integer :class:`SubmatrixSpec` blocks at size ``L``."""
        m12, n12 = spec1.overlap(spec2)
        (m1, n1), (m2, n2) = spec1.shape, spec2.shape
        return cls(m1 / L, n1 / L, m2 / L, n2 / L, m12 / L, n12 / L)


_DEFAULT_A1 = {1: 2.0, 2: 1.0, 4: 1.25}


@dataclass(frozen=True)
class BetaWeights:
    """Mode weights ``a_n`` of the covariance kernel ``sum_n a_n x**n / n``.

    ``a_1 = E|Z|^4 - 1``; for ``n >= 2``, ``a_n`` is 2, 1 or ``1 + 4**-n``
    for real, complex or quaternion entries.
    """

    beta: int = 1
    fourth_moment: float | None = None

    def __post_init__(self):
        if self.beta not in (1, 2, 4):
            raise ValueError("beta must be 1, 2 or 4")
        if self.fourth_moment is None:
            object.__setattr__(self, "fourth_moment", 1.0 + 2.0 / self.beta)

    @classmethod
    def from_distribution(cls, dist) -> "BetaWeights":
        return cls(dist.beta, dist.fourth_moment)

    @property
    def a1(self) -> float:
        return self.fourth_moment - 1.0

    def a(self, n: int) -> float:
        if n < 1:
            raise ValueError("mode index starts at 1")
        if n == 1:
            return self.a1
        if self.beta == 1:
            return 2.0
        if self.beta == 2:
            return 1.0
        return 1.0 + 4.0 ** (-n)

    def kernel(self, x):
        """Closed form of ``sum_n a_n x**n / n`` for ``|x| < 1``."""
        x = np.asarray(x, dtype=complex)
        if self.beta == 1:
            base = -2.0 * np.log1p(-x)
        elif self.beta == 2:
            base = -np.log1p(-x)
        else:
            base = -np.log1p(-x) - np.log1p(-x / 4.0)
        return base + (self.a1 - _DEFAULT_A1[self.beta]) * x


def _cos_power_coeffs(A: float, B: float, d: int) -> np.ndarray:
    """``(A + B cos t)**d`` as ``sum_m p_m cos(m t)``."""
    p = np.zeros(d + 1)
    for j in range(d + 1):
        w = comb(d, j) * A ** (d - j) * B**j / 2.0**j
        for i in range(j + 1):
            p[abs(j - 2 * i)] += w * comb(j, i)
    return p


def _sin_inner(n: int, q: int) -> float:
    # (2/pi) * int_0^pi sin(n t) sin(q t) dt for n >= 1
    if q == 0 or abs(q) != n:
        return 0.0
    return 1.0 if q > 0 else -1.0


def mode_integral(n: int, mu: float, nu: float, deg: int) -> float:
    """``S_n = 2 int_0^pi sin(n t) (mu + nu + 2 sqrt(mu nu) cos t)**(deg-1) sin t dt``.

    Evaluated exactly by product-to-sum expansion; zero for ``n > deg``.
    """
    return math.pi * _mode_factor(n, mu, nu, deg)


def _mode_factor(n: int, mu: float, nu: float, deg: int) -> float:
    # S_n / pi
    if n < 1 or deg < 1:
        raise ValueError("mode index and degree must be at least 1")
    if n > deg:
        return 0.0
    p = _cos_power_coeffs(mu + nu, 2.0 * math.sqrt(mu * nu), deg - 1)
    # sin t cos(m t) = (sin((1+m) t) + sin((1-m) t)) / 2
    return sum(pm * (_sin_inner(n, 1 + m) + _sin_inner(n, 1 - m)) / 2.0 for m, pm in enumerate(p))


def covariance_modes(k: int, l: int, geom: OverlapGeometry, weights: BetaWeights | None = None) -> float:
    """Limiting ``Cov(tr W_1^k, tr W_2^l)`` by the finite mode sum."""
    if k < 1 or l < 1:
        raise ValueError("degrees must be at least 1")
    weights = weights or BetaWeights()
    c = geom.c
    if c > 1 + _C_TOL:
        raise ValueError("overlap parameters violate contour condition")
    if c == 0.0:
        return 0.0
    total = 0.0
    for n in range(1, min(k, l) + 1):
        s1 = _mode_factor(n, geom.mu1, geom.nu1, k)
        s2 = _mode_factor(n, geom.mu2, geom.nu2, l)
        total += weights.a(n) * c**n / n * s1 * s2
    return k * l * math.sqrt(geom.mu1 * geom.nu1 * geom.mu2 * geom.nu2) * total


def _coeffs(p: Poly) -> np.ndarray:
    if isinstance(p, (int, np.integer)):
        out = np.zeros(int(p) + 1)
        out[-1] = 1.0
        return out
    return np.asarray(p, dtype=float)


def polynomial_covariance(p: Poly, q: Poly, geom: OverlapGeometry, weights: BetaWeights | None = None,
                          evaluator=None) -> float:
    """Bilinear extension of ``evaluator`` (default :func:`covariance_modes`) to polynomials.

    ``p`` and ``q`` are monomial degrees or coefficient lists in increasing
    degree; constant terms do not fluctuate and drop out.
    """
    evaluator = evaluator or covariance_modes
    a, b = _coeffs(p), _coeffs(q)
    total = 0.0
    for k in range(1, a.size):
        for l in range(1, b.size):
            if a[k] != 0.0 and b[l] != 0.0:
                total += a[k] * b[l] * evaluator(k, l, geom, weights)
    return total


def t1_limit(k: int, l: int, geom: OverlapGeometry, fourth_moment: float) -> float:
    """Glued-tree contribution ``nu1^k nu2^l (E|Z|^4-1) theta nu1 nu2 k l [z1^k z2^l] F F``."""
    if k < 1 or l < 1:
        raise ValueError("degrees must be at least 1")
    F1 = gen_F(geom.gamma1, k)
    F2 = gen_F(geom.gamma2, l)
    x = geom.theta * geom.nu1 * geom.nu2
    return geom.nu1**k * geom.nu2**l * (fourth_moment - 1.0) * x * k * l * F1[k] * F2[l]


def t2_limit(k: int, l: int, geom: OverlapGeometry, weights: BetaWeights | None = None) -> float:
    """Glued-cycle contribution, summed over cycle half-lengths ``2 <= r <= min(k, l)``."""
    if k < 1 or l < 1:
        raise ValueError("degrees must be at least 1")
    weights = weights or BetaWeights()
    G1 = gen_G(geom.gamma1, k)
    G2 = gen_G(geom.gamma2, l)
    x = geom.theta * geom.nu1 * geom.nu2
    total = 0.0
    for r in range(2, min(k, l) + 1):
        c1 = series_pow(G1, r, k)[k - r]
        c2 = series_pow(G2, r, l)[l - r]
        total += weights.a(r) / r * x**r * c1 * c2
    return k * l * geom.nu1**k * geom.nu2**l * total


@dataclass(frozen=True)
class QuadratureConfig:
    """Trapezoidal nodes per circle and the radius-shrink schedule used at ``c = 1``."""

    nodes: int = 256
    shrink: tuple[float, ...] = (0.2, 0.1, 0.05)
    critical: float = 1.0 - 1e-9
    tolerance: float = 1e-8


class QuadratureError(ArithmeticError):
    """Extrapolated quadrature did not settle; ``diagnostics`` holds the tableau."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def _contour_quadrature(k, l, geom, weights, nodes, scale):
    phi = 2.0 * np.pi * np.arange(nodes) / nodes
    out = []
    for gamma, deg in ((geom.gamma1, k), (geom.gamma2, l)):
        y = scale * math.sqrt(gamma) * np.exp(1j * phi)
        inv_z = (gamma + (1.0 + gamma) * y + y * y) / y
        out.append((y, inv_z ** (deg - 1) * (1.0 - gamma / (y * y)) * y))
    (y1, g1), (y2, g2) = out
    x = geom.theta * geom.nu1 * geom.nu2 * np.outer(y1, y2)
    mean = g1 @ weights.kernel(x) @ g2 / nodes**2
    return k * l * geom.nu1**k * geom.nu2**l * mean.real


def _neville(h: Sequence[float], v: Sequence[float]) -> list[list[float]]:
    # polynomial extrapolation to h = 0; row i holds extrapolants of order i
    table = [list(v)]
    for order in range(1, len(v)):
        prev = table[-1]
        row = []
        for i in range(len(prev) - 1):
            hi, hj = h[i], h[i + order]
            row.append((hj * prev[i] - hi * prev[i + 1]) / (hj - hi))
        table.append(row)
    return table


def covariance_quadrature(k: int, l: int, geom: OverlapGeometry, weights: BetaWeights | None = None,
                          config: QuadratureConfig | None = None) -> float:
    """Double contour integral over full circles ``|y_i| = sqrt(gamma_i)``.

    For ``c < 1`` the integrand is analytic on the circles and the periodic
    trapezoidal rule converges geometrically.  At ``c = 1`` the kernel has a
    logarithmic singularity on the contour; the radii are shrunk by factors
    ``1 - h`` and the values are extrapolated to ``h = 0``.
    """
    if k < 1 or l < 1:
        raise ValueError("degrees must be at least 1")
    weights = weights or BetaWeights()
    config = config or QuadratureConfig()
    if geom.theta == 0.0:
        return 0.0
    if geom.c < config.critical:
        return float(_contour_quadrature(k, l, geom, weights, config.nodes, 1.0))
    hs = list(config.shrink)
    values = [float(_contour_quadrature(k, l, geom, weights, config.nodes, 1.0 - h)) for h in hs]
    table = _neville(hs, values)
    best, prev = table[-1][0], table[-2][0]
    spread = abs(best - prev)
    if not np.isfinite(best) or spread > config.tolerance * max(1.0, abs(best)):
        raise QuadratureError(
            "radius-shrink extrapolation did not converge",
            {"shrink": hs, "values": values, "tableau": table, "spread": spread},
        )
    return best


def planar_covariance(p: Poly, q: Poly, rho_i, rho_j, mu: float, nu: float,
                      weights: BetaWeights | None = None, L: int | None = None) -> float:
    """Limiting covariance of two planar statistics over nested corners.

    ``rho_i``, ``rho_j`` are sequences of ``(level, weight)`` atoms.  When
    ``L`` is given the corner shapes use the realized sizes ``floor(y mu L) / L``.
    """
    def shape(y):
        if L is None:
            return y * mu, y * nu
        return (math.floor(y * mu * L + 1e-9) / L, math.floor(y * nu * L + 1e-9) / L)

    total = 0.0
    for y, wy in rho_i:
        for z, wz in rho_j:
            m1, n1 = shape(y)
            m2, n2 = shape(z)
            geom = OverlapGeometry(m1, n1, m2, n2, min(m1, m2), min(n1, n2))
            total += wy * wz * polynomial_covariance(p, q, geom, weights)
    return total


def covariance_matrix(items, weights: BetaWeights | None = None) -> np.ndarray:
    """Analytic covariance matrix of a family of ``(poly, rows, cols)`` statistics.

    ``rows`` and ``cols`` are intervals in units of ``L`` locating each
    submatrix in the common array.
    """
    n = len(items)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            pi, ri, ci = items[i]
            pj, rj, cj = items[j]
            geom = OverlapGeometry.from_rects(ri, ci, rj, cj)
            out[i, j] = out[j, i] = polynomial_covariance(pi, pj, geom, weights)
    return out


def limit_mean(k: int, mu: float, nu: float) -> float:
    """Slope of ``E tr W^k`` in ``L``: ``sum_j N(k, j) mu^j nu^(k+1-j)``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if mu <= 0 or nu <= 0:
        raise ValueError("mu and nu must be positive")
    return float(sum(narayana_number(k, j) * mu**j * nu ** (k + 1 - j) for j in range(1, k + 1)))
