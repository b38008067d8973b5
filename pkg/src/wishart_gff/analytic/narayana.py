"""Narayana polynomials and the truncated series of ``F(z, gamma)`` and ``G(z, gamma)``."""

from __future__ import annotations

from math import comb

import numpy as np

__all__ = [
    "narayana_number",
    "narayana_odd",
    "narayana_even",
    "series_mul",
    "series_pow",
    "series_sqrt",
    "gen_F",
    "gen_G",
]


def narayana_number(k: int, j: int) -> int:
    """``N(k, j) = C(k, j) C(k, j-1) / k``; ``N(0, 0) = 1``."""
    if k == 0:
        return 1 if j == 0 else 0
    if not 1 <= j <= k:
        return 0
    return comb(k, j) * comb(k, j - 1) // k


def narayana_odd(k: int, gamma: float) -> float:
    """Sum of ``gamma**o(T)`` over plane trees with ``k`` edges."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1.0
    return float(sum(narayana_number(k, j) * gamma**j for j in range(1, k + 1)))


def narayana_even(k: int, gamma: float) -> float:
    """Sum of ``gamma**e(T)``; equals :func:`narayana_odd` except at ``k = 0``."""
    if k == 0:
        return float(gamma)
    return narayana_odd(k, gamma)


def series_mul(a, b, N: int) -> np.ndarray:
    """Cauchy product truncated to coefficients ``0..N``."""
    a = np.asarray(a, dtype=float)[: N + 1]
    b = np.asarray(b, dtype=float)[: N + 1]
    out = np.convolve(a, b)[: N + 1]
    return np.pad(out, (0, N + 1 - out.size))


def series_pow(a, r: int, N: int) -> np.ndarray:
    out = np.zeros(N + 1)
    out[0] = 1.0
    for _ in range(r):
        out = series_mul(out, a, N)
    return out


def series_sqrt(d, N: int) -> np.ndarray:
    """Square root of a series with ``d[0] = 1``, coefficients ``0..N``."""
    d = np.pad(np.asarray(d, dtype=float), (0, N + 1))[: N + 1]
    if d[0] != 1.0:
        raise ValueError("series_sqrt needs a unit constant term")
    s = np.zeros(N + 1)
    s[0] = 1.0
    for n in range(1, N + 1):
        s[n] = (d[n] - np.dot(s[1:n], s[n - 1:0:-1])) / 2.0
    return s


def gen_F(gamma: float, N: int) -> np.ndarray:
    """Coefficients ``c_0..c_N`` of ``F = (a - sqrt(a^2 - 4z)) / (2z)``, ``a = 1 + z(1 - gamma)``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    a = np.array([1.0, 1.0 - gamma])
    disc = series_mul(a, a, N + 1) - np.pad([0.0, 4.0], (0, N))
    root = series_sqrt(disc, N + 1)
    numerator = np.pad(a, (0, N)) - root
    # numerator has a vanishing constant term; dividing by 2z shifts by one
    return numerator[1: N + 2] / 2.0


def gen_G(gamma: float, N: int) -> np.ndarray:
    """Coefficients of ``G = F (gamma - 1 + F)``."""
    F = gen_F(gamma, N)
    shifted = F.copy()
    shifted[0] += gamma - 1.0
    return series_mul(F, shifted, N)
