import math

import numpy as np
import pytest
from scipy import integrate

from wishart_gff.analytic import SobolevSpec, fourier_transform, planar_sobolev_norm, sobolev_norm


def grid(half=12.0, n=2001):
    return np.linspace(-half, half, n)


def test_gaussian_transform():
    x = grid()
    k = np.array([0.0, 0.7, 2.0])
    got = fourier_transform(np.exp(-x**2 / 2), x, k)
    np.testing.assert_allclose(got, np.exp(-k**2 / 2) / math.sqrt(2 * math.pi), atol=1e-12)


@pytest.mark.parametrize("s", [1.6, 2.0, 3.0])
def test_gaussian_norm_against_quadrature(s):
    x = grid()
    ref = integrate.quad(lambda k: (1 + abs(k)) ** (2 * s) * math.exp(-k * k) / (2 * math.pi),
                         -np.inf, np.inf, epsabs=1e-13)[0]
    got = sobolev_norm(np.exp(-x**2 / 2), x, SobolevSpec(s))
    assert got == pytest.approx(math.sqrt(ref), rel=1e-8)


def test_norm_scales_and_orders():
    x = grid()
    phi = np.exp(-x**2)
    low, high = sobolev_norm(phi, x, SobolevSpec(1.6)), sobolev_norm(phi, x, SobolevSpec(2.5))
    assert high > low
    assert sobolev_norm(3 * phi, x, SobolevSpec(2.0)) == pytest.approx(3 * sobolev_norm(phi, x, SobolevSpec(2.0)))
    assert sobolev_norm(0 * phi, x, SobolevSpec(2.0)) == 0.0


def test_validation():
    x = grid()
    with pytest.raises(ValueError, match="3/2"):
        SobolevSpec(1.5)
    with pytest.raises(ValueError, match="support exceeds grid"):
        sobolev_norm(np.ones_like(x), x, SobolevSpec(2.0))


def test_planar_norm_is_weighted_root_sum():
    x = grid()
    a, b = np.exp(-x**2), np.exp(-2 * x**2)
    spec = SobolevSpec(2.0)
    got = planar_sobolev_norm([a, b], x, [(0.5, 0.25), (1.0, 0.75)], spec)
    want = math.sqrt(0.25 * sobolev_norm(a, x, spec) ** 2 + 0.75 * sobolev_norm(b, x, spec) ** 2)
    assert got == pytest.approx(want)


def test_gaussian_norm_stable_under_refinement():
    coarse, fine = grid(n=1201), grid(n=2401)
    spec = SobolevSpec(2.0)
    a = sobolev_norm(np.exp(-coarse**2 / 2), coarse, spec)
    b = sobolev_norm(np.exp(-fine**2 / 2), fine, spec)
    assert abs(a - b) <= 1e-6 * b
