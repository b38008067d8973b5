"""Closed-form and limiting objects: Narayana series, covariances, chart, kernels, norms."""

from .covariance import (
    BetaWeights,
    OverlapGeometry,
    QuadratureConfig,
    QuadratureError,
    covariance_matrix,
    covariance_modes,
    covariance_quadrature,
    limit_mean,
    mode_integral,
    planar_covariance,
    polynomial_covariance,
    t1_limit,
    t2_limit,
)
from .field import (
    gff_kernel,
    green_upper_half_plane,
    kernel_mode_series,
    lemma_kernel,
    mp_density,
    omega_forward,
    omega_inverse,
)
from .narayana import gen_F, gen_G, narayana_even, narayana_number, narayana_odd
from .sobolev import SobolevSpec, fourier_transform, planar_sobolev_norm, sobolev_norm

__all__ = [
    "BetaWeights",
    "OverlapGeometry",
    "QuadratureConfig",
    "QuadratureError",
    "SobolevSpec",
    "covariance_matrix",
    "covariance_modes",
    "covariance_quadrature",
    "fourier_transform",
    "gen_F",
    "gen_G",
    "gff_kernel",
    "green_upper_half_plane",
    "kernel_mode_series",
    "lemma_kernel",
    "limit_mean",
    "mode_integral",
    "mp_density",
    "narayana_even",
    "narayana_number",
    "narayana_odd",
    "omega_forward",
    "omega_inverse",
    "planar_covariance",
    "planar_sobolev_norm",
    "polynomial_covariance",
    "sobolev_norm",
    "t1_limit",
    "t2_limit",
]
