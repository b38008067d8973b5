import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wishart_gff.rng_ensemble import ArrayHandle, CornerFamilySpec, EntryDistribution, SubmatrixSpec
from wishart_gff.spectra import (
    CovarianceReport,
    LinearStat,
    PlanarStat,
    PlanarTestFn,
    SpectralSample,
    eigenvalues,
    estimate_moments,
    height_function,
    height_ibp_residual,
    linear_statistic,
    planar_statistic,
    sample_spectra,
    sample_trace,
    simulate_statistics,
)


def gauss(seed=5):
    return ArrayHandle(seed, EntryDistribution("real_gaussian"))


def test_eigenvalues_of_known_matrix():
    W = np.array([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(eigenvalues(W), [1.0, 3.0])


def test_non_hermitian_rejected():
    with pytest.raises(ValueError, match="not Hermitian"):
        eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


@given(st.lists(st.floats(0, 10), min_size=1, max_size=20), st.lists(st.floats(-3, 3), min_size=1, max_size=5))
def test_linear_statistic_is_polynomial_sum(eigs, coeffs):
    eigs = np.array(eigs)
    direct = sum(sum(c * x**d for d, c in enumerate(coeffs)) for x in eigs)
    assert linear_statistic(eigs, coeffs) == pytest.approx(direct, rel=1e-9, abs=1e-9)
    assert linear_statistic(eigs, np.exp) == pytest.approx(np.sum(np.exp(eigs)))


def test_traces_agree_with_matrix_powers():
    spec = CornerFamilySpec(1.0, 1.0, 12, (0.5, 1.0))
    sample = sample_spectra(gauss(), spec, [3])[0]
    from wishart_gff.rng_ensemble import materialize, wishart

    S = materialize(gauss().replicate(3), spec.submatrix(1.0))
    W = wishart(S, 12)
    assert sample_trace(sample, 1.0, [0, 1]) == pytest.approx(np.trace(W), rel=1e-13)
    assert sample_trace(sample, 1.0, [0, 0, 1]) == pytest.approx(np.trace(W @ W), rel=1e-12)
    assert sample_trace(sample, 1.0, [0, 0, 0, 1]) == pytest.approx(np.trace(W @ W @ W), rel=1e-12)
    assert sample_trace(sample, 1.0, [2.0]) == 2.0 * 12


def test_height_function_counts_from_the_right():
    s = SpectralSample({1.0: np.array([0.5, 1.0, 2.0])})
    assert [height_function(s, x, 1.0) for x in (0.0, 0.5, 0.75, 1.0, 2.5)] == [3, 3, 2, 2, 0]
    with pytest.raises(KeyError, match="unknown level"):
        s.level(0.3)


def test_ibp_residual_with_exact_antiderivative():
    s = SpectralSample({1.0: np.array([0.3, 1.1, 2.7])})
    f = lambda x: 3 * x**2
    res = height_ibp_residual(s, f, (0.0, 5.0), 1.0, antiderivative=lambda t: t**3)
    assert res < 1e-10


def test_ibp_support_must_cover_spectrum():
    s = SpectralSample({1.0: np.array([0.3, 1.1, 2.7])})
    with pytest.raises(ValueError, match="support excludes spectrum"):
        height_ibp_residual(s, np.cos, (0.0, 3.0), 1.0)


def test_planar_statistic_is_weighted_level_sum():
    s = SpectralSample({0.5: np.array([1.0, 2.0]), 1.0: np.array([1.0, 3.0, 4.0])})
    t = PlanarTestFn(((0.5, 0.25), (1.0, 0.75)), (0.0, 0.0, 1.0))
    assert planar_statistic(s, t) == pytest.approx(0.25 * 5.0 + 0.75 * 26.0)
    assert PlanarStat(t, "p")(s) == planar_statistic(s, t)


@pytest.mark.parametrize("rho", [(), ((1.2, 1.0),), ((0.5, 0.5), (0.4, 0.5)), ((0.5, 0.6), (1.0, 0.6))])
def test_planar_measure_validation(rho):
    with pytest.raises(ValueError):
        PlanarTestFn(rho, (0.0, 1.0))


def test_simulation_is_deterministic_and_worker_independent():
    spec = CornerFamilySpec(1.0, 0.5, 16, (0.5, 1.0))
    stats = [LinearStat.monomial(1, 0.5), LinearStat.monomial(2, 1.0)]
    a = simulate_statistics(stats, gauss(), spec, 30, chunk=7, workers=1)
    b = simulate_statistics(stats, gauss(), spec, 30, chunk=4, workers=3)
    np.testing.assert_array_equal(a, b)


def test_submatrix_geometry_blocks_share_one_array():
    specs = [SubmatrixSpec((0, 4), (0, 4)), SubmatrixSpec((0, 4), (0, 4))]
    vals = simulate_statistics([LinearStat.monomial(2, 0), LinearStat.monomial(2, 1)], gauss(), (specs, 4), 5)
    np.testing.assert_array_equal(vals[:, 0], vals[:, 1])


def test_report_against_numpy():
    rng = np.random.default_rng(0)
    values = rng.normal(size=(400, 3)) @ np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.2], [0.0, 0.0, 1.0]])
    rep = CovarianceReport.from_values(values, ["a", "b", "c"], B=20, seed=1)
    np.testing.assert_allclose(rep.mean, values.mean(axis=0))
    np.testing.assert_allclose(rep.cov, np.cov(values, rowvar=False), rtol=1e-12)
    assert np.array_equal(rep.cov, rep.cov.T)
    assert np.all(rep.se_cov > 0) and np.all(np.isfinite(rep.se_k4))
    # batch-means SE of the mean vs the iid formula
    np.testing.assert_allclose(rep.se_mean, values.std(axis=0, ddof=1) / np.sqrt(400), rtol=0.5)


def test_report_requires_enough_replicates():
    with pytest.raises(ValueError, match="R >= 2B"):
        CovarianceReport.from_values(np.zeros((10, 1)), ["a"], B=6)


def test_report_round_trips(tmp_path):
    rep = estimate_moments([LinearStat.monomial(1)], gauss(), CornerFamilySpec(1, 1, 10), 40, B=4)
    again = CovarianceReport.from_dict(json.loads(json.dumps(rep.to_dict())))
    np.testing.assert_array_equal(again.cov, rep.cov)
    assert again.labels == rep.labels and again.seed == rep.seed
    rep.to_csv(tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "statistic_i,statistic_j,mc_cov,mc_se"


def test_rademacher_trace_has_exactly_zero_variance():
    h = ArrayHandle(1, EntryDistribution("rademacher"))
    rep = estimate_moments([LinearStat.monomial(1)], h, CornerFamilySpec(1.5, 1, 30), 60, B=5)
    assert rep.cov[0, 0] == 0.0
    assert rep.mean[0] == 45 * 30 / 30


def test_gaussian_mean_matches_exact_value():
    # E tr W = m n / L, E tr W^2 = m n (m + n + 1) / L^2 for real Gaussian entries
    rep = estimate_moments([LinearStat.monomial(1), LinearStat.monomial(2)], gauss(9),
                           CornerFamilySpec(2, 1, 6), 4000, B=20)
    m, n, L = 12, 6, 6
    assert abs(rep.mean[0] - m * n / L) < 4 * rep.se_mean[0]
    assert abs(rep.mean[1] - m * n * (m + n + 1) / L**2) < 4 * rep.se_mean[1]
