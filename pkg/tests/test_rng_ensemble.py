import numpy as np
import pytest
from hypothesis import given, strategies as st

from wishart_gff.rng_ensemble import (
    ArrayHandle,
    CornerFamilySpec,
    DistributionKind,
    EntryDistribution,
    SubmatrixSpec,
    corner_family,
    entry,
    materialize,
    materialize_batch,
    replicate_seed,
    wishart,
)

KINDS = [k.value for k in DistributionKind]


def handle(kind="real_gaussian", seed=7):
    return ArrayHandle(seed, EntryDistribution(kind))


@pytest.mark.parametrize("kind", ["real_gaussian", "complex_gaussian", "uniform_sym"])
def test_entry_is_pure_function_of_seed_and_index(kind):
    h = handle(kind)
    assert entry(h, 3, 5) == entry(h, 3, 5)
    assert entry(h, 3, 5) != entry(h, 5, 3)
    assert entry(h, 3, 5) != entry(handle(kind, seed=8), 3, 5)


@pytest.mark.parametrize("kind", KINDS)
def test_materialize_matches_entrywise(kind):
    h = handle(kind)
    S = materialize(h, SubmatrixSpec((2, 5), (1, 4)))
    direct = np.array([[entry(h, i, j) for j in range(1, 4)] for i in range(2, 5)])
    np.testing.assert_array_equal(S, direct)


@given(st.integers(0, 30), st.integers(1, 10), st.integers(0, 30), st.integers(1, 10),
       st.integers(0, 30), st.integers(1, 10), st.integers(0, 30), st.integers(1, 10))
def test_overlapping_blocks_share_entries(r0, m, c0, n, s0, p, d0, q):
    h = handle()
    a = SubmatrixSpec((r0, r0 + m), (c0, c0 + n))
    b = SubmatrixSpec((s0, s0 + p), (d0, d0 + q))
    A, B = materialize(h, a), materialize(h, b)
    rows = range(max(r0, s0), min(r0 + m, s0 + p))
    cols = range(max(c0, d0), min(c0 + n, d0 + q))
    assert a.overlap(b) == (len(rows), len(cols))
    for i in rows:
        for j in cols:
            assert A[i - r0, j - c0] == B[i - s0, j - d0]


def test_batch_rows_are_replicates():
    h = handle()
    spec = SubmatrixSpec((0, 4), (0, 3))
    batch = materialize_batch(h, spec, [0, 5, 2])
    for k, r in enumerate([0, 5, 2]):
        np.testing.assert_array_equal(batch[k], materialize(h.replicate(r), spec))
    assert replicate_seed(7, 0) != replicate_seed(7, 1)


@pytest.mark.parametrize("kind,fourth", [("real_gaussian", 3.0), ("complex_gaussian", 2.0),
                                         ("rademacher", 1.0), ("uniform_sym", 1.8)])
def test_entry_moments(kind, fourth):
    S = materialize(handle(kind, seed=11), SubmatrixSpec((0, 400), (0, 500)))
    z = S.ravel()
    assert abs(np.mean(z)) < 0.01
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.01
    assert abs(np.mean(np.abs(z) ** 4) - fourth) < 0.05
    assert EntryDistribution(kind).fourth_moment == fourth
    if kind == "complex_gaussian":
        assert abs(np.mean(z**2)) < 0.01  # circular
        assert abs(np.var(z.real) - 0.5) < 0.01


def test_support_of_bounded_laws():
    rad = materialize(handle("rademacher"), SubmatrixSpec((0, 50), (0, 50)))
    assert set(np.unique(rad)) == {-1.0, 1.0}
    uni = materialize(handle("uniform_sym"), SubmatrixSpec((0, 50), (0, 50)))
    assert np.max(np.abs(uni)) <= np.sqrt(3.0)


def test_gaussian_entries_are_uncorrelated_across_neighbours():
    S = materialize(handle(seed=3), SubmatrixSpec((0, 300), (0, 300)))
    assert abs(np.mean(S[:, 1:] * S[:, :-1])) < 0.01
    assert abs(np.mean(S[1:, :] * S[:-1, :])) < 0.01


def test_wishart_shape_and_hermitian():
    S = materialize(handle("complex_gaussian"), SubmatrixSpec((0, 5), (0, 8)))
    W = wishart(S, 10)
    assert W.shape == (5, 5)
    np.testing.assert_array_equal(W, W.conj().T)
    np.testing.assert_allclose(np.trace(W).real, np.sum(np.abs(S) ** 2) / 10)
    # smaller dimension is used; nonzero spectra agree
    big = S.conj().T @ S / 10
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(big))[-5:], np.linalg.eigvalsh(W), atol=1e-12)


def test_degenerate_submatrix_rejected():
    with pytest.raises(ValueError, match="degenerate submatrix"):
        SubmatrixSpec((3, 3), (0, 2))


def test_corner_family_dims_and_nesting():
    spec = CornerFamilySpec(2.0, 1.0, 10, (0.55, 1.0))
    assert spec.dims(0.55) == (11, 5)
    assert spec.dims(1.0) == (20, 10)
    # floating slack: 0.29 * 100 must be 29
    assert CornerFamilySpec(1.0, 1.0, 100, (0.29,)).dims(0.29) == (29, 29)
    fam = corner_family(handle(), spec)
    S = materialize(handle(), spec.submatrix(1.0))
    np.testing.assert_allclose(fam[0.55], wishart(S[:11, :5], 10))


def test_empty_corner_rejected():
    spec = CornerFamilySpec(1.0, 1.0, 5, (0.1, 1.0))
    with pytest.raises(ValueError, match="empty corner at level"):
        spec.submatrix(0.1)
