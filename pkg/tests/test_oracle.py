import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wishart_gff.oracle import (
    MomentTable,
    enumerate_plane_trees,
    exact_trace_covariance,
    exact_trace_moment,
    narayana_from_trees,
)
from wishart_gff.rng_ensemble import SubmatrixSpec

KINDS = ["real_gaussian", "complex_gaussian", "rademacher", "uniform_sym"]


def catalan(k):
    return math.comb(2 * k, k) // (k + 1)


@pytest.mark.parametrize("k", range(0, 9))
def test_tree_counts_are_catalan(k):
    trees = enumerate_plane_trees(k)
    assert len(trees) == catalan(k)
    assert len(set(trees)) == len(trees)
    assert all(t.edges == k and t.even + t.odd == k + 1 for t in trees)


def test_tree_budget():
    with pytest.raises(ValueError, match="enumeration budget"):
        enumerate_plane_trees(11)


def test_narayana_from_trees_small():
    # k = 2: the path (e=2, o=1) and the cherry (e=1, o=2)
    assert narayana_from_trees(2, 3.0) == (3.0 + 9.0, 9.0 + 3.0)


def test_moment_tables():
    g = MomentTable.for_distribution("real_gaussian", 8)
    assert [g(p, 0) for p in range(0, 9, 2)] == [1, 1, 3, 15, 105]
    assert g(2, 2) == 3.0 and g(1, 0) == 0.0
    u = MomentTable.for_distribution("uniform_sym", 4)
    assert u(4, 0) == pytest.approx(9 / 5)
    c = MomentTable.for_distribution("complex_gaussian", 6)
    assert c(2, 2) == 2.0 and c(2, 0) == 0.0 and c(3, 3) == 6.0
    assert MomentTable.for_distribution("rademacher", 6)(4, 2) == 1.0


def brute_moment(k, S_law_values, probs, m, n, L):
    """E tr (S*S/L)^k by enumerating every sign pattern of a Rademacher block."""
    total = 0.0
    for signs in itertools.product(S_law_values, repeat=m * n):
        S = np.array(signs, dtype=float).reshape(m, n)
        W = S.T @ S / L
        total += np.trace(np.linalg.matrix_power(W, k)) * probs ** (m * n)
    return total


@pytest.mark.parametrize("k,m,n", [(1, 2, 2), (2, 2, 2), (3, 2, 3), (2, 3, 2)])
def test_rademacher_moment_against_enumeration(k, m, n):
    want = brute_moment(k, (-1.0, 1.0), 0.5, m, n, 2)
    assert exact_trace_moment(k, m, n, 2, "rademacher") == pytest.approx(want, rel=1e-12)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 5))
@settings(max_examples=25)
def test_gaussian_low_moments(m, n, L):
    assert exact_trace_moment(1, m, n, L, "real_gaussian") == pytest.approx(m * n / L)
    assert exact_trace_moment(2, m, n, L, "real_gaussian") == pytest.approx(m * n * (m + n + 1) / L**2)
    assert exact_trace_moment(2, m, n, L, "complex_gaussian") == pytest.approx(m * n * (m + n) / L**2)


@pytest.mark.parametrize("kind,a1", [("real_gaussian", 2.0), ("complex_gaussian", 1.0),
                                     ("rademacher", 0.0), ("uniform_sym", 0.8)])
def test_linear_covariance_counts_shared_entries(kind, a1):
    a = SubmatrixSpec((0, 3), (0, 3))
    b = SubmatrixSpec((1, 4), (2, 5))
    assert exact_trace_covariance(1, 1, a, b, 2, kind) == pytest.approx(a1 * 2 * 1 / 4, rel=1e-12, abs=1e-15)


def test_disjoint_blocks_have_zero_covariance():
    a = SubmatrixSpec((0, 2), (0, 2))
    b = SubmatrixSpec((2, 4), (0, 2))
    assert exact_trace_covariance(2, 2, a, b, 2, "real_gaussian") == 0.0


def test_gaussian_variance_of_second_trace():
    # direct Wick/ brute value at m = n = 1: Var(Z^4) = 105 - 9 = 96
    s = SubmatrixSpec((0, 1), (0, 1))
    assert exact_trace_covariance(2, 2, s, s, 1, "real_gaussian") == 96.0
    assert exact_trace_covariance(2, 2, SubmatrixSpec((0, 3), (0, 3)), SubmatrixSpec((0, 3), (0, 3)), 3,
                                  "real_gaussian") == pytest.approx(51.5555555555, rel=1e-9)


def test_tuple_budget():
    with pytest.raises(ValueError, match="enumeration budget exceeded"):
        exact_trace_moment(4, 10, 10, 10, "real_gaussian")
