import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp
from numpy.testing import assert_allclose, assert_array_equal

from spikesvd.cluster import align_epochs, kmeans, sort_order, zscore_rows
from spikesvd.detector import EpochMatrix


def _centered_row(L=31, c=None):
    c = (L - 1) // 2 if c is None else c
    t = np.arange(L)
    return np.exp(-0.5 * ((t - c) / 2.0) ** 2) * 3.0 - 0.5 * np.exp(-0.5 * ((t - c - 5) / 2.0) ** 2)


def test_centered_row_unchanged():
    row = _centered_row()
    aligned, shifts = align_epochs(row[None, :])
    assert_array_equal(aligned[0], row)
    assert shifts[0] == 0


def test_shifted_row_realigned():
    row = _centered_row()
    aligned, shifts = align_epochs(np.roll(row, 7)[None, :])
    assert shifts[0] == -7
    assert_allclose(aligned[0], row)


def test_random_biphasic_rows_land_on_centre():
    rng = np.random.default_rng(0)
    L = 61
    t = np.arange(L)
    rows = []
    for _ in range(200):
        c = rng.integers(5, L - 10)
        a = rng.uniform(0.5, 2.0) * rng.choice([-1, 1])
        rows.append(a * (t - c) * np.exp(-0.5 * ((t - c) / 3.0) ** 2) + 0.01 * rng.standard_normal(L))
    aligned, _ = align_epochs(np.array(rows))
    assert all(int(np.argmax(np.abs(r))) == (L - 1) // 2 for r in aligned)


def test_align_preserves_epoch_matrix_and_rejects_even_length():
    ep = EpochMatrix(2, np.array([100]), _centered_row()[None, :], 15, np.array([], int))
    aligned, _ = align_epochs(ep)
    assert isinstance(aligned, EpochMatrix) and aligned.channel_index == 2
    with pytest.raises(ValueError):
        align_epochs(np.zeros((2, 30)))


def test_single_cluster_is_mean():
    X = np.random.default_rng(1).standard_normal((20, 4))
    res = kmeans(X, k=1)
    assert_allclose(res.centroids[0], X.mean(0))
    assert set(res.assignments) == {0}


def _purity(labels, truth):
    best = 0
    for perm in itertools.permutations(np.unique(labels)):
        mapped = np.array([perm[v] for v in labels])
        best = max(best, np.mean(mapped == truth))
    return best


def test_two_blobs_purity():
    rng = np.random.default_rng(2)
    truth = np.repeat([0, 1], 40)
    X = rng.standard_normal((80, 5)) + np.where(truth[:, None] == 0, -10.0, 10.0)
    res = kmeans(X, k=2, seed=3)
    assert _purity(res.assignments, truth) == 1.0


def test_k_equals_n_gives_zero_inertia():
    X = np.random.default_rng(4).standard_normal((6, 3))
    res = kmeans(X, k=6)
    assert res.inertia == pytest.approx(0.0, abs=1e-20)
    assert sorted(res.assignments) == list(range(6))


def test_k_out_of_range():
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), k=4)
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), k=0)


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(float, st.tuples(st.integers(3, 40), st.integers(1, 6)),
                  elements=st.floats(-50, 50)),
       st.integers(1, 4), st.integers(0, 1000))
def test_inertia_history_monotone(X, k, seed):
    k = min(k, X.shape[0])
    res = kmeans(X, k=k, seed=seed, n_init=3)
    h = np.array(res.inertia_history)
    assert np.all(np.diff(h) <= 1e-9 * (1 + h[:-1]))
    assert res.inertia == pytest.approx(h[-1], rel=1e-9, abs=1e-9)


def test_kmeans_deterministic_for_seed():
    X = np.random.default_rng(5).standard_normal((50, 4))
    a, b = kmeans(X, 3, seed=9), kmeans(X, 3, seed=9)
    assert_array_equal(a.assignments, b.assignments)


def test_sort_order():
    assert_array_equal(sort_order(np.ones((5, 3))), np.arange(5))
    X = np.array([[0, 3, 0], [0, -1, 0], [2, 0, 0]], dtype=float)
    assert_array_equal(sort_order(X, "amplitude"), [1, 2, 0])
    assert_array_equal(sort_order(X, "latency"), [2, 0, 1])
    with pytest.raises(ValueError):
        sort_order(X, "colour")


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(float, st.tuples(st.integers(1, 30), st.integers(1, 9)),
                  elements=st.floats(-10, 10)), st.sampled_from(["amplitude", "latency"]))
def test_sort_order_is_permutation(X, key):
    assert sorted(sort_order(X, key)) == list(range(X.shape[0]))


def test_zscore_rows():
    Z = zscore_rows(np.array([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]))
    assert_allclose(Z[0].mean(), 0, atol=1e-15)
    assert_allclose(Z[0].std(), 1)
    assert_array_equal(Z[1], 0)


def test_duplicate_rows_keep_clusters_populated():
    X = np.repeat([[0.0, 0.0], [5.0, 5.0]], [9, 1], axis=0)
    res = kmeans(X, k=3, seed=0, n_init=2)
    assert np.isfinite(res.centroids).all()
    assert np.isfinite(res.inertia_history).all()
    assert np.bincount(res.assignments, minlength=3).min() >= 1
