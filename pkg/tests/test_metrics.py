import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.optimize import linear_sum_assignment

from spikesvd.metrics import (NoDetectionsError, gof, match_events, measure_snr_db, precision,
                              score_detection)


def test_gof_identity_and_zero():
    x = np.random.default_rng(0).standard_normal(100)
    r = gof(x, x)
    assert (r.fit, r.residual_ratio, r.n_samples) == (1.0, 0.0, 100)
    r = gof(x, np.zeros_like(x))
    assert (r.fit, r.residual_ratio) == (0.0, 1.0)


def test_gof_arithmetic():
    r = gof([1.0, 0.0], [0.5, 0.0])
    assert_allclose([r.residual_ratio, r.fit], [0.25, 0.75])


def test_gof_errors():
    with pytest.raises(ValueError, match="zero-energy"):
        gof(np.zeros(5), np.ones(5))
    with pytest.raises(ValueError):
        gof(np.ones(5), np.ones(4))


def test_match_identity_empty_and_shift():
    ref = np.array([100, 400, 900, 1500])
    assert match_events(ref, ref, 1000)[:3] == (4, 0, 0)
    assert match_events([], ref, 1000)[:3] == (0, 0, 4)
    assert match_events(ref + 20, ref, 1000, tol_ms=50)[:3] == (4, 0, 0)
    assert match_events(ref + 60, ref, 1000, tol_ms=50)[:3] == (0, 4, 4)


def test_match_prefers_nearest_and_uses_each_reference_once():
    tp, fp, fn, pairs = match_events([100, 104], [103], 1000, tol_ms=10)
    assert (tp, fp, fn) == (1, 1, 0)
    assert pairs == [(100, 103)]
    tp, fp, fn, pairs = match_events([105], [100, 108], 1000, tol_ms=10)
    assert pairs == [(105, 108)]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2000), max_size=25, unique=True),
       st.lists(st.integers(0, 2000), max_size=25, unique=True),
       st.integers(0, 40))
def test_match_against_assignment_oracle(det, ref, tol):
    tp, fp, fn, pairs = match_events(det, ref, 1000, tol_ms=tol)
    assert tp + fp == len(det) and tp + fn == len(ref)
    assert all(abs(d - r) <= tol for d, r in pairs)
    assert len({r for _, r in pairs}) == tp == len({d for d, _ in pairs})
    # a greedy matching never beats the maximum bipartite matching
    if det and ref:
        cost = (np.abs(np.subtract.outer(det, ref)) > tol).astype(float)
        rows, cols = linear_sum_assignment(cost)
        assert tp <= int(np.sum(cost[rows, cols] == 0))


@pytest.mark.parametrize("tp, fp, expected", [
    (194, 28, 194 / 222), (187, 32, 187 / 219), (201, 46, 201 / 247), (198, 38, 198 / 236)])
def test_precision_formula(tp, fp, expected):
    assert precision(tp, fp) == pytest.approx(expected, abs=1e-15)


def test_precision_edge_cases():
    assert precision(5, 0) == 1.0
    with pytest.raises(NoDetectionsError):
        precision(0, 0)
    assert np.isnan(score_detection([], [10], 1000).precision)


def test_snr_measurement():
    rng = np.random.default_rng(1)
    clean = rng.standard_normal((500, 2))
    noise = rng.standard_normal((500, 2))
    noise *= np.sqrt(np.mean(clean ** 2, 0) / np.mean(noise ** 2, 0))
    assert_allclose(measure_snr_db(clean, noise), 0.0, atol=1e-12)
    assert_allclose(measure_snr_db(clean, noise / 10), 20.0, atol=1e-12)
    with pytest.raises(ValueError):
        measure_snr_db(clean, np.zeros_like(clean))
