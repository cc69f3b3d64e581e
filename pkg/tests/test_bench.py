import numpy as np
import pytest

from spikesvd.bench import run_bench


def test_checksum_independent_of_workers():
    kw = dict(n_channels=6, window_len=31, n_windows=4, epochs_per_window=8, seed=3)
    sums = {w: run_bench(workers=w, baseline=False, **kw).checksum for w in (1, 2, 4)}
    assert len(set(sums.values())) == 1


def test_checksum_depends_on_seed():
    kw = dict(n_channels=2, window_len=21, n_windows=2, epochs_per_window=4, baseline=False)
    assert run_bench(seed=0, **kw).checksum != run_bench(seed=1, **kw).checksum


@pytest.mark.parametrize("dims", [dict(n_windows=0), dict(n_channels=0), dict(window_len=0)])
def test_empty_workload(dims):
    with pytest.raises(ValueError, match="empty workload"):
        run_bench(**dims)


def test_report_fields():
    r = run_bench(n_channels=2, window_len=21, n_windows=3, epochs_per_window=4, workers=2)
    d = r.to_dict()
    assert d["n_windows"] == 3 and d["workers"] == 2
    assert d["wall_ms"] > 0 and d["windows_per_s"] > 0
    assert np.isfinite(d["speedup_vs_1"]) and d["speedup_vs_1"] > 0
    assert len(d["checksum"]) == 64


def test_throughput_invariant():
    r = run_bench(n_channels=3, window_len=21, n_windows=5, epochs_per_window=4, baseline=False)
    assert r.windows_per_s == pytest.approx(r.n_windows * r.n_channels / (r.wall_ms / 1000), rel=1e-9)
