"""Windowed-SVD throughput harness.

Every (channel, window) task draws a seeded epochs x samples matrix, runs
:func:`compute_svd` and :func:`build_model` with K = 3, and keeps the singular
values.  Tasks are spread over a pool of worker processes; the checksum over
all singular values, taken in task order, does not depend on the pool size.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .svdsep import build_model, compute_svd

NOTE = ("software stand-in for hardware-offloaded SVD: parallel CPU workers, "
        "no reconfigurable-logic speedup is measured")


@dataclass(frozen=True)
class BenchReport:
    n_windows: int
    n_channels: int
    window_len: int
    epochs_per_window: int
    workers: int
    wall_ms: float
    windows_per_s: float
    speedup_vs_1: float | None
    checksum: str
    cpu_count: int
    note: str = NOTE

    def to_dict(self) -> dict:
        return asdict(self)


def _task_matrix(seed: int, channel: int, window: int, shape) -> np.ndarray:
    return np.random.default_rng((seed, channel, window)).standard_normal(shape)


def _channel_block(args):
    """All windows of one channel; returns (n_windows, K) singular values."""
    seed, channel, n_windows, shape, K = args
    out = np.empty((n_windows, K))
    for w in range(n_windows):
        svd = compute_svd(_task_matrix(seed, channel, w, shape))
        build_model(svd, min(K, svd.rank), channel_index=channel)
        s = np.zeros(K)
        s[:min(K, svd.rank)] = svd.S[:K]
        out[w] = s
    return out


def _run(n_channels, window_len, n_windows, epochs_per_window, workers, seed, K=3):
    tasks = [(seed, ch, n_windows, (epochs_per_window, window_len), K)
             for ch in range(n_channels)]
    t0 = time.perf_counter()
    if workers == 1:
        blocks = [_channel_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_channel_block, tasks))
    wall = time.perf_counter() - t0
    sv = np.ascontiguousarray(np.stack(blocks), dtype="<f8")
    return wall, hashlib.sha256(sv.tobytes()).hexdigest()


def run_bench(n_channels: int = 151, window_len: int = 309, n_windows: int = 100,
              workers: int = 1, seed: int = 0, epochs_per_window: int = 32,
              baseline: bool = True) -> BenchReport:
    """Time the windowed-SVD workload on ``workers`` processes.

    With ``baseline`` and ``workers > 1`` the same workload is also timed on a
    single worker to fill ``speedup_vs_1``.
    """
    dims = dict(n_channels=n_channels, window_len=window_len, n_windows=n_windows,
                epochs_per_window=epochs_per_window)
    if any(v < 1 for v in dims.values()):
        raise ValueError(f"empty workload: {dims}")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    wall, checksum = _run(n_channels, window_len, n_windows, epochs_per_window, workers, seed)
    speedup = 1.0 if workers == 1 else None
    if workers > 1 and baseline:
        wall1, checksum1 = _run(n_channels, window_len, n_windows, epochs_per_window, 1, seed)
        if checksum1 != checksum:
            raise RuntimeError("checksum depends on worker count")
        speedup = wall1 / wall
    return BenchReport(n_windows=n_windows, n_channels=n_channels, window_len=window_len,
                       epochs_per_window=epochs_per_window, workers=workers,
                       wall_ms=wall * 1000.0,
                       windows_per_s=n_windows * n_channels / wall,
                       speedup_vs_1=speedup, checksum=checksum,
                       cpu_count=len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity")
                       else os.cpu_count() or 1)
