"""Rank-K temporal basis from event epochs and transient reconstruction.

For one channel the epochs matrix X (events x samples) is decomposed as
``X = U diag(S) V^T``.  The first K right singular vectors span the temporal
model of the transient; every event window is replaced by its orthogonal
projection onto that span.  Whatever the projection leaves behind (gamma
oscillation, background) is the residual.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .detector import PeakSet, extract_epochs
from .sigio import EventList, Recording, RunConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SvdBasis:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.S.size

    def reconstruct(self, k: int | None = None) -> np.ndarray:
        k = self.rank if k is None else k
        return (self.U[:, :k] * self.S[:k]) @ self.V[:, :k].T

    def energy_fraction(self, k: int) -> float:
        """Share of the squared Frobenius norm held by the first k components."""
        total = np.sum(self.S ** 2)
        return float(np.sum(self.S[:k] ** 2) / total) if total > 0 else 1.0


@dataclass(frozen=True, eq=False)
class TransientModel:
    basis: np.ndarray
    K: int
    channel_index: int = 0

    @property
    def length(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True, eq=False)
class SeparationResult:
    transient: Recording
    residual: Recording
    windows: tuple[tuple[int, int, int], ...]
    models: tuple


def compute_svd(X) -> SvdBasis:
    """Thin SVD with a fixed sign gauge.

    Each right singular vector is flipped so that its largest-magnitude entry
    is positive; the matching left vector flips with it.
    """
    X = np.asarray(getattr(X, "X", X), dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite entries in epoch matrix")
    U, S, Vt = np.linalg.svd(X, full_matrices=False)
    V = Vt.T
    pivot = np.argmax(np.abs(V), axis=0)
    signs = np.where(V[pivot, np.arange(V.shape[1])] < 0, -1.0, 1.0)
    return SvdBasis(U * signs, S, V * signs)


def build_model(svd: SvdBasis, K: int = 3, channel_index: int = 0) -> TransientModel:
    if not 1 <= K <= svd.rank:
        raise ValueError(f"K must be in [1, {svd.rank}], got {K}")
    return TransientModel(svd.V[:, :K].copy(), K, channel_index)


def project_epoch(segment, model: TransientModel) -> np.ndarray:
    segment = np.asarray(segment, dtype=float)
    if segment.shape[-1] != model.length:
        raise ValueError(f"segment length {segment.shape[-1]} != model length {model.length}")
    B = model.basis
    return (segment @ B) @ B.T


def _blend_weights(starts, length: int):
    """Per-window weights implementing a linear crossfade wherever
    consecutive windows overlap.  Returns an (n_windows, length) array."""
    n = len(starts)
    w = np.ones((n, length))
    for i in range(n - 1):
        overlap = starts[i] + length - starts[i + 1]
        if overlap <= 0:
            continue
        m = min(overlap, length)
        ramp = np.arange(1, m + 1) / (m + 1)
        w[i, length - m:] *= ramp[::-1]
        w[i + 1, :m] *= ramp
    return w


def _despike_channel(x, peaks, fs, config: RunConfig, ch: int):
    epochs = extract_epochs(x, peaks, fs, config.epoch_ms, channel_index=ch)
    out = np.zeros_like(x)
    if epochs.n_epochs == 0:
        return out, [], None
    svd = compute_svd(epochs.X)
    K = min(config.rank, svd.rank)
    if K < config.rank:
        log.warning("channel %d: %d epochs, rank reduced from %d to %d",
                    ch, epochs.n_epochs, config.rank, K)
    model = build_model(svd, K, channel_index=ch)
    proj = project_epoch(epochs.X, model)

    hw, L = epochs.half_width, epochs.length
    starts = epochs.peak_samples - hw
    weights = _blend_weights(starts, L)
    acc = np.zeros_like(x)
    wsum = np.zeros_like(x)
    for start, p, wt in zip(starts, proj, weights):
        acc[start:start + L] += wt * p
        wsum[start:start + L] += wt
    covered = wsum > 0
    out[covered] = acc[covered] / wsum[covered]
    windows = [(ch, int(s), int(s + L - 1)) for s in starts]
    return out, windows, model


def despike(rec: Recording, peaks, config: RunConfig | None = None,
            jobs: int = 1) -> SeparationResult:
    """Reconstruct the transient part of every channel.

    ``peaks`` is a :class:`PeakSet` or an :class:`EventList`.  Channels are
    independent and may be spread over ``jobs`` threads; the result does not
    depend on ``jobs``.  A channel without usable peaks gets an all-zero
    transient.
    """
    config = config or RunConfig()
    if isinstance(peaks, EventList):
        peaks = PeakSet.from_events(peaks.validate(rec), rec.n_channels)
    if len(peaks) != rec.n_channels:
        raise ValueError(f"peak set has {len(peaks)} channels, recording has {rec.n_channels}")
    for ch in range(rec.n_channels):
        p = peaks[ch]
        if p.size and (p.min() < 0 or p.max() >= rec.n_samples):
            raise ValueError(f"channel {ch}: peak index out of range")

    def work(ch):
        return _despike_channel(rec.data[:, ch], peaks[ch], rec.fs, config, ch)

    if jobs > 1 and rec.n_channels > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, range(rec.n_channels)))
    else:
        results = [work(ch) for ch in range(rec.n_channels)]

    transient = np.column_stack([r[0] for r in results])
    windows = tuple(w for r in results for w in r[1])
    residual = rec.data - transient
    return SeparationResult(rec.with_data(transient), rec.with_data(residual),
                            windows, tuple(r[2] for r in results))
