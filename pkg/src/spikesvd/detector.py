"""Transient peak detection by quantile thresholds, and epoch extraction.

Each channel is thresholded on its own amplitude distribution::

    thr_h = Q50 + d * (Q75 - Q25)
    thr_l = Q50 - d * (Q75 - Q25)

Every excursion above ``thr_h`` (below ``thr_l``) contributes its largest
local maximum (smallest local minimum) as a peak candidate, so noise ripples
riding on one spike phase do not split it into several events.  Candidates
closer than the refractory interval compete and the one deviating most from
the median survives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sigio import EventList, Recording


def ms_to_samples(ms: float, fs: float) -> int:
    """Round half up, so 153.6 -> 154 and 10.24 -> 10."""
    return int(np.floor(ms * fs / 1000.0 + 0.5))


@dataclass(frozen=True)
class ThresholdPair:
    thr_l: float
    thr_h: float
    q25: float
    q50: float
    q75: float
    d: float

    @property
    def iqr(self) -> float:
        return self.q75 - self.q25


@dataclass(frozen=True)
class PeakSet:
    """Sorted peak sample indices, one integer array per channel."""

    peaks: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "peaks", tuple(np.sort(np.asarray(p, dtype=int)) for p in self.peaks))

    def __getitem__(self, channel):
        return self.peaks[channel]

    def __len__(self):
        return len(self.peaks)

    @property
    def n_peaks(self) -> int:
        return int(sum(len(p) for p in self.peaks))

    def to_events(self, label: str | None = None) -> EventList:
        return EventList.from_samples(self.peaks, label=label)

    @classmethod
    def from_events(cls, events: EventList, n_channels: int) -> "PeakSet":
        return cls(tuple(events.samples(ch) for ch in range(n_channels)))


@dataclass(frozen=True, eq=False)
class EpochMatrix:
    """Epochs x samples matrix of windows centred on peaks of one channel.

    ``dropped`` lists peaks whose full window would run past the series edge.
    """

    channel_index: int
    peak_samples: np.ndarray
    X: np.ndarray
    half_width: int
    dropped: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def n_epochs(self) -> int:
        return self.X.shape[0]

    @property
    def length(self) -> int:
        return self.X.shape[1]


def quantile_thresholds(x, d: float = 3.0) -> ThresholdPair:
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 4:
        raise ValueError(f"series too short for quantile thresholds ({x.size} < 4 samples)")
    if not d > 0:
        raise ValueError("d must be positive")
    # default numpy method is linear interpolation between order statistics
    q25, q50, q75 = np.quantile(x, [0.25, 0.5, 0.75])
    spread = d * (q75 - q25)
    return ThresholdPair(thr_l=q50 - spread, thr_h=q50 + spread,
                         q25=q25, q50=q50, q75=q75, d=d)


def _excursion_extrema(x, mask, is_extremum, sign: float):
    """Index of the largest (``sign`` = 1) or smallest (``sign`` = -1) local
    extremum inside each contiguous run of ``mask``; earliest wins ties."""
    edges = np.diff(np.concatenate(([0], mask.view(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    out = []
    for s, e in zip(starts, ends):
        idx = np.flatnonzero(is_extremum[s:e]) + s
        if idx.size:
            out.append(idx[np.argmax(sign * x[idx])])
    return out


def _candidates(x, thr: ThresholdPair):
    """One candidate per supra-threshold excursion: its most extreme local peak."""
    is_max = np.zeros(x.size, dtype=bool)
    is_min = np.zeros(x.size, dtype=bool)
    mid = x[1:-1]
    is_max[1:-1] = (x[:-2] <= mid) & (mid >= x[2:])
    is_min[1:-1] = (x[:-2] >= mid) & (mid <= x[2:])
    hi = _excursion_extrema(x, x > thr.thr_h, is_max, 1.0)
    lo = _excursion_extrema(x, x < thr.thr_l, is_min, -1.0)
    return np.array(sorted(hi + lo), dtype=int)


def _apply_refractory(idx, strength, refractory: int):
    """Keep the strongest candidates so that no two survivors are closer than
    ``refractory`` samples.  Ties go to the earlier sample."""
    if idx.size == 0 or refractory <= 1:
        return idx
    order = np.lexsort((idx, -strength))
    taken = np.zeros(idx.size, dtype=bool)
    kept = []
    for j in order:
        if taken[j]:
            continue
        kept.append(idx[j])
        lo = np.searchsorted(idx, idx[j] - refractory, side="right")
        hi = np.searchsorted(idx, idx[j] + refractory, side="left")
        taken[lo:hi] = True
    return np.sort(np.array(kept, dtype=int))


def detect_peaks(x, fs: float, d: float = 3.0, refractory_ms: float = 10.0,
                 thresholds: ThresholdPair | None = None) -> np.ndarray:
    """Sorted indices of transient peaks in a 1-D series.

    Parameters
    ----------
    x : array_like
        Single-channel signal.
    fs : float
        Sampling rate in Hz.
    d : float
        Threshold width in units of the interquartile range.
    refractory_ms : float
        Minimum spacing between returned peaks.
    thresholds : ThresholdPair, optional
        Precomputed thresholds; computed from ``x`` otherwise.
    """
    x = np.asarray(x, dtype=float).ravel()
    thr = thresholds if thresholds is not None else quantile_thresholds(x, d)
    idx = _candidates(x, thr)
    strength = np.abs(x[idx] - thr.q50)
    return _apply_refractory(idx, strength, ms_to_samples(refractory_ms, fs))


def detect_all(rec: Recording, d: float = 3.0, refractory_ms: float = 10.0) -> PeakSet:
    """Run :func:`detect_peaks` on every channel independently."""
    return PeakSet(tuple(
        detect_peaks(rec.data[:, ch], rec.fs, d=d, refractory_ms=refractory_ms)
        for ch in range(rec.n_channels)))


def extract_epochs(x, peaks, fs: float, epoch_ms: float = 300.0,
                   channel_index: int = 0) -> EpochMatrix:
    x = np.asarray(x, dtype=float).ravel()
    peaks = np.asarray(peaks, dtype=int).ravel()
    hw = ms_to_samples(epoch_ms / 2.0, fs)
    ok = (peaks - hw >= 0) & (peaks + hw < x.size)
    kept = peaks[ok]
    if kept.size:
        X = np.lib.stride_tricks.sliding_window_view(x, 2 * hw + 1)[kept - hw].copy()
    else:
        X = np.zeros((0, 2 * hw + 1))
    return EpochMatrix(channel_index, kept, X, hw, dropped=peaks[~ok])
