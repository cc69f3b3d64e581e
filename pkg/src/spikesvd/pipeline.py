"""End-to-end benchmark: simulate -> detect -> despike -> evaluate.

Realizations of one SNR level are laid end to end and processed as a single
recording, so thresholds and the SVD basis of each channel see all events of
the session.  Scores are then computed trial by trial and averaged.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .detector import PeakSet, detect_all
from .metrics import gof, match_events, precision
from .sigio import Recording, RunConfig
from .simgen import SimSpec, simulate
from .svdsep import SeparationResult, despike


def concat_recordings(recs) -> Recording:
    recs = list(recs)
    first = recs[0]
    for r in recs[1:]:
        if r.fs != first.fs or r.names != first.names:
            raise ValueError("recordings differ in sampling rate or channels")
    return first.with_data(np.vstack([r.data for r in recs]))


def split_rows(data, lengths):
    bounds = np.cumsum([0] + list(lengths))
    return [data[a:b] for a, b in zip(bounds[:-1], bounds[1:])]


def split_peaks(peaks: PeakSet, lengths) -> list[PeakSet]:
    """Cut a session-wide peak set back into per-run peak sets."""
    bounds = np.cumsum([0] + list(lengths))
    return [PeakSet(tuple(p[(p >= a) & (p < b)] - a for p in peaks.peaks))
            for a, b in zip(bounds[:-1], bounds[1:])]


@dataclass
class SessionResult:
    """Outputs of one SNR level of the benchmark."""

    spec: SimSpec
    config: RunConfig
    fits: np.ndarray            # (n_realizations, n_channels)
    tp: np.ndarray              # per channel, summed over realizations
    fp: np.ndarray
    fn: np.ndarray
    peaks: PeakSet
    separation: SeparationResult
    truth: list

    def gof_rows(self):
        for k, f0 in enumerate(self.spec.freqs):
            col = self.fits[:, k]
            yield dict(snr_db=self.spec.snr_db, freq_hz=f0,
                       fit_mean=float(np.mean(col)), fit_std=float(np.std(col)))

    def detection_rows(self, names):
        for k, name in enumerate(names):
            tp, fp = int(self.tp[k]), int(self.fp[k])
            yield dict(Channel=name, TP=tp, FP=fp,
                       P=precision(tp, fp) if tp + fp else float("nan"))


def run_session(spec: SimSpec, config: RunConfig | None = None, jobs: int = 1) -> SessionResult:
    config = config or RunConfig()
    trials = [simulate(spec, r) for r in range(spec.n_realizations)]
    rec = concat_recordings(m for m, _ in trials)
    truth_transient = np.vstack([t.transient.data for _, t in trials])
    peaks = detect_all(rec, d=config.d, refractory_ms=config.refractory_ms)
    sep = despike(rec, peaks, config, jobs=jobs)

    n = spec.n_trial
    n_ch = rec.n_channels
    fits = np.empty((spec.n_realizations, n_ch))
    for i in range(spec.n_realizations):
        rows = slice(i * n, (i + 1) * n)
        for k in range(n_ch):
            fits[i, k] = gof(truth_transient[rows, k], sep.transient.data[rows, k]).fit

    tp = np.zeros(n_ch, dtype=int)
    fp = np.zeros(n_ch, dtype=int)
    fn = np.zeros(n_ch, dtype=int)
    for k in range(n_ch):
        ref = np.concatenate([t.true_peaks.samples(k) + i * n for i, (_, t) in enumerate(trials)])
        tp[k], fp[k], fn[k], _ = match_events(peaks[k], ref, spec.fs, config.match_tol_ms)
    return SessionResult(spec, config, fits, tp, fp, fn, peaks, sep, [t for _, t in trials])


def gof_table(snrs, spec: SimSpec | None = None, config: RunConfig | None = None, jobs: int = 1):
    """Fit mean/std per (SNR, gamma frequency): one row each."""
    spec = spec or SimSpec()
    rows = []
    for snr in snrs:
        rows.extend(run_session(replace(spec, snr_db=float(snr)), config, jobs).gof_rows())
    return rows
