"""Evaluation: goodness of fit, SNR, event matching and precision."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detector import ms_to_samples
from .sigio import Recording


class NoDetectionsError(ValueError):
    """Precision is undefined when nothing was detected."""


@dataclass(frozen=True)
class GofResult:
    fit: float
    residual_ratio: float
    n_samples: int


@dataclass(frozen=True)
class DetectionScore:
    tp: int
    fp: int
    fn: int
    precision: float


def gof(x_true, x_hat) -> GofResult:
    """Energy-normalised reconstruction error and its complement.

    ``residual_ratio = sum((x_true - x_hat)**2) / sum(x_true**2)`` and
    ``fit = 1 - residual_ratio``.  ``fit`` is the "percent resemblance" figure.
    """
    x_true = np.asarray(x_true, dtype=float).ravel()
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    if x_true.shape != x_hat.shape:
        raise ValueError(f"length mismatch: {x_true.size} vs {x_hat.size}")
    if x_true.size < 1:
        raise ValueError("empty series")
    energy = float(np.sum(x_true ** 2))
    if energy == 0:
        raise ValueError("zero-energy reference")
    ratio = float(np.sum((x_true - x_hat) ** 2)) / energy
    return GofResult(fit=1.0 - ratio, residual_ratio=ratio, n_samples=x_true.size)


def match_events(detected, reference, fs: float, tol_ms: float = 50.0):
    """Greedy in-time matching of detected to reference events.

    Detected events are visited in increasing time; each takes the nearest
    still-unmatched reference event within ``tol_ms`` (earlier one on a tie).

    Returns
    -------
    tp, fp, fn : int
    pairing : list of (detected_sample, reference_sample)
    """
    detected = np.sort(np.asarray(detected, dtype=int).ravel())
    reference = np.sort(np.asarray(reference, dtype=int).ravel())
    tol = ms_to_samples(tol_ms, fs)
    used = np.zeros(reference.size, dtype=bool)
    pairing = []
    for det in detected:
        lo = np.searchsorted(reference, det - tol, side="left")
        hi = np.searchsorted(reference, det + tol, side="right")
        best = None
        for j in range(lo, hi):
            if used[j]:
                continue
            if best is None or abs(reference[j] - det) < abs(reference[best] - det):
                best = j
        if best is not None:
            used[best] = True
            pairing.append((int(det), int(reference[best])))
    tp = len(pairing)
    return tp, int(detected.size - tp), int(reference.size - tp), pairing


def precision(tp: int, fp: int) -> float:
    if tp < 0 or fp < 0:
        raise ValueError("counts must be non-negative")
    if tp + fp == 0:
        raise NoDetectionsError("no detections: precision undefined")
    return tp / (tp + fp)


def score_detection(detected, reference, fs: float, tol_ms: float = 50.0) -> DetectionScore:
    tp, fp, fn, _ = match_events(detected, reference, fs, tol_ms)
    p = precision(tp, fp) if tp + fp else float("nan")
    return DetectionScore(tp, fp, fn, p)


def measure_snr_db(clean, noise) -> np.ndarray:
    """Per-channel ``10 log10(P_clean / P_noise)`` from whole-series mean squares."""
    c = clean.data if isinstance(clean, Recording) else np.asarray(clean, dtype=float)
    n = noise.data if isinstance(noise, Recording) else np.asarray(noise, dtype=float)
    if c.shape != n.shape:
        raise ValueError(f"shape mismatch: {c.shape} vs {n.shape}")
    p_noise = np.mean(n ** 2, axis=0)
    if np.any(p_noise == 0):
        raise ValueError("zero noise power")
    return 10.0 * np.log10(np.mean(c ** 2, axis=0) / p_noise)
