"""Morphology clustering of transient epochs.

Epochs are first aligned on their largest absolute deflection, then grouped
with k-means (Lloyd iterations, k-means++ seeding, several restarts).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .detector import EpochMatrix

MAX_ITER = 300


@dataclass(frozen=True, eq=False)
class ClusterResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int
    inertia_history: tuple[float, ...] = ()


def _rows(X):
    return np.asarray(X.X if isinstance(X, EpochMatrix) else X, dtype=float)


def _extremum_index(row):
    """Position of max |row|; among ties the one nearest the centre (then earliest)."""
    a = np.abs(row)
    ties = np.flatnonzero(a == a.max())
    center = (row.size - 1) // 2
    return ties[np.argmin(np.abs(ties - center))]


def align_epochs(X):
    """Circularly shift every epoch so its largest |deflection| is centred.

    Returns ``(aligned, shifts)``; ``aligned`` is an :class:`EpochMatrix` when
    one is given, a plain array otherwise.  ``shifts[i]`` is the roll applied
    to row i.
    """
    M = _rows(X)
    L = M.shape[1]
    if L % 2 == 0:
        raise ValueError("epoch length must be odd to have a centre sample")
    center = (L - 1) // 2
    shifts = np.array([center - _extremum_index(r) for r in M], dtype=int)
    aligned = np.array([np.roll(r, s) for r, s in zip(M, shifts)]).reshape(M.shape)
    if isinstance(X, EpochMatrix):
        return replace(X, X=aligned), shifts
    return aligned, shifts


def zscore_rows(X):
    M = _rows(X)
    sd = M.std(axis=1, keepdims=True)
    return (M - M.mean(axis=1, keepdims=True)) / np.where(sd > 0, sd, 1.0)


def _sq_dist(M, C):
    d = (M ** 2).sum(1)[:, None] - 2 * M @ C.T + (C ** 2).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp(M, k, rng):
    n = M.shape[0]
    centers = [M[rng.integers(n)]]
    for _ in range(1, k):
        d = _sq_dist(M, np.array(centers)).min(axis=1)
        total = d.sum()
        idx = rng.choice(n, p=d / total) if total > 0 else rng.integers(n)
        centers.append(M[idx])
    return np.array(centers)


def _lloyd(M, C, max_iter):
    k = C.shape[0]
    history = []
    labels = None
    for it in range(1, max_iter + 1):
        d = _sq_dist(M, C)
        new = d.argmin(axis=1)
        # an emptied cluster takes over the point farthest from its centroid,
        # drawn only from clusters that keep at least one member
        for j in range(k):
            if not np.any(new == j):
                own = d[np.arange(len(new)), new]
                sizes = np.bincount(new, minlength=k)
                far = int(np.argmax(np.where(sizes[new] > 1, own, -1.0)))
                new[far] = j
                C[j] = M[far]
        dist = ((M - C[new]) ** 2).sum()
        history.append(float(dist))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        C = np.array([M[labels == j].mean(axis=0) for j in range(k)])
    inertia = float(((M - C[labels]) ** 2).sum())
    return labels, C, inertia, it, tuple(history)


def kmeans(X, k: int = 2, seed=0, n_init: int = 10, max_iter: int = MAX_ITER) -> ClusterResult:
    """Best-of-``n_init`` k-means by final inertia (ties: lowest restart index)."""
    M = _rows(X)
    if M.ndim != 2 or k < 1 or k > M.shape[0]:
        raise ValueError(f"need 1 <= k <= n_rows, got k={k} for {M.shape[0]} rows")
    seeds = np.random.default_rng(seed).integers(0, 2 ** 63, size=max(1, n_init))
    best = None
    for s in seeds:
        rng = np.random.default_rng(s)
        labels, C, inertia, n_iter, hist = _lloyd(M, _kmeanspp(M, k, rng), max_iter)
        if best is None or inertia < best.inertia:
            best = ClusterResult(labels, C, inertia, n_iter, hist)
    return best


def sort_order(X, key: str = "amplitude") -> np.ndarray:
    """Stable ordering of epochs for image-style display.

    ``amplitude`` sorts by peak |deflection|, ``latency`` by the sample index
    of that deflection (use on unaligned epochs).
    """
    M = _rows(X)
    if M.shape[0] == 0:
        raise ValueError("no epochs to sort")
    if key == "amplitude":
        values = np.abs(M).max(axis=1)
    elif key == "latency":
        values = np.array([_extremum_index(r) for r in M])
    else:
        raise ValueError(f"unknown sort key {key!r}")
    return np.argsort(values, kind="stable")
