"""
Clustering epochs and mapping the field at the spike peak
=========================================================

A 61-sensor planar array sees one dipolar transient source, gamma sources
with random sensor patterns and independent 1/f noise.  We cluster the epochs
of the strongest sensor and compare field maps at the spike peak before and
after despiking.
"""

import numpy as np

from spikesvd import (SimSpec, align_epochs, concat_recordings, detect_all, despike, dipolarity,
                      extract_epochs, interpolate, kmeans, simulate_dipolar, sort_order)
from spikesvd.cluster import zscore_rows

spec = SimSpec(snr_db=10.0, n_realizations=40)
trials = [simulate_dipolar(spec, r) for r in range(spec.n_realizations)]
rec = concat_recordings(m for m, _ in trials)
peaks = detect_all(rec)
sep = despike(rec, peaks)

###############################################################################
# k-means with two groups on aligned, z-scored epochs of one sensor.
# Alignment centres every epoch on its largest deflection.  The simulated
# transient has two lobes of equal size, so the groups mostly split epochs
# aligned on the positive lobe from those aligned on the negative one.

ch = int(np.argmax(np.abs(rec.data).max(axis=0)))
epochs = extract_epochs(rec.data[:, ch], peaks[ch], rec.fs, channel_index=ch)
aligned, shifts = align_epochs(epochs)
res = kmeans(zscore_rows(aligned), k=2, seed=0)
print(f"sensor {rec.names[ch]}: {epochs.n_epochs} epochs, cluster sizes "
      f"{np.bincount(res.assignments).tolist()}, {res.n_iter} Lloyd iterations")
order = sort_order(epochs, key="latency")
print("first epochs by latency:", order[:8].tolist())

###############################################################################
# Field maps at the positive-lobe sample of each trial.

pos = rec.positions()
anchor = int(trials[0][1].true_peaks.samples(0)[0])
n = spec.n_trial
scores = {"truth": [], "raw": [], "despiked": []}
for i, (_, truth) in enumerate(trials):
    at = i * n + anchor
    scores["truth"].append(dipolarity(interpolate(truth.transient.data[anchor], pos)).score)
    scores["raw"].append(dipolarity(interpolate(rec.data[at], pos)).score)
    scores["despiked"].append(dipolarity(interpolate(sep.transient.data[at], pos)).score)
for name, vals in scores.items():
    print(f"{name:>9}: mean dipolarity {np.mean(vals):.3f}")
