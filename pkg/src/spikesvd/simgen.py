"""Simulated benchmark: transients overlapped by translated gamma bursts.

Channel k of a trial carries one biphasic transient at the trial midpoint and
one Hann-windowed gamma burst at ``freqs[k]``.  Across realizations the burst
centre walks in equal steps from full separation (burst clear of the
transient's support) to full overlap (coincident centres).  Independent 1/f
noise is added per channel at the requested SNR, where signal power is the
mean square of transient + burst over the whole trial.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detector import ms_to_samples
from .sigio import ChannelMeta, EventList, Recording

SUPPORT_SIGMAS = 4.0


@dataclass(frozen=True)
class SimSpec:
    fs: float = 1024.0
    freqs: tuple[float, ...] = (45.0, 55.0, 65.0, 75.0, 85.0)
    snr_db: float = 10.0
    n_realizations: int = 100
    overlap_steps: int = 5
    trial_ms: float = 1000.0
    spike_width_ms: float = 50.0
    burst_ms: float = 200.0
    seed: int = 0
    transient_amplitude: float = 1.0
    burst_amplitude: float = 0.125
    epoch_ms: float = 300.0

    def __post_init__(self):
        object.__setattr__(self, "freqs", tuple(float(f) for f in self.freqs))
        if not self.fs > 0:
            raise ValueError("fs must be positive")
        if not self.freqs:
            raise ValueError("at least one gamma frequency is required")
        if any(not 0 < f < self.fs / 2 for f in self.freqs):
            raise ValueError(f"gamma frequencies must lie in (0, fs/2 = {self.fs / 2})")
        if self.overlap_steps < 1:
            raise ValueError("overlap_steps must be >= 1")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.trial_ms < self.epoch_ms:
            raise ValueError("trial_ms must cover at least one epoch window")
        if self.spike_width_ms <= 0 or self.burst_ms <= 0:
            raise ValueError("spike and burst durations must be positive")
        if self.transient_amplitude <= 0 or self.burst_amplitude < 0:
            raise ValueError("transient amplitude must be > 0 and burst amplitude >= 0")
        n = self.n_trial
        if self.transient_center + self.max_offset + self.burst_half >= n:
            raise ValueError("trial too short to hold a fully separated burst")

    @property
    def n_trial(self) -> int:
        return ms_to_samples(self.trial_ms, self.fs)

    @property
    def transient_center(self) -> int:
        return self.n_trial // 2

    @property
    def sigma(self) -> float:
        """Gaussian width of the transient in samples."""
        return self.spike_width_ms / 2.0 * self.fs / 1000.0

    @property
    def transient_half(self) -> int:
        return int(np.ceil(SUPPORT_SIGMAS * self.sigma))

    @property
    def burst_half(self) -> int:
        return ms_to_samples(self.burst_ms / 2.0, self.fs)

    @property
    def max_offset(self) -> int:
        """Burst-centre offset at which burst and transient supports just miss."""
        return self.transient_half + self.burst_half + 1

    def burst_offset(self, step: int) -> float:
        """Centre offset (samples) of the burst for overlap step ``step``."""
        if self.overlap_steps == 1:
            return 0.0
        return self.max_offset * (1.0 - step / (self.overlap_steps - 1))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    transient: Recording
    oscillation: Recording
    noise: Recording
    true_peaks: EventList

    @property
    def clean(self) -> np.ndarray:
        return self.transient.data + self.oscillation.data


def gen_transient(fs: float, width_ms: float = 50.0, amplitude: float = 1.0) -> np.ndarray:
    """Biphasic transient: negative first derivative of a Gaussian.

    The positive lobe precedes the negative one; lobes sit at t0 -/+ sigma so
    the peak-to-trough distance is ``width_ms``.  The support is truncated at
    +/- 4 sigma and ``t0`` is the centre sample.
    """
    if width_ms <= 0 or amplitude <= 0:
        raise ValueError("width and amplitude must be positive")
    sigma = width_ms / 2.0 * fs / 1000.0
    half = int(np.ceil(SUPPORT_SIGMAS * sigma))
    u = np.arange(-half, half + 1) / sigma
    w = -u * np.exp(-0.5 * u ** 2)
    return amplitude * w / np.max(np.abs(w))


def _hann_burst(n: int, center: float, fs: float, f0: float, half: int,
                amplitude: float, phase: float) -> np.ndarray:
    """Length-``n`` series holding a burst centred at sample ``center``
    (may be fractional); the Hann envelope is zero beyond ``half`` samples."""
    tau = np.arange(n) - center
    env = np.where(np.abs(tau) <= half, 0.5 + 0.5 * np.cos(np.pi * tau / half), 0.0)
    return amplitude * env * np.sin(2 * np.pi * f0 * tau / fs + phase)


def gen_burst(fs: float, f0: float, burst_ms: float = 200.0, amplitude: float = 1.0,
              phase: float = 0.0) -> np.ndarray:
    """Sinusoid at ``f0`` under a symmetric Hann window (odd length, zero ends)."""
    if not 0 < f0 < fs / 2:
        raise ValueError(f"frequency {f0} Hz aliases at fs={fs} Hz")
    if burst_ms <= 0:
        raise ValueError("burst_ms must be positive")
    half = ms_to_samples(burst_ms / 2.0, fs)
    return _hann_burst(2 * half + 1, half, fs, f0, half, amplitude, phase)


def gen_pink_noise(n: int, seed=None) -> np.ndarray:
    """Zero-mean, unit-variance noise whose power spectrum falls as 1/f."""
    if n < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.arange(spec.size, dtype=float)
    f[0] = 1.0
    spec /= np.sqrt(f)
    spec[0] = 0.0
    y = np.fft.irfft(spec, n)
    y -= y.mean()
    return y / y.std()


def scale_to_snr(clean_power: float, noise, snr_db: float) -> np.ndarray:
    noise = np.asarray(noise, dtype=float)
    if not clean_power > 0:
        raise ValueError("clean power must be positive")
    p_noise = np.mean(noise ** 2)
    if p_noise == 0:
        raise ValueError("zero-power noise")
    target = clean_power / 10.0 ** (snr_db / 10.0)
    return noise * np.sqrt(target / p_noise)


def simulate(spec: SimSpec, realization: int):
    """One trial of the benchmark.

    Returns
    -------
    mixture : Recording
    truth : GroundTruth
    """
    if not 0 <= realization < spec.n_realizations:
        raise ValueError(f"realization must be in [0, {spec.n_realizations})")
    rng = np.random.default_rng(spec.seed + realization)
    n, c = spec.n_trial, spec.transient_center
    step = realization % spec.overlap_steps
    n_ch = len(spec.freqs)

    spike = gen_transient(spec.fs, spec.spike_width_ms, spec.transient_amplitude)
    half = spike.size // 2
    transient = np.zeros((n, n_ch))
    oscillation = np.zeros((n, n_ch))
    noise = np.zeros((n, n_ch))
    phases = rng.uniform(0, 2 * np.pi, n_ch)
    noise_seeds = rng.integers(0, 2 ** 63, n_ch)
    for k, f0 in enumerate(spec.freqs):
        transient[c - half:c + half + 1, k] = spike
        oscillation[:, k] = _hann_burst(n, c + spec.burst_offset(step), spec.fs, f0,
                                        spec.burst_half, spec.burst_amplitude, phases[k])
        clean = transient[:, k] + oscillation[:, k]
        noise[:, k] = scale_to_snr(np.mean(clean ** 2), gen_pink_noise(n, noise_seeds[k]),
                                   spec.snr_db)

    channels = tuple(ChannelMeta(f"G{f0:g}Hz") for f0 in spec.freqs)
    lobes = ((c + int(np.argmax(spike)) - half, "pos"), (c + int(np.argmin(spike)) - half, "neg"))
    truth_peaks = EventList(tuple((k, s, lab) for k in range(n_ch) for s, lab in lobes))
    truth = GroundTruth(Recording(spec.fs, channels, transient),
                        Recording(spec.fs, channels, oscillation),
                        Recording(spec.fs, channels, noise), truth_peaks)
    return Recording(spec.fs, channels, transient + oscillation + noise), truth


def ring_layout(n_rings: int = 4, radius: float = 0.95) -> np.ndarray:
    """Planar sensor layout: a centre sensor plus rings of 6, 12, 18, ... sensors."""
    pts = [(0.0, 0.0)]
    for r in range(1, n_rings + 1):
        rho = radius * r / n_rings
        ang = np.arange(6 * r) * 2 * np.pi / (6 * r)
        pts.extend(zip(rho * np.cos(ang), rho * np.sin(ang)))
    return np.array(pts)


def dipole_pattern(layout, pos_pole=(-0.4, 0.15), neg_pole=(0.4, -0.15), width: float = 0.35):
    """Sensor weights of one tangential source: a positive and a negative
    Gaussian pole, scaled to unit peak magnitude."""
    layout = np.asarray(layout, dtype=float)
    g = lambda c: np.exp(-((layout - np.asarray(c)) ** 2).sum(1) / (2 * width ** 2))
    p = g(pos_pole) - g(neg_pole)
    return p / np.abs(p).max()


def simulate_dipolar(spec: SimSpec, realization: int, layout=None, gamma_amplitude=None):
    """Multi-sensor trial: one transient source with a dipolar field pattern,
    one gamma source per ``spec.freqs`` entry with a random sensor pattern,
    and independent 1/f noise on every sensor.

    Returns
    -------
    mixture : Recording
        Sensors carry ``pos2d`` from ``layout``.
    truth : GroundTruth
        Channel-wise decomposition; ``true_peaks`` marks the positive and
        negative lobe of the source waveform on every sensor.
    """
    if not 0 <= realization < spec.n_realizations:
        raise ValueError(f"realization must be in [0, {spec.n_realizations})")
    layout = ring_layout() if layout is None else np.asarray(layout, dtype=float)
    amp_g = spec.burst_amplitude if gamma_amplitude is None else gamma_amplitude
    rng = np.random.default_rng(spec.seed + realization)
    n, c = spec.n_trial, spec.transient_center
    n_s = layout.shape[0]
    step = realization % spec.overlap_steps

    spike = gen_transient(spec.fs, spec.spike_width_ms, spec.transient_amplitude)
    half = spike.size // 2
    src = np.zeros(n)
    src[c - half:c + half + 1] = spike
    transient = np.outer(src, dipole_pattern(layout))

    oscillation = np.zeros((n, n_s))
    for f0 in spec.freqs:
        burst = _hann_burst(n, c + spec.burst_offset(step), spec.fs, f0, spec.burst_half,
                            amp_g, rng.uniform(0, 2 * np.pi))
        oscillation += np.outer(burst, rng.standard_normal(n_s) / np.sqrt(len(spec.freqs)))

    clean = transient + oscillation
    p_clean = np.mean(clean ** 2)
    noise = np.column_stack([
        scale_to_snr(p_clean, gen_pink_noise(n, s), spec.snr_db)
        for s in rng.integers(0, 2 ** 63, n_s)])

    channels = tuple(ChannelMeta(f"S{i:02d}", tuple(p)) for i, p in enumerate(layout))
    lobes = ((c + int(np.argmax(spike)) - half, "pos"), (c + int(np.argmin(spike)) - half, "neg"))
    truth = GroundTruth(Recording(spec.fs, channels, transient),
                        Recording(spec.fs, channels, oscillation),
                        Recording(spec.fs, channels, noise),
                        EventList(tuple((k, s, lab) for k in range(n_s) for s, lab in lobes)))
    return Recording(spec.fs, channels, clean + noise), truth
