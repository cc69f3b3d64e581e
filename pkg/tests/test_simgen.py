import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, signal

from spikesvd.metrics import measure_snr_db
from spikesvd.simgen import (SimSpec, dipole_pattern, gen_burst, gen_pink_noise, gen_transient,
                             ring_layout, scale_to_snr, simulate, simulate_dipolar)


def test_transient_peak_amplitude():
    for amp in (1.0, 0.3, 7.0):
        assert abs(np.abs(gen_transient(1024, 50, amp)).max() - amp) < 1e-9


def test_transient_odd_symmetry():
    w = gen_transient(1024, 50)
    assert w.size % 2 == 1
    assert_allclose(w, -w[::-1], atol=1e-9)
    assert np.argmax(w) < w.size // 2 < np.argmin(w)


def test_transient_energy_matches_quadrature():
    fs, width = 1024.0, 50.0
    sigma = width / 2 * fs / 1000
    w = gen_transient(fs, width)
    half = w.size // 2
    u = np.arange(-half, half + 1) / sigma
    peak = np.abs(u * np.exp(-0.5 * u ** 2)).max()  # normalised on the sample grid
    energy, _ = integrate.quad(lambda t: (t / sigma * np.exp(-0.5 * (t / sigma) ** 2) / peak) ** 2,
                               -half - 0.5, half + 0.5)
    # sample sum of a smooth, nearly vanished bump ~ its integral
    assert_allclose(np.sum(w ** 2), energy, rtol=1e-6)


@pytest.mark.parametrize("bad", [dict(width_ms=0), dict(amplitude=-1)])
def test_transient_errors(bad):
    with pytest.raises(ValueError):
        gen_transient(1024, **{"width_ms": 50, "amplitude": 1, **bad})


@pytest.mark.parametrize("f0", [45, 65, 85])
def test_burst_periodogram_peak(f0):
    b = gen_burst(1024, f0, 200)
    f, p = signal.periodogram(b, fs=1024, nfft=1 << 15, window="boxcar")
    assert abs(f[np.argmax(p)] - f0) <= 1024 / b.size


def test_burst_endpoints_and_zero_amplitude():
    b = gen_burst(1024, 85, 200)
    assert b[0] == 0 and b[-1] == 0
    assert not np.any(gen_burst(1024, 85, 200, amplitude=0.0))


def test_burst_aliasing_rejected():
    with pytest.raises(ValueError):
        gen_burst(1024, 600)
    with pytest.raises(ValueError):
        gen_burst(1024, 512)


def test_pink_noise_determinism_and_variance():
    a, b = gen_pink_noise(4096, 7), gen_pink_noise(4096, 7)
    assert np.array_equal(a, b)
    assert abs(a.var() - 1) < 1e-6
    assert abs(a.mean()) < 1e-12
    with pytest.raises(ValueError):
        gen_pink_noise(1, 0)


def test_pink_noise_slope_single_seed():
    f, p = signal.welch(gen_pink_noise(1 << 16, 3), fs=1024, nperseg=4096)
    band = (f >= 1) & (f <= 100)
    slope = np.polyfit(np.log10(f[band]), np.log10(p[band]), 1)[0]
    assert -1.3 < slope < -0.7


@pytest.mark.parametrize("snr, ratio", [(0, 1.0), (20, 100.0), (-5, 10 ** -0.5)])
def test_scale_to_snr(snr, ratio):
    noise = gen_pink_noise(1000, 1) * 3.0
    out = scale_to_snr(2.0, noise, snr)
    assert_allclose(2.0 / np.mean(out ** 2), ratio, rtol=1e-9)


def test_scale_to_snr_zero_noise():
    with pytest.raises(ValueError):
        scale_to_snr(1.0, np.zeros(10), 10)


def test_ground_truth_additivity():
    mix, truth = simulate(SimSpec(n_realizations=3), 2)
    diff = mix.data - truth.transient.data - truth.oscillation.data - truth.noise.data
    assert np.abs(diff).max() <= 1e-12


def test_simulated_snr_closes_loop():
    _, truth = simulate(SimSpec(snr_db=10, n_realizations=2), 1)
    assert_allclose(measure_snr_db(truth.clean, truth.noise.data), 10.0, atol=1e-6)


def test_full_overlap_at_last_step():
    spec = SimSpec()
    assert spec.burst_offset(spec.overlap_steps - 1) == 0
    assert spec.burst_offset(0) == spec.max_offset
    _, truth = simulate(SimSpec(n_realizations=5), 4)
    env = np.abs(truth.oscillation.data[:, 0])
    support = np.flatnonzero(env > 0)
    assert_allclose((support[0] + support[-1]) / 2, spec.transient_center, atol=1)


def test_separated_burst_does_not_touch_transient():
    spec = SimSpec(n_realizations=5)
    _, truth = simulate(spec, 0)
    overlap = (truth.transient.data != 0) & (truth.oscillation.data != 0)
    assert not overlap.any()


def test_true_peaks_on_transient_lobes():
    _, truth = simulate(SimSpec(n_realizations=1), 0)
    x = truth.transient.data[:, 0]
    assert sorted(truth.true_peaks.samples(0)) == sorted([int(np.argmax(x)), int(np.argmin(x))])


def test_simulate_deterministic_and_channel_names():
    spec = SimSpec(n_realizations=2, seed=5)
    a, _ = simulate(spec, 1)
    b, _ = simulate(spec, 1)
    assert a == b
    assert a.names == ["G45Hz", "G55Hz", "G65Hz", "G75Hz", "G85Hz"]
    with pytest.raises(ValueError):
        simulate(spec, 2)


@pytest.mark.parametrize("kw", [dict(fs=0), dict(freqs=()), dict(freqs=(600,)),
                                dict(n_realizations=0), dict(trial_ms=200), dict(burst_ms=-1)])
def test_simspec_invariants(kw):
    with pytest.raises(ValueError):
        SimSpec(**kw)


def test_dipolar_simulation_shapes():
    layout = ring_layout()
    assert layout.shape == (61, 2)
    assert np.hypot(*layout.T).max() <= 0.95 + 1e-12
    pat = dipole_pattern(layout)
    assert_allclose(np.abs(pat).max(), 1.0)
    mix, truth = simulate_dipolar(SimSpec(n_realizations=1), 0)
    assert mix.n_channels == 61
    assert np.isfinite(mix.positions()).all()
    assert_allclose(mix.data, truth.clean + truth.noise.data, atol=1e-12)
