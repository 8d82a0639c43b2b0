import math

import numpy as np
import pytest

from trapsim import spectral as sp
from trapsim.errors import PeakExtractionError, TrapSimError


def _tone(f0, dt, n, amplitude=1.0, phase=0.4):
    t = np.arange(n) * dt
    return amplitude * np.cos(2.0 * math.pi * f0 * t + phase)


def test_tone_recovery_clean():
    f0 = 1.234567e6
    dt = 1.0 / 40e6
    spec = sp.power_spectrum(_tone(f0, dt, 8192), dt)
    peak = sp.extract_secular_frequency(spec, (0.5e6, 2e6))
    assert peak.interpolated
    assert abs(peak.frequency - f0) < 0.1 * spec.bin_width


def test_tone_recovery_under_noise():
    # amplitude SNR 10 (20 dB power) white noise
    f0 = 0.8e6
    dt = 1.0 / 20e6
    n = 16384
    rng = np.random.default_rng(11)
    sig = _tone(f0, dt, n) + rng.normal(0.0, 1.0 / math.sqrt(2) / 10.0, n)
    spec = sp.power_spectrum(sig, dt)
    peak = sp.extract_secular_frequency(spec, (0.2e6, 2e6))
    assert abs(peak.frequency - f0) < 1e3


def test_parseval_identity():
    rng = np.random.default_rng(5)
    spec = sp.power_spectrum(rng.normal(size=4096), 1e-7)
    assert sp.parseval_defect(spec) < 1e-9


def test_spectrum_normalization_and_padding():
    dt = 1e-7
    spec = sp.power_spectrum(_tone(1e5, dt, 2000), dt)
    assert spec.power.max() == 1.0
    assert spec.n_fft == 4 * 2048      # next pow2 of 2000, padded 4x
    assert spec.nyquist == pytest.approx(0.5 / dt)


def test_min_samples_enforced():
    with pytest.raises(TrapSimError):
        sp.power_spectrum(np.ones(1023), 1e-7)
    with pytest.raises(TrapSimError):
        sp.power_spectrum(np.ones(2048), 0.0)


def test_dead_signal_spectrum():
    spec = sp.power_spectrum(np.zeros(2048), 1e-7)
    assert np.all(spec.power == 0.0)
    assert sp.parseval_defect(spec) == 0.0


def test_band_validation():
    dt = 1e-7
    spec = sp.power_spectrum(_tone(1e5, dt, 2048), dt)
    with pytest.raises(PeakExtractionError):
        sp.extract_secular_frequency(spec, (2e5, 1e5))
    with pytest.raises(PeakExtractionError):
        sp.extract_secular_frequency(spec, (0.0, 1e9))


def test_peak_on_band_edge_rejected():
    dt = 1e-7
    f0 = 1e5
    spec = sp.power_spectrum(_tone(f0, dt, 2048), dt)
    idx = int(np.argmax(spec.power))
    edge = float(spec.frequencies[idx])
    with pytest.raises(PeakExtractionError):
        sp.extract_secular_frequency(spec, (1e4, edge))


def test_dc_is_removed():
    dt = 1e-7
    sig = 5.0 + 0.01 * _tone(2e5, dt, 4096)
    spec = sp.power_spectrum(sig, dt)
    peak = sp.extract_secular_frequency(spec, (1e4, 1e6))
    assert abs(peak.frequency - 2e5) < spec.bin_width


def test_default_search_band():
    om = 2.0 * math.pi * 16e6
    lo, hi = sp.default_search_band(om)
    assert lo == 0.0
    assert hi == pytest.approx(4e6)
    with pytest.raises(TrapSimError):
        sp.default_search_band(0.0)


def test_axis_spectrum_matches_power_spectrum(ideal_q04):
    from trapsim import dynamics as dy
    from trapsim import mathieu as mt
    init = dy.initial_state_from_energy(0.02, mt.SR88)
    traj = dy.integrate_trajectory(init, ideal_q04, duration=2e-4)
    a = sp.axis_spectrum(traj, "z")
    b = sp.power_spectrum(traj.axis("z"), traj.dt_out)
    assert np.array_equal(a.power, b.power)


def test_export_spectrum_csv(tmp_path):
    dt = 1e-7
    spec = sp.power_spectrum(_tone(2e5, dt, 2048), dt)
    path = tmp_path / "spec.csv"
    sp.export_spectrum_csv(spec, path, max_frequency=1e6)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "frequency_hz,power_normalized"
    freqs = np.array([float(r.split(",")[0]) for r in lines[1:]])
    assert freqs.max() <= 1e6
    assert freqs.size == int((spec.frequencies <= 1e6).sum())
