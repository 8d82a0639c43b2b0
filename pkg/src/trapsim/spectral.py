"""Power spectra of trajectory samples and secular-peak extraction.

A 1 ms record gives about 1 kHz of raw resolution, so peaks are refined
by parabolic interpolation of log power; together with Hann windowing
and 4x zero padding that recovers tone frequencies to well under a bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PeakExtractionError, TrapSimError

MIN_SAMPLES = 1024
ZERO_PAD_FACTOR = 4
WINDOW = "hann"

_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum, normalized so the maximum bin is 1.

    ``norm`` restores raw magnitude-squared values (raw = power * norm)
    and ``windowed_energy`` keeps the pre-FFT sum of squares so energy
    conservation stays checkable after normalization.
    """

    frequencies: np.ndarray
    power: np.ndarray
    sample_rate: float
    window: str
    norm: float
    n_fft: int
    windowed_energy: float

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    @property
    def nyquist(self) -> float:
        return 0.5 * self.sample_rate


@dataclass(frozen=True)
class SpectralPeak:
    frequency: float
    power: float
    interpolated: bool

    def __post_init__(self):
        if self.frequency < 0:
            raise TrapSimError("peak frequency must be non-negative")


def power_spectrum(samples, dt_out: float) -> Spectrum:
    """Mean-subtracted, Hann-windowed, zero-padded one-sided spectrum.

    Requires at least 1024 uniform samples at spacing ``dt_out``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_SAMPLES:
        raise TrapSimError(
            f"need at least {MIN_SAMPLES} samples, got {x.size}")
    if dt_out <= 0:
        raise TrapSimError("dt_out must be positive")
    x = x - x.mean()
    w = np.hanning(x.size)
    xw = x * w
    n_fft = ZERO_PAD_FACTOR * (1 << (x.size - 1).bit_length())
    raw = np.abs(np.fft.rfft(xw, n=n_fft)) ** 2
    norm = float(raw.max())
    if norm == 0.0:
        norm = 1.0   # dead signal: keep the all-zero spectrum
    freqs = np.fft.rfftfreq(n_fft, d=dt_out)
    return Spectrum(frequencies=freqs, power=raw / norm,
                    sample_rate=1.0 / dt_out, window=WINDOW, norm=norm,
                    n_fft=n_fft, windowed_energy=float(xw @ xw))


def parseval_defect(spectrum: Spectrum) -> float:
    """Relative mismatch between spectral and sample-domain energy.

    One-sided bins count twice except DC and Nyquist; zero for an exact
    FFT up to rounding.
    """
    weights = np.full(spectrum.power.size, 2.0)
    weights[0] = 1.0
    if spectrum.n_fft % 2 == 0:
        weights[-1] = 1.0
    spectral = float(weights @ spectrum.power) * spectrum.norm
    direct = spectrum.n_fft * spectrum.windowed_energy
    if direct == 0.0:
        return abs(spectral)
    return abs(spectral - direct) / direct


def extract_secular_frequency(spectrum: Spectrum,
                              band: tuple[float, float]) -> SpectralPeak:
    """Strongest peak in (f_lo, f_hi], parabolically refined.

    The refinement fits the three log-power values around the maximum
    bin.  A maximum sitting on either band edge is rejected since the
    true peak may lie outside.
    """
    f_lo, f_hi = band
    if not (0.0 <= f_lo < f_hi):
        raise PeakExtractionError(f"invalid band ({f_lo}, {f_hi}]")
    if f_hi > spectrum.nyquist:
        raise PeakExtractionError(
            f"band edge {f_hi:.4g} Hz beyond Nyquist {spectrum.nyquist:.4g} Hz")
    idx = np.nonzero((spectrum.frequencies > f_lo)
                     & (spectrum.frequencies <= f_hi))[0]
    if idx.size < 3:
        raise PeakExtractionError("band spans fewer than three bins")
    k = idx[np.argmax(spectrum.power[idx])]
    if k == idx[0] or k == idx[-1]:
        raise PeakExtractionError(
            f"peak on band edge at {spectrum.frequencies[k]:.6g} Hz")
    y = np.log(np.maximum(spectrum.power[k - 1:k + 2], _LOG_FLOOR))
    denom = y[0] - 2.0 * y[1] + y[2]
    if denom >= 0.0 or not math.isfinite(denom):
        # flat or degenerate neighborhood: report the raw bin
        return SpectralPeak(float(spectrum.frequencies[k]),
                            float(spectrum.power[k]), False)
    shift = 0.5 * (y[0] - y[2]) / denom
    shift = float(np.clip(shift, -0.5, 0.5))
    freq = float(spectrum.frequencies[k] + shift * spectrum.bin_width)
    return SpectralPeak(freq, float(spectrum.power[k]), True)


def default_search_band(rf_omega: float) -> tuple[float, float]:
    """Secular peaks live well below the drive: search (0, f_rf/4]."""
    if rf_omega <= 0:
        raise TrapSimError("rf_omega must be positive")
    return (0.0, rf_omega / (2.0 * math.pi) / 4.0)


def axis_spectrum(trajectory, axis: str) -> Spectrum:
    """Spectrum of one position component of a Trajectory."""
    return power_spectrum(trajectory.axis(axis), trajectory.dt_out)


def export_spectrum_csv(spectrum: Spectrum, path,
                        max_frequency: float | None = None) -> None:
    """CSV with header frequency_hz,power_normalized."""
    f = spectrum.frequencies
    p = spectrum.power
    if max_frequency is not None:
        keep = f <= max_frequency
        f, p = f[keep], p[keep]
    np.savetxt(path, np.column_stack([f, p]), delimiter=",",
               header="frequency_hz,power_normalized", comments="")
