"""Spectral estimation: Hann window, FFT wrappers, Welch PSD, band power.

The PSD is one-sided with density scaling 1/(fs * sum(w^2)) and doubled
interior bins, so the trapezoidal integral over frequency approximates the
signal variance (testable via Parseval).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

# Conventional EEG band edges in Hz.
BANDS = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 13.0),
    "beta": (13.0, 30.0),
    "gamma": (30.0, 80.0),
}


@dataclass
class PsdEstimate:
    """Frequency grid plus averaged power density from Welch's method."""

    freqs: np.ndarray  # Hz, length nfft//2 + 1
    power: np.ndarray  # units^2/Hz
    nfft: int
    fs: float
    segments: int

    def to_rows(self):
        return list(zip(self.freqs.tolist(), self.power.tolist()))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["freq_hz", "power"])
            for row in self.to_rows():
                w.writerow([repr(row[0]), repr(row[1])])

    def to_json(self) -> dict:
        return {
            "fs": self.fs,
            "nfft": self.nfft,
            "segments": self.segments,
            "freq_hz": self.freqs.tolist(),
            "power": self.power.tolist(),
        }


def hann_window(n: int) -> np.ndarray:
    """Symmetric raised-cosine window w[k] = 0.5*(1 - cos(2*pi*k/(n-1)))."""
    if n < 2:
        raise ValueError(f"window length must be >= 2, got {n}")
    k = np.arange(n, dtype=np.float64)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n - 1)))


def _check_pow2(n: int) -> None:
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"FFT length must be a power of two, got {n}")


def fft(x) -> np.ndarray:
    """DFT X[k] = sum_n x[n] exp(-2i*pi*k*n/N) for power-of-two N (last axis)."""
    x = np.asarray(x, dtype=np.complex128)
    _check_pow2(x.shape[-1])
    return np.fft.fft(x, axis=-1)


def ifft(x) -> np.ndarray:
    """Inverse DFT for power-of-two lengths (last axis)."""
    x = np.asarray(x, dtype=np.complex128)
    _check_pow2(x.shape[-1])
    return np.fft.ifft(x, axis=-1)


def _welch_matrix(signals: np.ndarray, fs: float, nperseg: int, overlap: float) -> tuple[np.ndarray, int]:
    """Averaged one-sided periodograms for each row of a [rows, L] matrix."""
    rows, length = signals.shape
    if length < nperseg:
        raise ValueError(f"signal length {length} is shorter than one segment ({nperseg})")
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must lie in [0, 1), got {overlap}")
    hop = max(int(nperseg * (1.0 - overlap)), 1)
    n_seg = 1 + (length - nperseg) // hop  # trailing partial segment dropped
    window = hann_window(nperseg)
    scale = 1.0 / (fs * np.sum(window * window))

    starts = np.arange(n_seg) * hop
    idx = starts[:, None] + np.arange(nperseg)[None, :]
    segs = signals[:, idx] * window  # [rows, n_seg, nperseg]
    spec = fft(segs)[..., : nperseg // 2 + 1]
    psd = (spec.real ** 2 + spec.imag ** 2) * scale
    psd[..., 1:-1] *= 2.0  # fold negative frequencies into interior bins
    return psd.mean(axis=1), n_seg


def welch_psd(signal, fs: float = 160.0, nperseg: int = 256, overlap: float = 0.5) -> PsdEstimate:
    """Welch's averaged periodogram of one signal vector."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1:
        raise ValueError(f"welch_psd expects a 1-D signal, got shape {signal.shape}")
    power, n_seg = _welch_matrix(signal[None, :], fs, nperseg, overlap)
    freqs = np.arange(nperseg // 2 + 1) * (fs / nperseg)
    return PsdEstimate(freqs=freqs, power=power[0], nfft=nperseg, fs=fs, segments=n_seg)


def dataset_psd(signals, fs: float = 160.0, nperseg: int = 256, overlap: float = 0.5) -> PsdEstimate:
    """Mean Welch PSD over every sample and channel of a [N, C, L] array."""
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim != 3:
        raise ValueError(f"dataset_psd expects [samples, channels, length], got {signals.shape}")
    if signals.shape[0] == 0:
        raise ValueError("dataset_psd got an empty dataset")
    n, c, length = signals.shape
    power, n_seg = _welch_matrix(signals.reshape(n * c, length), fs, nperseg, overlap)
    freqs = np.arange(nperseg // 2 + 1) * (fs / nperseg)
    return PsdEstimate(freqs=freqs, power=power.mean(axis=0), nfft=nperseg, fs=fs,
                       segments=n_seg)


def band_power(psd: PsdEstimate, lo_hz: float, hi_hz: float) -> float:
    """Trapezoidal integral of the PSD over [lo_hz, hi_hz]."""
    if not 0.0 <= lo_hz < hi_hz <= psd.fs / 2.0 + 1e-12:
        raise ValueError(f"band [{lo_hz}, {hi_hz}] is not a valid sub-band of [0, {psd.fs / 2}]")
    freqs, power = psd.freqs, psd.power
    grid = [lo_hz] + [f for f in freqs if lo_hz < f < hi_hz] + [hi_hz]
    values = np.interp(grid, freqs, power)
    return float(np.trapezoid(values, grid))


def band_power_table(psd: PsdEstimate, bands: dict[str, tuple[float, float]] = BANDS) -> dict[str, float]:
    nyq = psd.fs / 2.0
    return {name: band_power(psd, lo, min(hi, nyq)) for name, (lo, hi) in bands.items() if lo < nyq}


def write_band_report(path, per_band: dict[str, float]) -> None:
    with open(path, "w") as f:
        json.dump(per_band, f, indent=2, sort_keys=True)
        f.write("\n")
