"""Whole-track magnitude spectra.

One transform per track, no framing and no window. ``naive_dft`` evaluates
the defining sum directly and is kept as a verification oracle.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .audio import TrackAudio
from .errors import EmptySignal


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided magnitude spectrum, bin k at ``k * sample_rate / n_samples`` Hz."""

    freqs: np.ndarray
    mags: np.ndarray
    sample_rate: int
    n_samples: int
    track_id: str = ""

    def __post_init__(self):
        expected = self.n_samples // 2 + 1
        if len(self.freqs) != expected or len(self.mags) != expected:
            raise ValueError(
                f"spectrum of {self.n_samples} samples must have {expected} bins")

    @property
    def bin_width(self) -> float:
        return self.sample_rate / self.n_samples


def bin_frequencies(n_samples: int, sample_rate: float) -> np.ndarray:
    return np.arange(n_samples // 2 + 1) * (sample_rate / n_samples)


def dft_real(track: TrackAudio) -> Spectrum:
    """Magnitude of the real-input DFT over the entire track."""
    x = np.asarray(track.samples, dtype=np.float64)
    if x.size == 0:
        raise EmptySignal("cannot transform an empty signal")
    mags = np.abs(np.fft.rfft(x))
    return Spectrum(bin_frequencies(x.size, track.sample_rate), mags,
                    track.sample_rate, x.size, track.track_id)


def naive_dft(samples) -> np.ndarray:
    """Two-sided DFT by direct O(N^2) summation. Test oracle, N <= 4096."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if n == 0:
        raise EmptySignal("cannot transform an empty signal")
    k = np.arange(n)
    # reduce kn mod N before scaling so the phase stays exact for large k*n
    phase = -2.0 * np.pi * (np.outer(k, k) % n) / n
    return np.exp(1j * phase) @ x


def write_spectrum_csv(spectrum: Spectrum, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["freq_hz", "magnitude"])
        for f, m in zip(spectrum.freqs.tolist(), spectrum.mags.tolist()):
            writer.writerow([repr(f), repr(m)])
