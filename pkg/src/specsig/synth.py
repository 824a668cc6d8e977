"""Synthetic tracks whose spectral content follows a chosen distribution.

A track is a sum of ``n_partials`` equal-amplitude cosines. Partial
frequencies are ``target.quantile(u)`` rounded to the nearest DFT bin of the
track length, so the whole-track spectrum has no leakage. Each partial has a
random phase; a few clip-and-restore passes then lower the crest factor
(peak/RMS) so the partials sit well above the 16-bit quantization floor.

Random numbers come from SplitMix64 (Steele, Lea & Flood 2014)::

    state = (state + 0x9E3779B97F4A7C15) mod 2**64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    z = z ^ (z >> 31)
    u = ((z >> 11) + 0.5) / 2**53          # open interval (0, 1)

The generator is seeded with the unsigned 64-bit ``seed``. For partial ``i``
of ``n`` one draw ``u`` sets the frequency ``target.quantile((i + u) / n)``
(stratified, one partial per probability stratum) and the next sets the
phase ``2 pi u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import TrackAudio, write_wav  # noqa: F401  (write_wav is part of this API)
from .distributions import DistSpec
from .errors import InvalidSpec, NyquistViolation

MASK64 = (1 << 64) - 1
PEAK = 0.9
# crest-factor reduction: a lower peak/RMS ratio lifts the partials further
# above the 16-bit quantization floor once the track is written to WAV
CREST_ITERATIONS = 20
CLIP_FACTOR = 1.5


class SplitMix64:
    GOLDEN = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + self.GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return ((self.next_u64() >> 11) + 0.5) / 9007199254740992.0


@dataclass(frozen=True)
class SynthSpec:
    target: DistSpec
    n_partials: int = 5000
    duration_s: float = 30.0
    sample_rate: int = 44100
    seed: int = 0

    def __post_init__(self):
        if self.n_partials < 1:
            raise InvalidSpec("n_partials must be >= 1")
        if not self.duration_s > 0:
            raise InvalidSpec("duration_s must be positive")
        if self.sample_rate <= 0:
            raise InvalidSpec("sample_rate must be positive")
        if not 0 <= self.seed <= MASK64:
            raise InvalidSpec("seed must be an unsigned 64-bit integer")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate))


def draw_partials(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return (frequency_hz, phase) arrays for the partials, before bin rounding.

    Stratified quantile sampling keeps the sampling error of the partial
    distribution at O(1/n) rather than O(1/sqrt(n)).
    """
    rng = SplitMix64(spec.seed)
    freqs = np.empty(spec.n_partials)
    phases = np.empty(spec.n_partials)
    for i in range(spec.n_partials):
        freqs[i] = spec.target.quantile((i + rng.uniform()) / spec.n_partials)
        phases[i] = 2.0 * math.pi * rng.uniform()
    return freqs, phases


def _reduce_crest(spectrum: np.ndarray, occupied: np.ndarray, n: int,
                  iterations: int, clip: float = CLIP_FACTOR) -> np.ndarray:
    """Lower the peak-to-RMS ratio by alternating clip and magnitude restore.

    Only the phases of the occupied bins change; magnitudes stay fixed.
    """
    mags = np.abs(spectrum[occupied])
    for _ in range(iterations):
        x = np.fft.irfft(spectrum, n=n)
        limit = clip * np.sqrt(np.mean(x * x))
        y = np.fft.rfft(np.clip(x, -limit, limit))
        spectrum[occupied] = mags * np.exp(1j * np.angle(y[occupied]))
    return np.fft.irfft(spectrum, n=n)


def generate_track(spec: SynthSpec, track_id: str = "", book_id: str = "",
                   crest_iterations: int = CREST_ITERATIONS) -> TrackAudio:
    """Render the partials into a time signal with peak amplitude 0.9.

    Partials that round to the same bin share that bin's phase (the phase
    drawn by the first of them), so bin magnitude is proportional to the
    number of partials in it.
    """
    n = spec.n_samples
    fs = spec.sample_rate
    nyquist = fs / 2.0
    if spec.target.cdf(nyquist) < 0.5:
        raise NyquistViolation(
            f"more than half of the target mass lies above {nyquist} Hz")
    if n < 4:
        raise InvalidSpec("track too short")

    freqs, phases = draw_partials(spec)
    top_bin = (n - 1) // 2  # highest bin strictly below Nyquist
    bins = np.clip(np.rint(freqs * n / fs), 1, top_bin).astype(np.int64)
    occupied, first = np.unique(bins, return_index=True)
    counts = np.bincount(bins)[occupied]

    spectrum = np.zeros(n // 2 + 1, dtype=np.complex128)
    # irfft of (n/2) e^{i phi} at bin k is cos(2 pi k t / n + phi)
    spectrum[occupied] = counts * (n / 2.0) * np.exp(1j * phases[first])
    if occupied.size > 1 and crest_iterations > 0:
        signal = _reduce_crest(spectrum, occupied, n, crest_iterations)
    else:
        signal = np.fft.irfft(spectrum, n=n)
    peak = np.max(np.abs(signal))
    if peak > 0:
        signal *= PEAK / peak
    return TrackAudio(signal, fs, track_id=track_id, book_id=book_id)
