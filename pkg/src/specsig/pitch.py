"""Scientific pitch notation bins (C0..B8, equal temperament, A4 = 440 Hz)."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .empirical import WeightedEmpirical
from .errors import NonPositiveFrequency

A4_HZ = 440.0
A4_MIDI = 69
NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
N_OCTAVES = 9
FIRST_MIDI = 12  # C0
LAST_MIDI = FIRST_MIDI + 12 * N_OCTAVES - 1  # B8


@dataclass(frozen=True)
class PitchBin:
    note: str
    octave: int
    center_hz: float
    lo_hz: float
    hi_hz: float

    @property
    def label(self) -> str:
        return f"{self.note}{self.octave}"

    @property
    def midi(self) -> int:
        return FIRST_MIDI + 12 * self.octave + NOTE_NAMES.index(self.note)


class OutOfRange(NamedTuple):
    side: str  # "below" or "above"
    hz: float


def _build_table():
    # one octave computed from A4, later octaves by exact doubling, so that
    # every edge and center in octave k+1 is exactly twice octave k
    semis = np.arange(FIRST_MIDI, FIRST_MIDI + 12)
    centers0 = A4_HZ * 2.0 ** ((semis - A4_MIDI) / 12.0)
    lows0 = A4_HZ * 2.0 ** ((semis - A4_MIDI - 0.5) / 12.0)
    octave_factor = 2.0 ** np.arange(N_OCTAVES)
    centers = (octave_factor[:, None] * centers0[None, :]).ravel()
    lows = (octave_factor[:, None] * lows0[None, :]).ravel()
    top = lows0[0] * 2.0 ** N_OCTAVES
    edges = np.r_[lows, top]
    bins = tuple(
        PitchBin(NOTE_NAMES[i % 12], i // 12, float(centers[i]), float(edges[i]),
                 float(edges[i + 1]))
        for i in range(12 * N_OCTAVES))
    return bins, edges


BINS, EDGES = _build_table()
EDGES.flags.writeable = False


def pitch_bins() -> tuple[PitchBin, ...]:
    return BINS


def hz_to_pitch(f: float) -> PitchBin | OutOfRange:
    """Nearest equal-tempered semitone, bins half-open at +-50 cents."""
    if not f > 0:
        raise NonPositiveFrequency(f"frequency must be positive, got {f}")
    idx = int(np.searchsorted(EDGES, f, side="right")) - 1
    if idx < 0:
        return OutOfRange("below", f)
    if idx >= len(BINS):
        return OutOfRange("above", f)
    return BINS[idx]


def semitone_index(f: float) -> int:
    """MIDI-style note number, round half up."""
    if not f > 0:
        raise NonPositiveFrequency(f"frequency must be positive, got {f}")
    return math.floor(12.0 * math.log2(f / A4_HZ) + A4_MIDI + 0.5)


def octave_lines() -> list[float]:
    """Centers of C0..C8."""
    c0 = BINS[0].center_hz
    return [c0 * 2.0 ** k for k in range(N_OCTAVES)]


@dataclass(frozen=True, eq=False)
class PitchHistogram:
    bins: tuple[PitchBin, ...]
    rel_freq: np.ndarray
    below_c0: float
    above_b8: float

    @property
    def in_range_mass(self) -> float:
        return float(math.fsum(self.rel_freq))

    def as_dict(self) -> dict:
        return {"rel_freq": self.rel_freq.tolist(), "below_c0": self.below_c0,
                "above_b8": self.above_b8}

    @classmethod
    def from_dict(cls, d: dict) -> "PitchHistogram":
        return cls(BINS, np.asarray(d["rel_freq"], dtype=np.float64),
                   float(d["below_c0"]), float(d["above_b8"]))


def histogram(emp: WeightedEmpirical) -> PitchHistogram:
    """Relative weight falling in each semitone bin, plus out-of-range tallies."""
    idx = np.searchsorted(EDGES, emp.values, side="right") - 1
    p = emp.probabilities
    below = idx < 0
    above = idx >= len(BINS)
    inside = ~(below | above)
    rel = np.bincount(idx[inside], weights=p[inside], minlength=len(BINS)).astype(np.float64)
    below_mass = float(math.fsum(p[below]))
    above_mass = float(math.fsum(p[above]))
    # absorb summation round-off so the three parts add to one
    total = math.fsum(rel) + below_mass + above_mass
    return PitchHistogram(BINS, rel / total, below_mass / total, above_mass / total)


def write_histogram_csv(hist: PitchHistogram, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["note", "octave", "center_hz", "rel_freq"])
        for b, r in zip(hist.bins, hist.rel_freq.tolist()):
            writer.writerow([b.note, b.octave, repr(b.center_hz), repr(r)])
        writer.writerow(["below_C0", "", "", repr(hist.below_c0)])
        writer.writerow(["above_B8", "", "", repr(hist.above_b8)])
