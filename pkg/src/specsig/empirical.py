"""Magnitude-weighted empirical distributions over frequency."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (AllZeroMagnitudes, DegenerateDistribution, EmptyInput,
                     QOutOfRange)
from .spectral import Spectrum

WEIGHTINGS = ("magnitude", "power")
POOLINGS = ("normalized", "raw")


@dataclass(frozen=True, eq=False)
class WeightedEmpirical:
    """Strictly ascending support points with non-negative weights."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if values.ndim != 1 or values.shape != weights.shape or values.size == 0:
            raise EmptyInput("values and weights must be equal-length, non-empty 1-D arrays")
        if np.any(np.diff(values) <= 0):
            raise ValueError("values must be strictly increasing")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        if not weights.sum() > 0:
            raise EmptyInput("total weight must be positive")
        values.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        cum = np.cumsum(weights)
        cum.flags.writeable = False
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def from_samples(cls, samples, weights=None) -> "WeightedEmpirical":
        """Merge duplicate sample values, summing their weights."""
        samples = np.asarray(samples, dtype=np.float64).ravel()
        if weights is None:
            weights = np.ones_like(samples)
        return _merge(samples, np.asarray(weights, dtype=np.float64).ravel())

    @property
    def total_weight(self) -> float:
        return float(self._cum[-1])

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.total_weight

    def cumulative(self) -> np.ndarray:
        """ECDF evaluated at each support point; the last entry is exactly 1."""
        cdf = self._cum / self._cum[-1]
        cdf[-1] = 1.0
        return cdf

    def positive_support(self) -> np.ndarray:
        return self.values[self.weights > 0]


def _merge(values: np.ndarray, weights: np.ndarray) -> WeightedEmpirical:
    if values.size == 0:
        raise EmptyInput("no points to merge")
    keep = weights > 0
    values, weights = values[keep], weights[keep]
    if values.size == 0:
        raise EmptyInput("all weights are zero")
    # sorting on (value, weight) makes the summation order independent of input order
    order = np.lexsort((weights, values))
    values, weights = values[order], weights[order]
    starts = np.flatnonzero(np.r_[True, values[1:] != values[:-1]])
    return WeightedEmpirical(values[starts], np.add.reduceat(weights, starts))


def from_spectra(spectra: Sequence[Spectrum], weighting: str = "magnitude",
                 pooling: str = "normalized") -> WeightedEmpirical:
    """Pool the non-DC bins of several spectra into one weighted distribution.

    With ``pooling="normalized"`` each track carries equal total mass;
    ``"raw"`` pools the weights as they are. ``weighting="power"`` uses
    squared magnitudes.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}")
    if pooling not in POOLINGS:
        raise ValueError(f"pooling must be one of {POOLINGS}")
    if not spectra:
        raise EmptyInput("no spectra given")

    all_values, all_weights = [], []
    for spec in spectra:
        if len(spec.freqs) < 2:
            raise EmptyInput(f"spectrum {spec.track_id!r} has fewer than 2 bins")
        mags = np.asarray(spec.mags[1:], dtype=np.float64)
        w = mags * mags if weighting == "power" else mags.copy()
        total = math.fsum(w)
        if not total > 0:
            raise AllZeroMagnitudes(f"track {spec.track_id!r} has no non-DC energy")
        if pooling == "normalized":
            w = w / total
        all_values.append(np.asarray(spec.freqs[1:], dtype=np.float64))
        all_weights.append(w)

    merged = _merge(np.concatenate(all_values), np.concatenate(all_weights))
    return WeightedEmpirical(merged.values, merged.weights / merged.total_weight)


def ecdf_at(emp: WeightedEmpirical, x):
    """Right-continuous weighted ECDF."""
    idx = np.searchsorted(emp.values, x, side="right")
    cdf = np.r_[0.0, emp.cumulative()]
    out = cdf[idx]
    return float(out) if np.ndim(out) == 0 else out


def weighted_quantile(emp: WeightedEmpirical, q: float) -> float:
    """Smallest support value whose ECDF reaches ``q``."""
    if not 0.0 <= q <= 1.0:
        raise QOutOfRange(f"q must be in [0, 1], got {q}")
    # compare raw cumulative weights against q*W: integer weights then behave
    # exactly like counts on the replicated sample
    target = q * emp.total_weight
    idx = int(np.searchsorted(emp._cum, target, side="left"))
    return float(emp.values[min(idx, emp.size - 1)])


class EmpiricalMoments(NamedTuple):
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float


def weighted_moments(emp: WeightedEmpirical) -> EmpiricalMoments:
    """Weighted central moments, weights taken as probabilities (no bias correction).

    Raises DegenerateDistribution when only one support point carries weight.
    """
    x, w = emp.values, emp.weights
    total = math.fsum(w)
    mean = math.fsum(w * x) / total
    d = x - mean
    d2 = d * d
    m2 = math.fsum(w * d2) / total
    if np.count_nonzero(w) < 2 or m2 == 0.0:
        raise DegenerateDistribution(
            "a single support point has zero variance; skew and kurtosis are undefined")
    m3 = math.fsum(w * d2 * d) / total
    m4 = math.fsum(w * d2 * d2) / total
    return EmpiricalMoments(mean, m2, m3 / m2 ** 1.5, m4 / (m2 * m2) - 3.0)


def write_empirical_csv(emp: WeightedEmpirical, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["freq_hz", "weight"])
        for v, w in zip(emp.values.tolist(), emp.probabilities.tolist()):
            writer.writerow([repr(v), repr(w)])
