"""Book-level orchestration: tracks -> spectra -> weighted empirical -> fits -> report."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .audio import BookManifest, load_wav
from .distributions import ALL_FAMILIES, Family
from .empirical import POOLINGS, WEIGHTINGS, WeightedEmpirical, from_spectra
from .errors import SignatureError
from .fitting import effective_n, fit_all, rank_and_select
from .pitch import histogram
from .reporting import BookReport
from .spectral import Spectrum, dft_real

log = logging.getLogger(__name__)


class TrackFailure(SignatureError):
    """Wraps an ingestion error with the book and track that caused it."""

    def __init__(self, book_id: str, path, cause: Exception):
        self.book_id, self.path, self.cause = book_id, Path(path), cause
        super().__init__(f"book {book_id!r}, track {Path(path).name}: {cause}")


@dataclass
class RunConfig:
    manifest_path: Path
    output_dir: Path
    weighting: str = "magnitude"
    track_pooling: str = "normalized"
    families: tuple[Family, ...] = ALL_FAMILIES
    seed: int | None = None
    workers: int = 1
    dump_spectra: bool = False

    def __post_init__(self):
        self.manifest_path = Path(self.manifest_path)
        self.output_dir = Path(self.output_dir)
        self.families = tuple(Family(f) for f in self.families)
        if not self.families:
            raise ValueError("at least one family is required")
        if len(set(self.families)) != len(self.families):
            raise ValueError("families must not repeat")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")
        if self.track_pooling not in POOLINGS:
            raise ValueError(f"pooling must be one of {POOLINGS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def settings(self) -> dict:
        return {"weighting": self.weighting, "pooling": self.track_pooling,
                "families": [f.value for f in self.families], "seed": self.seed,
                "transform": "whole-track real DFT, no window, no zero padding",
                "dc_bin": "dropped"}


@dataclass
class BookAnalysis:
    book_id: str
    tracks: list[Path]
    spectra: list[Spectrum]
    empirical: WeightedEmpirical
    provenance: dict = field(default_factory=dict)


def _track_spectrum(book_id: str, path: Path) -> Spectrum:
    try:
        return dft_real(load_wav(path, book_id=book_id))
    except SignatureError as exc:
        raise TrackFailure(book_id, path, exc) from exc


def analyze_book(book_id: str, paths: Sequence[Path], config: RunConfig,
                 pool: ThreadPoolExecutor | None = None) -> BookAnalysis:
    if pool is None:
        spectra = [_track_spectrum(book_id, p) for p in paths]
    else:
        spectra = list(pool.map(lambda p: _track_spectrum(book_id, p), paths))
    try:
        emp = from_spectra(spectra, weighting=config.weighting,
                           pooling=config.track_pooling)
    except SignatureError as exc:
        raise TrackFailure(book_id, paths[0], exc) from exc
    provenance = {
        "tracks": [str(p) for p in paths],
        "n_samples": [s.n_samples for s in spectra],
        "sample_rates": [s.sample_rate for s in spectra],
        "n_points": int(emp.size),
        "n_eff": effective_n(emp),
        "weighting": config.weighting,
        "pooling": config.track_pooling,
    }
    log.info("book %s: %d tracks, %d support points, n_eff=%.1f",
             book_id, len(paths), emp.size, provenance["n_eff"])
    return BookAnalysis(book_id, list(paths), spectra, emp, provenance)


def analyze(manifest: BookManifest, config: RunConfig) -> list[BookAnalysis]:
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            return [analyze_book(b, paths, config, pool) for b, paths in manifest.books.items()]
    return [analyze_book(b, paths, config) for b, paths in manifest.books.items()]


def fit_book(analysis: BookAnalysis, families: Sequence[Family] = ALL_FAMILIES) -> BookReport:
    ranked = rank_and_select(fit_all(analysis.empirical, families))
    return BookReport(analysis.book_id, ranked, histogram(analysis.empirical),
                      analysis.provenance)


def fit_books(analyses: Sequence[BookAnalysis], config: RunConfig) -> list[BookReport]:
    if config.workers > 1 and len(analyses) > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            return list(pool.map(lambda a: fit_book(a, config.families), analyses))
    return [fit_book(a, config.families) for a in analyses]
