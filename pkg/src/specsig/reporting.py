"""Moment table, fit table, pitch histogram plot and run manifest."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .distributions import Moments, theoretical_moments
from .fitting import RankedFits
from .pitch import BINS, EDGES, PitchHistogram, octave_lines

MOMENT_COLUMNS = ("Name", "Median", "Mean", "Variance", "Entropy", "Skew", "Kurtosis")
FIT_COLUMNS = ("Name", "rank", "family", "shape1", "shape2", "loc", "scale", "d", "p",
               "n_eff", "log_likelihood", "converged", "error_flag",
               "selection_reason", "selected")


@dataclass(frozen=True, eq=False)
class BookReport:
    book_id: str
    ranked: RankedFits
    histogram: PitchHistogram
    provenance: dict = field(default_factory=dict)

    @property
    def moments(self) -> Moments:
        # always derived from the selected spec, never stored
        return theoretical_moments(self.ranked.best.spec)

    def as_dict(self) -> dict:
        return {"book_id": self.book_id, "ranked": self.ranked.as_dict(),
                "histogram": self.histogram.as_dict(), "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> "BookReport":
        return cls(d["book_id"], RankedFits.from_dict(d["ranked"]),
                   PitchHistogram.from_dict(d["histogram"]), d.get("provenance", {}))


def fmt(x) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def moment_rows(reports: Sequence[BookReport]) -> list[list[str]]:
    rows = []
    for r in reports:
        m = r.moments
        rows.append([r.book_id] + [fmt(v) for v in (m.median, m.mean, m.variance,
                                                      m.entropy, m.skewness,
                                                      m.excess_kurtosis)])
    return rows


def emit_moment_table(reports: Sequence[BookReport], out) -> None:
    """One row per book with the selected distribution's theoretical moments."""
    if not reports:
        raise ValueError("no reports to write")
    rows = moment_rows(reports)
    with open(out, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(MOMENT_COLUMNS)
        w.writerows(rows)


def fit_rows(reports: Sequence[BookReport], top: int = 2) -> list[list[str]]:
    rows = []
    for r in reports:
        ranked = r.ranked
        shown = list(range(min(top, len(ranked.fits))))
        if ranked.selected not in shown:
            shown.append(ranked.selected)
        for i in shown:
            f = ranked.fits[i]
            s = f.spec
            rows.append([r.book_id, str(i + 1), s.family.value, fmt(s.shape1),
                         fmt(s.shape2), fmt(s.loc), fmt(s.scale), fmt(f.ks_d),
                         fmt(f.ks_p), fmt(f.n_eff), fmt(f.log_likelihood),
                         fmt(f.converged), f.error_flag or "",
                         ranked.selection_reason.value if i == ranked.selected else "",
                         fmt(i == ranked.selected)])
    return rows


def emit_fit_table(reports: Sequence[BookReport], out, top: int = 2) -> None:
    """Best and second-best candidate per book with parameters and KS (d, p)."""
    if not reports:
        raise ValueError("no reports to write")
    rows = fit_rows(reports, top)
    with open(out, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(FIT_COLUMNS)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# SVG

SVG_W, SVG_H = 960, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 30, 50


def _num(x: float) -> str:
    return repr(float(x))


def emit_histogram_svg(report: BookReport, out) -> None:
    """Relative frequency per pitch bin on a log-frequency axis.

    Draws one bar per semitone bin C0..B8, a vertical line at each C0..C8
    center, and the selected distribution's probability mass per bin as a
    polyline. Bars carry their exact value in ``data-rel-freq``; the root
    element carries ``data-y-scale`` (pixels per unit of relative frequency).
    """
    hist = report.histogram
    if len(hist.rel_freq) == 0:
        raise ValueError("empty histogram")
    spec = report.ranked.best.spec
    edge_cdf = np.asarray(spec.cdf(EDGES), dtype=np.float64)
    model_mass = np.diff(edge_cdf)

    plot_w = SVG_W - MARGIN_L - MARGIN_R
    plot_h = SVG_H - MARGIN_T - MARGIN_B
    log_lo, log_hi = math.log2(EDGES[0]), math.log2(EDGES[-1])
    base_y = MARGIN_T + plot_h

    def xpos(hz):
        return MARGIN_L + (math.log2(hz) - log_lo) / (log_hi - log_lo) * plot_w

    top = max(float(np.max(hist.rel_freq)), float(np.max(model_mass)), 1e-300)
    y_scale = plot_h / top

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}" data-y-scale="{_num(y_scale)}" '
        f'data-book="{escape(report.book_id)}">',
        f'<title>{escape(report.book_id)}: relative frequencies of the spectrum</title>',
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<path class="axis" d="M{MARGIN_L},{MARGIN_T} V{base_y} H{MARGIN_L + plot_w}" '
        'stroke="black" fill="none"/>',
        '<g class="bars" fill="#4c72b0">',
    ]
    for b, rel in zip(BINS, hist.rel_freq.tolist()):
        x0, x1 = xpos(b.lo_hz), xpos(b.hi_hz)
        h = rel * y_scale
        parts.append(
            f'<rect class="bar" data-note="{b.label}" data-rel-freq="{_num(rel)}" '
            f'x="{x0:.3f}" y="{_num(base_y - h)}" width="{x1 - x0:.3f}" '
            f'height="{_num(h)}"/>')
    parts.append("</g>")

    parts.append('<g class="octave-grid" stroke="#888" stroke-dasharray="4,3">')
    for k, hz in enumerate(octave_lines()):
        x = xpos(hz)
        parts.append(f'<line class="octave-line" data-hz="{_num(hz)}" x1="{x:.3f}" '
                     f'y1="{MARGIN_T}" x2="{x:.3f}" y2="{base_y}"/>')
        parts.append(f'<text x="{x:.3f}" y="{base_y + 16}" font-size="11" '
                     f'text-anchor="middle">C{k}</text>')
    parts.append("</g>")

    points = " ".join(f"{xpos(b.center_hz):.3f},{base_y - m * y_scale:.3f}"
                      for b, m in zip(BINS, model_mass.tolist()))
    parts.append(f'<polyline class="pdf-overlay" data-family="{spec.family.value}" '
                 f'points="{points}" fill="none" stroke="#c44e52" stroke-width="1.5"/>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{SVG_H - 8}" font-size="12" '
                 'text-anchor="middle">frequency (scientific pitch notation)</text>')
    parts.append(f'<text x="14" y="{MARGIN_T + plot_h / 2:.1f}" font-size="12" '
                 f'transform="rotate(-90 14 {MARGIN_T + plot_h / 2:.1f})" '
                 'text-anchor="middle">relative frequency</text>')
    parts.append(f'<text x="{SVG_W - MARGIN_R}" y="{MARGIN_T - 10}" font-size="11" '
                 f'text-anchor="end">below C0: {hist.below_c0:.4g}  above B8: '
                 f'{hist.above_b8:.4g}</text>')
    parts.append("</svg>")
    Path(out).write_text("\n".join(parts) + "\n", encoding="utf-8")


_BAR_RE = re.compile(r'<rect class="bar" data-note="([^"]+)" data-rel-freq="([^"]+)"')


def parse_svg_bars(text: str) -> dict[str, float]:
    return {note: float(v) for note, v in _BAR_RE.findall(text)}


# ---------------------------------------------------------------------------
# run manifest


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_run_manifest(path, settings: dict, inputs: dict[str, list]) -> None:
    """Pipeline settings and the SHA-256 of every input track."""
    doc = {"settings": settings,
           "inputs": {book: [{"path": str(p), "sha256": sha256_file(p)} for p in paths]
                      for book, paths in inputs.items()}}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def write_reports_json(reports: Sequence[BookReport], path) -> None:
    doc = [r.as_dict() for r in reports]
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_reports_json(path) -> list[BookReport]:
    return [BookReport.from_dict(d) for d in json.loads(Path(path).read_text())]
