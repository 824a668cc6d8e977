import csv
import hashlib
import json
import math
import re

import numpy as np
import pytest

from specsig.distributions import DistSpec, Family, theoretical_moments
from specsig.empirical import WeightedEmpirical
from specsig.fitting import DIVERGED, FitResult, rank_and_select
from specsig.pitch import BINS, hz_to_pitch, histogram
from specsig.reporting import (FIT_COLUMNS, MOMENT_COLUMNS, BookReport, emit_fit_table,
                               emit_histogram_svg, emit_moment_table, parse_svg_bars,
                               read_reports_json, write_reports_json, write_run_manifest)

BOOK2 = DistSpec(Family.EXPONENTIAL, 0.0007007909083517199, 114.52846083233646)
BOOK4_EXP = DistSpec(Family.EXPONENTIAL, 0.00024278816105826503, 111.43319977150223)
BOOK4_PAR = DistSpec(Family.PARETO, -2.384176737481692, 2.3844195256376968, 0.4717388601895959)


def result(spec, d, p, flag=None):
    return FitResult(spec, -5.0, converged=flag is None, error_flag=flag, ks_d=d, ks_p=p,
                     n_eff=1e8, cdf_deviation=0.0)


def report(book_id, fits, values=(100.0, 440.0, 3000.0), weights=(1.0, 2.0, 1.0)):
    emp = WeightedEmpirical(np.array(values), np.array(weights))
    return BookReport(book_id, rank_and_select(fits), histogram(emp), {"tracks": []})


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_book2_moment_row(tmp_path):
    r = report("book2", [result(BOOK2, 8.531262287569952e-05, 0.785822040345603)])
    emit_moment_table([r], tmp_path / "m.csv")
    rows = read_csv(tmp_path / "m.csv")
    assert tuple(rows[0]) == MOMENT_COLUMNS
    name, *vals = rows[1]
    assert name == "book2"
    expected = [79.3857805107, 114.5291616, 13116.7683406, 5.7408234, 2.0, 6.0]
    for got, want in zip(map(float, vals), expected):
        assert got == pytest.approx(want, rel=1e-8)


def test_empty_report_list_writes_nothing(tmp_path):
    with pytest.raises(ValueError):
        emit_moment_table([], tmp_path / "m.csv")
    with pytest.raises(ValueError):
        emit_fit_table([], tmp_path / "f.csv")
    assert not list(tmp_path.iterdir())


def test_moment_csv_parses_back(tmp_path):
    specs = [BOOK2, DistSpec(Family.EXPWEIBULL, 0.0006176602639155107, 8.883106480102926,
                             2.388182477333179, 0.40846064327782183),
             DistSpec(Family.PARETO, -2.5313693644133393, 2.5320219554920884,
                      0.5000772790696841)]
    reports = [report(f"b{i}", [result(s, 0.01, 0.5)]) for i, s in enumerate(specs)]
    emit_moment_table(reports, tmp_path / "m.csv")
    for row, r in zip(read_csv(tmp_path / "m.csv")[1:], reports):
        m = r.moments
        want = [m.median, m.mean, m.variance, m.entropy, m.skewness, m.excess_kurtosis]
        for got, w in zip(map(float, row[1:]), want):
            assert got == w or (math.isinf(w) and got == w)


def test_book4_fit_rows(tmp_path):
    d = 9.143090021945799e-05
    p = 0.7129222750411135
    r = report("book4", [result(BOOK4_PAR, d * (1 + 1e-15), p), result(BOOK4_EXP, d, p)])
    emit_fit_table([r], tmp_path / "f.csv")
    rows = read_csv(tmp_path / "f.csv")
    assert tuple(rows[0]) == FIT_COLUMNS
    col = {c: i for i, c in enumerate(FIT_COLUMNS)}
    assert [x[col["family"]] for x in rows[1:]] == ["exponential", "pareto"]
    assert rows[1][col["selected"]] == "true" and rows[2][col["selected"]] == "false"
    assert float(rows[1][col["d"]]) == d and float(rows[1][col["p"]]) == p
    assert float(rows[1][col["scale"]]) == BOOK4_EXP.scale


def test_second_best_reason_verbatim_and_constant_width(tmp_path):
    d = 8.810404621462098e-05
    pareto = DistSpec(Family.PARETO, -2.5313693644133393, 2.5320219554920884,
                      0.5000772790696841)
    ew = DistSpec(Family.EXPWEIBULL, 10.52751466016218, 1.0, 1.8078554913188745,
                  0.40464609484912933)
    r = report("book1", [result(pareto, d, 0.77, flag=DIVERGED), result(ew, d, 0.77),
                         result(BOOK2, 0.5, 0.0)])
    emit_fit_table([r, report("b2", [result(BOOK2, 0.1, 0.2)])], tmp_path / "f.csv")
    rows = read_csv(tmp_path / "f.csv")
    assert len({len(x) for x in rows}) == 1
    assert "SecondBestAfterError" in [x[FIT_COLUMNS.index("selection_reason")] for x in rows]


def svg_for(tmp_path, values, weights, spec=BOOK2):
    r = report("b", [result(spec, 0.01, 0.5)], values, weights)
    emit_histogram_svg(r, tmp_path / "h.svg")
    return r, (tmp_path / "h.svg").read_text()


def test_svg_has_nine_octave_lines(tmp_path):
    _, text = svg_for(tmp_path, (100.0, 440.0), (1.0, 1.0))
    assert len(re.findall(r"<line class=\"octave-line\"", text)) == 9
    import xml.etree.ElementTree as ET
    root = ET.fromstring(text)
    ns = "{http://www.w3.org/2000/svg}"
    assert len([e for e in root.iter(ns + "line") if e.get("class") == "octave-line"]) == 9
    assert len([e for e in root.iter(ns + "rect") if e.get("class") == "bar"]) == 108
    assert root.find(f".//{ns}polyline[@class='pdf-overlay']") is not None


def test_svg_tallest_bar_at_a4(tmp_path):
    _, text = svg_for(tmp_path, (440.0,), (1.0,))
    bars = re.findall(r'data-note="([^"]+)"[^>]*height="([^"]+)"', text)
    tallest = max(bars, key=lambda b: float(b[1]))
    assert tallest[0] == "A4"


def test_svg_bar_heights_sum_to_in_range_mass(tmp_path):
    rng = np.random.default_rng(3)
    values = np.unique(rng.uniform(5, 12000, 400))
    r, text = svg_for(tmp_path, values, rng.uniform(0, 1, values.size))
    y_scale = float(re.search(r'data-y-scale="([^"]+)"', text).group(1))
    heights = [float(h) for h in re.findall(r'class="bar"[^>]*height="([^"]+)"', text)]
    assert math.fsum(heights) / y_scale == pytest.approx(r.histogram.in_range_mass, abs=1e-9)
    bars = parse_svg_bars(text)
    assert list(bars) == [b.label for b in BINS]
    assert np.array_equal(np.array(list(bars.values())), r.histogram.rel_freq)


def test_outputs_are_deterministic(tmp_path):
    r = report("b", [result(BOOK2, 0.01, 0.5), result(BOOK4_PAR, 0.02, 0.4)])
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        emit_moment_table([r], d / "m.csv")
        emit_fit_table([r], d / "f.csv")
        emit_histogram_svg(r, d / "h.svg")
    for f in ("m.csv", "f.csv", "h.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_moments_rederive_from_serialized_specs(tmp_path):
    specs = [BOOK2, DistSpec(Family.LOGNORMAL, 1.0, 50.0, 0.8)]
    reports = [report(f"b{i}", [result(s, 0.01 * (i + 1), 0.5)]) for i, s in enumerate(specs)]
    write_reports_json(reports, tmp_path / "r.json")
    emit_moment_table(reports, tmp_path / "m.csv")
    again = read_reports_json(tmp_path / "r.json")
    for row, r in zip(read_csv(tmp_path / "m.csv")[1:], again):
        m = theoretical_moments(r.ranked.best.spec)
        assert [float(v) for v in row[1:]] == [m.median, m.mean, m.variance, m.entropy,
                                               m.skewness, m.excess_kurtosis]
    assert np.array_equal(again[0].histogram.rel_freq, reports[0].histogram.rel_freq)


def test_run_manifest(tmp_path):
    track = tmp_path / "t.wav"
    track.write_bytes(b"abc")
    write_run_manifest(tmp_path / "run.json", {"weighting": "magnitude"}, {"b": [track]})
    doc = json.loads((tmp_path / "run.json").read_text())
    assert doc["settings"] == {"weighting": "magnitude"}
    assert doc["inputs"]["b"][0]["sha256"] == hashlib.sha256(b"abc").hexdigest()


def test_moments_follow_selected_spec():
    d = 0.001
    r = report("b", [result(BOOK4_PAR, d, 0.5, flag=DIVERGED), result(BOOK4_EXP, d, 0.5)])
    assert r.ranked.best.spec == BOOK4_EXP
    assert r.moments == theoretical_moments(BOOK4_EXP)
    assert hz_to_pitch(440.0) in BINS
