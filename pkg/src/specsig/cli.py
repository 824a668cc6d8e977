"""Command-line entry point: ``specsig {run,analyze,fit,report,synth}``.

Exit status: 0 success, 2 configuration or manifest error, 3 ingestion
error, 4 no usable fit for some book.
"""
from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path

from .audio import load_manifest, write_manifest, write_wav
from .distributions import ALL_FAMILIES, DistSpec, Family
from .empirical import write_empirical_csv
from .errors import (DegenerateInput, IngestError, InvalidSpec, ManifestError,
                     NoUsableFit, NyquistViolation, SignatureError)
from .pipeline import RunConfig, TrackFailure, analyze, fit_books
from .pitch import histogram, write_histogram_csv
from .reporting import (emit_fit_table, emit_histogram_svg, emit_moment_table,
                        read_reports_json, write_reports_json, write_run_manifest)
from .spectral import write_spectrum_csv
from .synth import SynthSpec, generate_track

log = logging.getLogger("specsig")

EXIT_OK, EXIT_CONFIG, EXIT_INGEST, EXIT_NO_FIT = 0, 2, 3, 4


class ConfigError(Exception):
    pass


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def _families(text: str | None) -> tuple[Family, ...]:
    if not text:
        return ALL_FAMILIES
    try:
        return tuple(Family.parse(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _config(args) -> RunConfig:
    try:
        return RunConfig(manifest_path=args.manifest, output_dir=args.out,
                         weighting=args.weighting, track_pooling=args.pooling,
                         families=_families(getattr(args, "families", None)),
                         seed=args.seed, workers=args.workers,
                         dump_spectra=getattr(args, "dump_spectra", False))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _prepare_out(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from exc


def _write_analysis(analyses, config: RunConfig) -> None:
    out = config.output_dir
    for a in analyses:
        stem = _safe(a.book_id)
        write_empirical_csv(a.empirical, out / f"empirical_{stem}.csv")
        write_histogram_csv(histogram(a.empirical), out / f"histogram_{stem}.csv")
        if config.dump_spectra:
            sdir = out / "spectra" / stem
            sdir.mkdir(parents=True, exist_ok=True)
            for path, spec in zip(a.tracks, a.spectra):
                write_spectrum_csv(spec, sdir / f"{_safe(path.stem)}.csv")


def _write_reports(reports, out: Path) -> None:
    emit_moment_table(reports, out / "moments.csv")
    emit_fit_table(reports, out / "fits.csv")
    for r in reports:
        stem = _safe(r.book_id)
        write_histogram_csv(r.histogram, out / f"histogram_{stem}.csv")
        emit_histogram_svg(r, out / f"histogram_{stem}.svg")


def cmd_analyze(args) -> int:
    config = _config(args)
    manifest = load_manifest(config.manifest_path)
    analyses = analyze(manifest, config)
    _prepare_out(config.output_dir)
    _write_analysis(analyses, config)
    return EXIT_OK


def _fit_pipeline(args):
    config = _config(args)
    manifest = load_manifest(config.manifest_path)
    analyses = analyze(manifest, config)
    reports = fit_books(analyses, config)
    return config, manifest, analyses, reports


def cmd_fit(args) -> int:
    config, manifest, _, reports = _fit_pipeline(args)
    _prepare_out(config.output_dir)
    write_reports_json(reports, config.output_dir / "book_reports.json")
    emit_fit_table(reports, config.output_dir / "fits.csv")
    write_run_manifest(config.output_dir / "run_manifest.json", config.settings(),
                       manifest.books)
    return EXIT_OK


def cmd_report(args) -> int:
    src = Path(args.reports)
    if not src.is_file():
        raise ConfigError(f"no such reports file: {src}")
    reports = read_reports_json(src)
    out = Path(args.out)
    _prepare_out(out)
    _write_reports(reports, out)
    return EXIT_OK


def cmd_run(args) -> int:
    config, manifest, analyses, reports = _fit_pipeline(args)
    _prepare_out(config.output_dir)
    if config.dump_spectra:
        _write_analysis(analyses, config)
    write_reports_json(reports, config.output_dir / "book_reports.json")
    _write_reports(reports, config.output_dir)
    write_run_manifest(config.output_dir / "run_manifest.json", config.settings(),
                       manifest.books)
    for r in reports:
        best = r.ranked.best
        log.info("%s: %s (%s) d=%.6g p=%.6g", r.book_id, best.family.value,
                 r.ranked.selection_reason.value, best.ks_d, best.ks_p)
    return EXIT_OK


SYNTH_KEYS = ("family", "loc", "scale", "shape1", "shape2", "n_partials",
              "duration_s", "sample_rate", "seed")


def _synth_params(args) -> dict:
    params = {"family": args.family, "loc": args.loc, "scale": args.scale,
              "shape1": args.shape1, "shape2": args.shape2,
              "n_partials": args.n_partials, "duration_s": args.duration,
              "sample_rate": args.sample_rate, "seed": args.seed or 0}
    return {k: v for k, v in params.items() if v is not None}


def _synth_spec(params: dict, seed: int) -> SynthSpec:
    unknown = set(params) - set(SYNTH_KEYS)
    if unknown:
        raise ConfigError(f"unknown synth keys: {', '.join(sorted(unknown))}")
    try:
        target = DistSpec(Family.parse(str(params.get("family", "exponential"))),
                          float(params.get("loc", 0.0)), float(params.get("scale", 100.0)),
                          params.get("shape1"), params.get("shape2"))
        return SynthSpec(target, int(params.get("n_partials", 5000)),
                         float(params.get("duration_s", 30.0)),
                         int(params.get("sample_rate", 44100)), seed)
    except (InvalidSpec, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid synth parameters: {exc}") from exc


def cmd_synth(args) -> int:
    """Generate tracks either from flags or from a manifest's [synth] table.

    Track i (counting across books in manifest order) uses seed + i.
    """
    if args.manifest:
        manifest = load_manifest(args.manifest)
        params = dict(manifest.synth)
        params.update(_synth_params(args) if args.override else {})
        if not params:
            raise ConfigError(f"{args.manifest} has no [synth] table")
        books = manifest.books
    else:
        if not args.out:
            raise ConfigError("synth needs --out or --manifest")
        params = _synth_params(args)
        out = Path(args.out)
        _prepare_out(out)
        books = {f"{args.book_prefix}{b + 1}": [out / f"{args.book_prefix}{b + 1}" /
                                               f"track{t + 1:02d}.wav"
                                               for t in range(args.tracks)]
                 for b in range(args.books)}
    base_seed = int(params.get("seed", 0))
    ordinal = 0
    for book_id, paths in books.items():
        for path in paths:
            spec = _synth_spec(params, base_seed + ordinal)
            ordinal += 1
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            try:
                track = generate_track(spec, track_id=path.stem, book_id=book_id)
            except NyquistViolation as exc:
                raise ConfigError(str(exc)) from exc
            write_wav(track, path)
            log.info("wrote %s (%s, seed %d)", path, book_id, spec.seed)
    if not args.manifest:
        write_manifest(books, Path(args.out) / "manifest.toml", synth=params)
    return EXIT_OK


def _add_common(p, families=True):
    p.add_argument("--manifest", required=True, help="TOML book manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--weighting", choices=("magnitude", "power"), default="magnitude")
    p.add_argument("--pooling", choices=("normalized", "raw"), default="normalized",
                   help="normalized: every track carries equal mass")
    if families:
        p.add_argument("--families", default=None,
                       help="comma-separated subset of: "
                            + ",".join(f.value for f in ALL_FAMILIES))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None,
                   help="recorded in the run manifest; fits are deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specsig", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="analyze, fit and report every book")
    _add_common(p)
    p.add_argument("--dump-spectra", action="store_true",
                   help="also write per-track spectra and per-book empirical CSVs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="spectra and weighted empirical distributions")
    _add_common(p, families=False)
    p.add_argument("--dump-spectra", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit candidate families and select the signature")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="tables and plots from book_reports.json")
    p.add_argument("--reports", required=True, help="book_reports.json written by fit/run")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate synthetic WAV tracks")
    p.add_argument("--manifest", default=None,
                   help="generate the tracks listed in this manifest using its [synth] table")
    p.add_argument("--override", action="store_true",
                   help="with --manifest, let command-line values override [synth]")
    p.add_argument("--out", default=None, help="output directory (flag mode)")
    p.add_argument("--books", type=int, default=1)
    p.add_argument("--tracks", type=int, default=1, help="tracks per book")
    p.add_argument("--book-prefix", default="book")
    p.add_argument("--family", default=None)
    p.add_argument("--loc", type=float, default=None)
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--shape1", type=float, default=None)
    p.add_argument("--shape2", type=float, default=None)
    p.add_argument("--n-partials", type=int, default=None)
    p.add_argument("--duration", type=float, default=None, help="seconds")
    p.add_argument("--sample-rate", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, ManifestError) as exc:
        print(f"specsig: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrackFailure, IngestError) as exc:
        print(f"specsig: ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except (NoUsableFit, DegenerateInput) as exc:
        print(f"specsig: no usable fit: {exc}", file=sys.stderr)
        return EXIT_NO_FIT
    except SignatureError as exc:
        print(f"specsig: error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except OSError as exc:
        print(f"specsig: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
