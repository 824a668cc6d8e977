"""Moment table for the five books from their selected fitted parameters.

Usage: python3 scripts/reproduce_moment_table.py [--out moments.csv] [--book1-reading loc|scale]

The third number of the book1 exponentiated Weibull row can be read either as
loc (scale 1) or as scale (loc 0); ``--book1-reading`` picks one. The last
column reports the largest relative deviation from the reference row.
"""
import argparse
import csv
import sys

from specsig.distributions import DistSpec, Family, theoretical_moments
from specsig.reporting import MOMENT_COLUMNS, fmt

EW = Family.EXPWEIBULL
EXP = Family.EXPONENTIAL

SELECTED = {
    "book1": (1.8078554913188745, 0.40464609484912933, 10.52751466016218),
    "book2": DistSpec(EXP, 0.0007007909083517199, 114.52846083233646),
    "book3": DistSpec(EW, 0.0006176602639155107, 8.883106480102926,
                      2.388182477333179, 0.40846064327782183),
    "book4": DistSpec(EXP, 0.00024278816105826503, 111.43319977150223),
    "book5": DistSpec(EXP, 0.00036681097553665327, 78.55973558262349),
}

REFERENCE = {
    "book1": (11.92264231798744, 15.91309592, 165.14702629, 2.22947294, 8.64448247,
              165.07931581),
    "book2": (79.3857805107125, 114.52916162, 13116.76834062, 5.74082336, 2.0, 6.0),
    "book3": (19.498382903069388, 58.59146593, 15103.08763592, 4.79475561, 7.59892293,
              126.62372354),
    "book4": (77.23985103055097, 111.43344256, 12417.35801132, 5.71342531, 2.0, 6.0),
    "book5": (54.453826035605815, 78.56010239, 6171.63205481, 5.3638593, 2.0, 6.0),
}


def book1_spec(reading: str) -> DistSpec:
    a, c, third = SELECTED["book1"]
    if reading == "loc":
        return DistSpec(EW, third, 1.0, a, c)
    return DistSpec(EW, 0.0, third, a, c)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    ap.add_argument("--book1-reading", choices=("loc", "scale"), default="loc")
    args = ap.parse_args(argv)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(MOMENT_COLUMNS + ("max_rel_dev",))
    for book, spec in SELECTED.items():
        if book == "book1":
            spec = book1_spec(args.book1_reading)
        m = theoretical_moments(spec)
        row = (m.median, m.mean, m.variance, m.entropy, m.skewness, m.excess_kurtosis)
        dev = max(abs(x - r) / abs(r) for x, r in zip(row, REFERENCE[book]))
        w.writerow([book] + [fmt(v) for v in row] + [f"{dev:.3e}"])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
