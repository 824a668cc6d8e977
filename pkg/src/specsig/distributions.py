"""The seven candidate families in loc-scale form.

Every family is written as a standard density ``f_std(z; shapes)`` and the
located/scaled version is ``f_std((x - loc) / scale) / scale``. Standard forms:

================  ==============================================  ==========
family            standard pdf                                    support
================  ==============================================  ==========
normal            exp(-z^2/2) / sqrt(2 pi)                        R
lognormal (s)     exp(-ln(z)^2 / (2 s^2)) / (z s sqrt(2 pi))      z > 0
exponential       exp(-z)                                         z >= 0
pareto (b)        b / z^(b+1)                                     z >= 1
gilbrat           lognormal with s = 1                            z > 0
powerlaw (a)      a z^(a-1)                                       0 <= z <= 1
expweibull (a,c)  a c [1-exp(-z^c)]^(a-1) exp(-z^c) z^(c-1)       z > 0
================  ==============================================  ==========

``shape1`` holds s, b, a or alpha; ``shape2`` holds c for expweibull.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import InvalidSpec, NonConvergentQuadrature, QOutOfRange

INF = math.inf


class Family(str, Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    EXPONENTIAL = "exponential"
    PARETO = "pareto"
    GILBRAT = "gilbrat"
    POWERLAW = "powerlaw"
    EXPWEIBULL = "expweibull"

    @property
    def n_shapes(self) -> int:
        return _N_SHAPES[self]

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        aliases = {"exponentiatedweibull": "expweibull", "exponweib": "expweibull",
                   "gibrat": "gilbrat", "lognorm": "lognormal", "norm": "normal",
                   "expon": "exponential"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown family {name!r}; choose from "
                             f"{', '.join(f.value for f in cls)}") from None


ALL_FAMILIES = tuple(Family)

_N_SHAPES = {
    Family.NORMAL: 0, Family.LOGNORMAL: 1, Family.EXPONENTIAL: 0,
    Family.PARETO: 1, Family.GILBRAT: 0, Family.POWERLAW: 1,
    Family.EXPWEIBULL: 2,
}


@dataclass(frozen=True)
class DistSpec:
    family: Family
    loc: float = 0.0
    scale: float = 1.0
    shape1: float | None = None
    shape2: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        n = self.family.n_shapes
        if not (math.isfinite(self.loc) and math.isfinite(self.scale) and self.scale > 0):
            raise InvalidSpec(f"{self.family.value}: need finite loc and scale > 0, "
                              f"got loc={self.loc}, scale={self.scale}")
        shapes = (self.shape1, self.shape2)
        for i, s in enumerate(shapes):
            if i < n:
                if s is None or not math.isfinite(s) or s <= 0:
                    raise InvalidSpec(f"{self.family.value}: shape{i + 1} must be "
                                      f"finite and > 0, got {s}")
            elif s is not None:
                raise InvalidSpec(f"{self.family.value} takes {n} shape parameter(s)")

    @property
    def shapes(self) -> tuple[float, ...]:
        return (self.shape1, self.shape2)[:self.family.n_shapes]

    def standardize(self, x):
        return (np.asarray(x, dtype=np.float64) - self.loc) / self.scale

    def pdf(self, x):
        return _scalar(_STD_PDF[self.family](self.standardize(x), *self.shapes) / self.scale)

    def logpdf(self, x):
        z = self.standardize(x)
        return _scalar(_STD_LOGPDF[self.family](z, *self.shapes) - math.log(self.scale))

    def cdf(self, x):
        return _scalar(_STD_CDF[self.family](self.standardize(x), *self.shapes))

    def quantile(self, q):
        q_arr = np.asarray(q, dtype=np.float64)
        if np.any(~((q_arr > 0) & (q_arr < 1))):
            raise QOutOfRange(f"quantile level must lie in (0, 1), got {q}")
        return _scalar(self.loc + self.scale * _STD_PPF[self.family](q_arr, *self.shapes))

    def support(self) -> tuple[float, float]:
        lo, hi = _STD_SUPPORT[self.family]
        return self.loc + self.scale * lo, self.loc + self.scale * hi

    def as_dict(self) -> dict:
        return {"family": self.family.value, "shape1": self.shape1,
                "shape2": self.shape2, "loc": self.loc, "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "DistSpec":
        return cls(Family.parse(d["family"]), float(d["loc"]), float(d["scale"]),
                   None if d.get("shape1") is None else float(d["shape1"]),
                   None if d.get("shape2") is None else float(d["shape2"]))


def pdf(spec: DistSpec, x):
    return spec.pdf(x)


def cdf(spec: DistSpec, x):
    return spec.cdf(x)


def quantile(spec: DistSpec, q):
    return spec.quantile(q)


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


# ---------------------------------------------------------------------------
# standard forms

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def _normal_logpdf(z):
    return -0.5 * z * z - _LOG_SQRT_2PI


def _lognormal_logpdf(z, s):
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(np.where(z > 0, z, 1.0))
        out = -lz * lz / (2 * s * s) - lz - math.log(s) - _LOG_SQRT_2PI
    return np.where(z > 0, out, -np.inf)


def _expon_logpdf(z):
    return np.where(z >= 0, -z, -np.inf)


def _pareto_logpdf(z, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = math.log(b) - (b + 1) * np.log(np.where(z >= 1, z, 1.0))
    return np.where(z >= 1, out, -np.inf)


def _powerlaw_logpdf(z, a):
    inside = (z >= 0) & (z <= 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = math.log(a) + (a - 1) * np.log(np.where(inside, z, 1.0))
        # a z^(a-1) at z = 0: infinite for a < 1, 1 for a == 1, 0 for a > 1
        out = np.where(inside & (z == 0), math.log(a) if a == 1 else
                       (np.inf if a < 1 else -np.inf), out)
    return np.where(inside, out, -np.inf)


def log1mexp(x, log_x):
    """log(1 - exp(-x)) for x > 0, given log(x) too.

    Below 1e-10 the series log(x) - x/2 is exact to double precision and
    stays finite when x itself underflows.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.log(-np.expm1(-x))
    return np.where(x < 1e-10, log_x - 0.5 * x, direct)


def _expweibull_logpdf(z, a, c):
    pos = z > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lz = np.log(np.where(pos, z, 1.0))
        zc = np.exp(c * lz)
        out = (math.log(a * c) + (a - 1) * log1mexp(zc, c * lz) - zc + (c - 1) * lz)
    ac = a * c
    at_zero = math.log(ac) if ac == 1 else (np.inf if ac < 1 else -np.inf)
    out = np.where(z == 0, at_zero, out)
    return np.where(z >= 0, out, -np.inf)


def _from_log(logpdf):
    def f(z, *shapes):
        with np.errstate(over="ignore"):
            return np.exp(logpdf(z, *shapes))
    return f


_STD_LOGPDF = {
    Family.NORMAL: _normal_logpdf,
    Family.LOGNORMAL: _lognormal_logpdf,
    Family.EXPONENTIAL: _expon_logpdf,
    Family.PARETO: _pareto_logpdf,
    Family.GILBRAT: lambda z: _lognormal_logpdf(z, 1.0),
    Family.POWERLAW: _powerlaw_logpdf,
    Family.EXPWEIBULL: _expweibull_logpdf,
}
_STD_PDF = {fam: _from_log(fn) for fam, fn in _STD_LOGPDF.items()}
_STD_PDF[Family.NORMAL] = lambda z: np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
_STD_PDF[Family.EXPONENTIAL] = lambda z: np.where(z >= 0, np.exp(-np.maximum(z, 0)), 0.0)


def _lognormal_cdf(z, s):
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(np.where(z > 0, z, 1.0))
    return np.where(z > 0, special.ndtr(lz / s), 0.0)


def _pareto_cdf(z, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.expm1(-b * np.log(np.where(z >= 1, z, 1.0)))
    return np.where(z >= 1, out, 0.0)


def _powerlaw_cdf(z, a):
    zc = np.clip(z, 0.0, 1.0)
    return zc ** a


def _expweibull_cdf(z, a, c):
    zp = np.maximum(z, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        return (-np.expm1(-(zp ** c))) ** a


_STD_CDF = {
    Family.NORMAL: special.ndtr,
    Family.LOGNORMAL: _lognormal_cdf,
    Family.EXPONENTIAL: lambda z: -np.expm1(-np.maximum(z, 0.0)),
    Family.PARETO: _pareto_cdf,
    Family.GILBRAT: lambda z: _lognormal_cdf(z, 1.0),
    Family.POWERLAW: _powerlaw_cdf,
    Family.EXPWEIBULL: _expweibull_cdf,
}

_STD_PPF = {
    Family.NORMAL: special.ndtri,
    Family.LOGNORMAL: lambda q, s: np.exp(s * special.ndtri(q)),
    Family.EXPONENTIAL: lambda q: -np.log1p(-q),
    Family.PARETO: lambda q, b: np.exp(-np.log1p(-q) / b),
    Family.GILBRAT: lambda q: np.exp(special.ndtri(q)),
    Family.POWERLAW: lambda q, a: q ** (1.0 / a),
    Family.EXPWEIBULL: lambda q, a, c: (-np.log1p(-(q ** (1.0 / a)))) ** (1.0 / c),
}

_STD_SUPPORT = {
    Family.NORMAL: (-INF, INF),
    Family.LOGNORMAL: (0.0, INF),
    Family.EXPONENTIAL: (0.0, INF),
    Family.PARETO: (1.0, INF),
    Family.GILBRAT: (0.0, INF),
    Family.POWERLAW: (0.0, 1.0),
    Family.EXPWEIBULL: (0.0, INF),
}


# ---------------------------------------------------------------------------
# moments


class Moments(NamedTuple):
    median: float
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    entropy: float


def _lognormal_std_moments(s):
    s2 = s * s
    e = math.exp(s2)
    return Moments(
        median=1.0,
        mean=math.exp(s2 / 2),
        variance=(e - 1) * e,
        skewness=(e + 2) * math.sqrt(e - 1),
        excess_kurtosis=math.exp(4 * s2) + 2 * math.exp(3 * s2) + 3 * math.exp(2 * s2) - 6,
        entropy=0.5 + 0.5 * math.log(2 * math.pi * s2),
    )


def _pareto_std_moments(b):
    # moments that do not exist are reported as +inf
    return Moments(
        median=2.0 ** (1.0 / b),
        mean=b / (b - 1) if b > 1 else INF,
        variance=b / ((b - 1) ** 2 * (b - 2)) if b > 2 else INF,
        skewness=2 * (1 + b) / (b - 3) * math.sqrt((b - 2) / b) if b > 3 else INF,
        excess_kurtosis=(6 * (b ** 3 + b ** 2 - 6 * b - 2) / (b * (b - 3) * (b - 4))
                         if b > 4 else INF),
        entropy=math.log(1.0 / b) + 1.0 / b + 1.0,
    )


def _powerlaw_std_moments(a):
    return Moments(
        median=0.5 ** (1.0 / a),
        mean=a / (a + 1),
        variance=a / ((a + 1) ** 2 * (a + 2)),
        skewness=2 * (1 - a) * math.sqrt(a + 2) / ((a + 3) * math.sqrt(a)),
        excess_kurtosis=6 * (a ** 3 - a ** 2 - 6 * a + 2) / (a * (a + 3) * (a + 4)),
        entropy=1.0 - 1.0 / a - math.log(a),
    )


def _closed_std_moments(family: Family, shapes) -> Moments | None:
    if family is Family.NORMAL:
        return Moments(0.0, 0.0, 1.0, 0.0, 0.0, 0.5 * math.log(2 * math.pi * math.e))
    if family is Family.EXPONENTIAL:
        return Moments(math.log(2.0), 1.0, 1.0, 2.0, 6.0, 1.0)
    if family is Family.LOGNORMAL:
        return _lognormal_std_moments(*shapes)
    if family is Family.GILBRAT:
        return _lognormal_std_moments(1.0)
    if family is Family.PARETO:
        return _pareto_std_moments(*shapes)
    if family is Family.POWERLAW:
        return _powerlaw_std_moments(*shapes)
    return None


QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-12


def _quad(fn, lo, hi, what):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                                  limit=500)
    if not math.isfinite(val) or err > max(1e-6 * abs(val), 1e-8):
        raise NonConvergentQuadrature(f"{what}: integral {val} with error estimate {err}")
    return val


def quadrature_std_moments(family: Family, shapes=()) -> Moments:
    """Standard-form moments by adaptive quadrature of the density.

    Each integral is split at the standard median to isolate any
    singularity at the lower edge of the support.
    """
    family = Family(family)
    shapes = tuple(shapes)
    logpdf = _STD_LOGPDF[family]
    lo, hi = _STD_SUPPORT[family]
    median = float(_STD_PPF[family](np.float64(0.5), *shapes))

    def f(z):
        return float(np.exp(logpdf(np.float64(z), *shapes)))

    def integral(g, what):
        return _quad(g, lo, median, what) + _quad(g, median, hi, what)

    mass = integral(f, "normalization")
    mean = integral(lambda z: z * f(z), "mean")
    central = [integral(lambda z, r=r: (z - mean) ** r * f(z), f"central moment {r}")
               for r in (2, 3, 4)]
    m2, m3, m4 = central

    def neg_f_log_f(z):
        lp = float(logpdf(np.float64(z), *shapes))
        return 0.0 if lp == -INF else -math.exp(lp) * lp

    entropy = integral(neg_f_log_f, "entropy")
    if abs(mass - 1.0) > 1e-6:
        raise NonConvergentQuadrature(f"density integrates to {mass}")
    return Moments(median, mean, m2, m3 / m2 ** 1.5, m4 / (m2 * m2) - 3.0, entropy)


def standard_moments(family: Family, shapes=()) -> Moments:
    family = Family(family)
    closed = _closed_std_moments(family, tuple(shapes))
    return closed if closed is not None else quadrature_std_moments(family, shapes)


def theoretical_moments(spec: DistSpec) -> Moments:
    """Median, mean, variance, skewness, excess kurtosis and differential entropy."""
    std = standard_moments(spec.family, spec.shapes)
    return Moments(
        median=spec.loc + spec.scale * std.median,
        mean=spec.loc + spec.scale * std.mean,
        variance=spec.scale ** 2 * std.variance,
        skewness=std.skewness,
        excess_kurtosis=std.excess_kurtosis,
        entropy=std.entropy + math.log(spec.scale),
    )
