"""Weighted maximum-likelihood fits, one-sample KS test and best-fit selection."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from .distributions import ALL_FAMILIES, DistSpec, Family, log1mexp
from .empirical import WeightedEmpirical
from .errors import DegenerateInput, NoUsableFit

log = logging.getLogger(__name__)

MAX_ITER = 2000
XATOL = 1e-10
FATOL = 1e-12
# log-parameters beyond this are treated as divergence
LOG_PARAM_CAP = 30.0
# the Pareto scale / powerlaw gap search is capped at this multiple of the data
# spread; an optimum within DIVERGENCE_MARGIN (log units) of the cap has run away
DIVERGENCE_RATIO = 1e8
DIVERGENCE_MARGIN = math.log(100.0)

NONCONVERGENCE = "nonconvergence"
SUPPORT_VIOLATION = "support_violation"
DIVERGED = "parameter_diverged"


@dataclass(frozen=True)
class FitResult:
    spec: DistSpec
    log_likelihood: float
    converged: bool = True
    error_flag: str | None = None
    ks_d: float = math.nan
    ks_p: float = math.nan
    n_eff: float = math.nan
    cdf_deviation: float = math.nan
    iterations: int = 0

    def __post_init__(self):
        if self.error_flag is not None and self.converged:
            raise ValueError("a flagged fit cannot be marked converged")

    @property
    def family(self) -> Family:
        return self.spec.family

    @property
    def clean(self) -> bool:
        return self.converged and self.error_flag is None

    def as_dict(self) -> dict:
        return {"spec": self.spec.as_dict(), "log_likelihood": self.log_likelihood,
                "converged": self.converged, "error_flag": self.error_flag,
                "ks_d": self.ks_d, "ks_p": self.ks_p, "n_eff": self.n_eff,
                "cdf_deviation": self.cdf_deviation, "iterations": self.iterations}

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        d = dict(d)
        d["spec"] = DistSpec.from_dict(d["spec"])
        return cls(**d)


# ---------------------------------------------------------------------------
# KS machinery


def effective_n(emp: WeightedEmpirical) -> float:
    """Kish effective sample size (sum w)^2 / sum w^2."""
    w = emp.weights
    return float(math.fsum(w) ** 2 / math.fsum(w * w))


def ks_statistic(emp: WeightedEmpirical, spec: DistSpec) -> float:
    """Two-sided sup distance between the weighted ECDF and ``spec.cdf``.

    Both one-sided limits of the ECDF are checked at every support point.
    """
    F = np.asarray(spec.cdf(emp.values), dtype=np.float64)
    upper = emp.cumulative()
    lower = np.r_[0.0, upper[:-1]]
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(lower - F))))


def cdf_deviation(emp: WeightedEmpirical, spec: DistSpec) -> float:
    """Mean absolute ECDF-vs-model gap over the weighted sample points."""
    F = np.asarray(spec.cdf(emp.values), dtype=np.float64)
    return float(np.dot(emp.probabilities, np.abs(emp.cumulative() - F)))


THETA_SWITCH = 0.3


def kolmogorov_q(lam: float, rtol: float = 1e-12) -> float:
    """Kolmogorov survival function Q(lam) = 2 sum (-1)^(j-1) exp(-2 j^2 lam^2).

    Below ``THETA_SWITCH`` the alternating series needs very many terms, so
    the equivalent theta-function form
    1 - sqrt(2 pi)/lam * sum exp(-(2j-1)^2 pi^2 / (8 lam^2)) is used there.
    """
    if lam < 0.04:
        # 1 - Q(lam) < exp(-pi^2 / (8 * 0.04^2)) underflows
        return 1.0
    if lam < THETA_SWITCH:
        total = 0.0
        j = 1
        k = -math.pi ** 2 / (8 * lam * lam)
        while True:
            term = math.exp((2 * j - 1) ** 2 * k)
            total += term
            if term <= rtol * total or term == 0.0:
                break
            j += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / lam * total))
    total = 0.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * lam * lam)
        total += term if j % 2 else -term
        if term < rtol * abs(total) or term == 0.0:
            break
        j += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_pvalue(d: float, n_eff: float) -> float:
    """Asymptotic p-value with the (sqrt(n) + 0.12 + 0.11/sqrt(n)) correction."""
    if d < 0 or n_eff <= 0:
        raise ValueError("need d >= 0 and n_eff > 0")
    sn = math.sqrt(n_eff)
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)


# ---------------------------------------------------------------------------
# maximum likelihood


def _mean_loglik(spec: DistSpec, x: np.ndarray, p: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = spec.logpdf(x)
    return float(np.dot(p, lp))


def _wmean(x, p) -> float:
    return float(np.dot(p, x))


def _below(x: float) -> float:
    return float(np.nextafter(x, -np.inf))


def _nelder_mead(fun, x0, **kw):
    opts = {"xatol": XATOL, "fatol": FATOL, "maxiter": MAX_ITER}
    opts.update(kw)
    return optimize.minimize(fun, np.atleast_1d(np.asarray(x0, dtype=np.float64)),
                             method="Nelder-Mead", options=opts)


def fit_mle(emp: WeightedEmpirical, family: Family) -> FitResult:
    """Maximize the weighted mean log-likelihood sum(w log f(x)) / W.

    Exponential, normal, lognormal and gilbrat have closed forms; pareto,
    powerlaw and expweibull use Nelder-Mead on log-transformed parameters.
    Non-convergence and support problems come back as flags on the result,
    never as exceptions; only degenerate data raises.
    """
    family = Family(family)
    keep = emp.weights > 0
    x = emp.values[keep]
    p = emp.weights[keep] / math.fsum(emp.weights[keep])
    if x.size < 2:
        raise DegenerateInput(f"{family.value}: need at least 2 distinct values")

    spec, converged, flag, nit = _FITTERS[family](x, p)
    ll = _mean_loglik(spec, x, p)
    if flag is None and not np.isfinite(ll):
        flag, converged = SUPPORT_VIOLATION, False
    if flag is not None:
        converged = False
    return FitResult(spec=spec, log_likelihood=ll, converged=converged,
                     error_flag=flag, iterations=nit)


def _fit_exponential(x, p):
    loc = float(x[0])
    scale = _wmean(x - loc, p)
    return DistSpec(Family.EXPONENTIAL, loc, scale), True, None, 0


def _fit_normal(x, p):
    mean = _wmean(x, p)
    sd = math.sqrt(_wmean((x - mean) ** 2, p))
    return DistSpec(Family.NORMAL, mean, sd), True, None, 0


def _log_shifted(x, p):
    # loc one ulp below the minimum keeps every point inside the open support
    loc = _below(float(x[0]))
    y = np.log(x - loc)
    mu = _wmean(y, p)
    return loc, y, mu


def _fit_lognormal(x, p):
    loc, y, mu = _log_shifted(x, p)
    sigma = math.sqrt(_wmean((y - mu) ** 2, p))
    return DistSpec(Family.LOGNORMAL, loc, math.exp(mu), sigma), True, None, 0


def _fit_gilbrat(x, p):
    loc, _, mu = _log_shifted(x, p)
    return DistSpec(Family.GILBRAT, loc, math.exp(mu)), True, None, 0


def _fit_pareto(x, p):
    # support edge pinned to the minimum: loc + scale = min(x); b is profiled out
    xmin = float(x[0])
    excess = x - xmin
    spread = _wmean(excess, p)
    cap = math.log(spread * DIVERGENCE_RATIO)

    def profile(u):
        s = math.exp(u)
        mean_log_z = _wmean(np.log1p(excess / s), p)
        b = 1.0 / mean_log_z
        return b, s, math.log(b) - u - (b + 1.0) * mean_log_z

    def objective(v):
        u = float(v[0])
        if u > cap:
            return -profile(cap)[2] + (u - cap)
        return -profile(u)[2]

    res = _nelder_mead(objective, [math.log(spread)])
    u = min(float(res.x[0]), cap)
    b, s, _ = profile(u)
    loc = xmin - s
    while (xmin - loc) / s < 1.0:
        loc = _below(loc)
    spec = DistSpec(Family.PARETO, loc, s, b)
    if u >= cap - DIVERGENCE_MARGIN:
        return spec, False, DIVERGED, res.nit
    return spec, bool(res.success), None if res.success else NONCONVERGENCE, res.nit


def _fit_powerlaw(x, p):
    # support [loc, max(x)] with loc = min(x) - gap; a is profiled out for each gap.
    # gap >= min spacing for the same reason as expweibull_loc_floor (a < 1)
    xmin, xmax = float(x[0]), float(x[-1])
    floor = min_spacing(x)
    lo = math.log(floor)
    cap = math.log((xmax - xmin) * DIVERGENCE_RATIO)

    def profile(t):
        gap = math.exp(t)
        loc = xmin - gap
        scale = xmax - loc
        mean_log_z = _wmean(np.log((x - loc) / scale), p)
        a = -1.0 / mean_log_z
        return a, loc, scale, math.log(a) - math.log(scale) - 1.0 + 1.0 / a

    def objective(v):
        t = float(v[0])
        if t < lo:
            return -profile(lo)[3] + (lo - t)
        if t > cap:
            return -profile(cap)[3] + (t - cap)
        return -profile(t)[3]

    res = _nelder_mead(objective, [max(math.log(0.01 * (xmax - xmin)), lo)])
    t = min(max(float(res.x[0]), lo), cap)
    a, loc, scale, _ = profile(t)
    spec = DistSpec(Family.POWERLAW, loc, scale, a)
    if t >= cap - DIVERGENCE_MARGIN:
        return spec, False, DIVERGED, res.nit
    return spec, bool(res.success), None if res.success else NONCONVERGENCE, res.nit


def _expweibull_objective(lz0, p):
    def nll(v):
        if np.any(np.abs(v) > LOG_PARAM_CAP):
            return np.inf
        a, c, s = np.exp(v)
        lz = lz0 - v[2]
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            zc = np.exp(c * lz)
            lp = (math.log(a * c) - v[2] + (a - 1.0) * log1mexp(zc, c * lz)
                  - zc + (c - 1.0) * lz)
        val = -float(np.dot(p, lp))
        return val if math.isfinite(val) else np.inf
    return nll


def expweibull_start_points(x, p, loc):
    """Two moment-matched starting points: exponential and Weibull.

    The exponential start is alpha = c = 1 with scale = mean excess. The
    Weibull start (alpha = 1) matches the variance of log-excess,
    pi^2 / (6 c^2), and its mean, ln(scale) - euler_gamma / c.
    """
    excess = x - loc
    starts = [np.array([0.0, 0.0, math.log(_wmean(excess, p))])]
    ly = np.log(excess)
    m = _wmean(ly, p)
    sd = math.sqrt(_wmean((ly - m) ** 2, p))
    if sd > 0:
        c0 = math.pi / (math.sqrt(6.0) * sd)
        starts.append(np.array([0.0, math.log(c0), m + np.euler_gamma / c0]))
    return starts


def min_spacing(x) -> float:
    """Distance between the two smallest support points."""
    return float(x[1] - x[0])


def expweibull_loc_floor(x) -> float:
    """Fallback loc for the expweibull fit: x(1) - (x(2) - x(1)).

    With alpha * c < 1 the density is unbounded at loc, so the likelihood
    diverges as loc approaches the minimum and has no maximum. The fit then
    keeps loc one spacing below the minimum; for a spectrum this is exactly
    the DC frequency.
    """
    return float(x[0]) - min_spacing(x)


def _fit_expweibull(x, p):
    # phase 1: loc on the floor, two moment-matched starts
    xmin, gmin = float(x[0]), min_spacing(x)
    loc = xmin - gmin
    nll = _expweibull_objective(np.log(x - loc), p)
    best = None
    total_nit = 0
    for start in expweibull_start_points(x, p, loc):
        res = _nelder_mead(nll, start)
        total_nit += res.nit
        if best is None or res.fun < best.fun:
            best = res
    a, c, s = np.exp(best.x)
    spec = DistSpec(Family.EXPWEIBULL, loc, float(s), float(a), float(c))
    if np.any(np.abs(best.x) >= LOG_PARAM_CAP - 1e-6) or not math.isfinite(best.fun):
        return spec, False, DIVERGED, total_nit
    converged = bool(best.success)

    # phase 2: free loc, gap = gmin * e^w. Kept only where the density is
    # bounded at loc (alpha * c >= 1), i.e. where a true maximum exists
    def nll4(v):
        if abs(float(v[3])) > LOG_PARAM_CAP:
            return np.inf
        gap = gmin * math.exp(float(v[3]))
        return _expweibull_objective(np.log(x - (xmin - gap)), p)(v[:3])

    res = _nelder_mead(nll4, np.r_[best.x, 0.0])
    total_nit += res.nit
    a2, c2, s2 = np.exp(res.x[:3])
    w = float(res.x[3])
    if (res.fun < best.fun and a2 * c2 >= 1.0 and w > -LOG_PARAM_CAP + DIVERGENCE_MARGIN
            and not np.any(np.abs(res.x[:3]) >= LOG_PARAM_CAP - 1e-6)):
        spec = DistSpec(Family.EXPWEIBULL, xmin - gmin * math.exp(w), float(s2),
                        float(a2), float(c2))
        if w >= LOG_PARAM_CAP - DIVERGENCE_MARGIN:
            return spec, False, DIVERGED, total_nit
        converged = bool(res.success)
    return spec, converged, None if converged else NONCONVERGENCE, total_nit


_FITTERS = {
    Family.NORMAL: _fit_normal,
    Family.LOGNORMAL: _fit_lognormal,
    Family.EXPONENTIAL: _fit_exponential,
    Family.PARETO: _fit_pareto,
    Family.GILBRAT: _fit_gilbrat,
    Family.POWERLAW: _fit_powerlaw,
    Family.EXPWEIBULL: _fit_expweibull,
}


def evaluate_fit(emp: WeightedEmpirical, result: FitResult,
                 n_eff: float | None = None) -> FitResult:
    """Fill the KS statistic, p-value and CDF deviation of a fit."""
    n = effective_n(emp) if n_eff is None else n_eff
    d = ks_statistic(emp, result.spec)
    return dataclasses.replace(result, ks_d=d, ks_p=ks_pvalue(d, n), n_eff=n,
                               cdf_deviation=cdf_deviation(emp, result.spec))


def fit_family(emp: WeightedEmpirical, family: Family) -> FitResult:
    return evaluate_fit(emp, fit_mle(emp, family))


def fit_all(emp: WeightedEmpirical,
            families: Iterable[Family] = ALL_FAMILIES) -> list[FitResult]:
    n = effective_n(emp)
    out = []
    for fam in families:
        res = evaluate_fit(emp, fit_mle(emp, fam), n)
        log.debug("%s: d=%.6g p=%.6g flag=%s", fam.value, res.ks_d, res.ks_p, res.error_flag)
        out.append(res)
    return out


# ---------------------------------------------------------------------------
# selection


class SelectionReason(str, Enum):
    BEST_FIT = "BestFit"
    SECOND_BEST_AFTER_ERROR = "SecondBestAfterError"
    CDF_TIE_BREAK = "CdfTieBreak"


@dataclass(frozen=True)
class RankedFits:
    fits: tuple[FitResult, ...]
    selected: int
    selection_reason: SelectionReason

    @property
    def best(self) -> FitResult:
        return self.fits[self.selected]

    def as_dict(self) -> dict:
        return {"fits": [f.as_dict() for f in self.fits], "selected": self.selected,
                "selection_reason": self.selection_reason.value}

    @classmethod
    def from_dict(cls, d: dict) -> "RankedFits":
        return cls(tuple(FitResult.from_dict(f) for f in d["fits"]), int(d["selected"]),
                   SelectionReason(d["selection_reason"]))


_FAMILY_ORDER = {fam: i for i, fam in enumerate(ALL_FAMILIES)}


def _d_key(r: FitResult) -> float:
    return r.ks_d if math.isfinite(r.ks_d) else math.inf


def _sort_key(r: FitResult):
    # every field takes part, so the order never depends on the input order
    s = r.spec
    return (not r.clean, _d_key(r), _FAMILY_ORDER[r.family],
            s.loc, s.scale, s.shape1 or 0.0, s.shape2 or 0.0, -r.ks_p, r.cdf_deviation,
            r.error_flag or "", r.log_likelihood, r.n_eff, r.iterations)


def _same_to_12_digits(a: float, b: float) -> bool:
    return f"{a:.11e}" == f"{b:.11e}"


def rank_and_select(results: Sequence[FitResult]) -> RankedFits:
    """Order fits and pick the signature.

    Clean fits come first by ascending KS d, flagged fits after them. The
    best clean fit is the selection. If a flagged fit had a d at least as
    small, the reason is SecondBestAfterError. Otherwise, when the two best
    clean fits agree in (d, p) to 12 significant digits, the one with the
    smaller mean absolute CDF deviation wins (CdfTieBreak).
    """
    if not results:
        raise ValueError("no fit results to rank")
    fits = tuple(sorted(results, key=_sort_key))
    if not fits[0].clean:
        raise NoUsableFit("every candidate fit carries an error flag")

    top = fits[0]
    flagged = [r for r in fits if not r.clean]
    if any(_d_key(r) <= _d_key(top) for r in flagged):
        return RankedFits(fits, 0, SelectionReason.SECOND_BEST_AFTER_ERROR)
    if len(fits) > 1 and fits[1].clean:
        second = fits[1]
        if (_same_to_12_digits(top.ks_d, second.ks_d)
                and _same_to_12_digits(top.ks_p, second.ks_p)):
            pick = 1 if second.cdf_deviation < top.cdf_deviation else 0
            return RankedFits(fits, pick, SelectionReason.CDF_TIE_BREAK)
    return RankedFits(fits, 0, SelectionReason.BEST_FIT)
