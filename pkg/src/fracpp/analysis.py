"""Statistical checks of the asymptotic results.

Correlation estimates and long-range-dependence fits, distributional checks
of the a.s. limit theorems, the law-of-the-iterated-logarithm smoke test and
the residual of the fractional differential equation for the pgf.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError
from .process import (
    MonteCarloEstimate,
    ProcessSpec,
    _e_one,
    _moment_kind,
    ntfpp_var,
    sample_marginal,
    simulate_paths,
)
from .rates import Constant, Weibull
from .specfun import caputo_numeric, caputo_power, ml_array
from .subord import as_generator, standard_stable

__all__ = [
    "KsReport",
    "LrdReport",
    "LilReport",
    "ks_two_sample",
    "estimate_corr",
    "corr_with_stderr",
    "ntfpp_corr_asymptotic",
    "classify_slope",
    "lrd_exponent",
    "limit_ratio_ks",
    "limit_reference_draws",
    "lil_constant",
    "lil_normaliser",
    "lil_diagnostic",
    "pgf_fde_residual",
]

SCHEMA_VERSION = 1

# asymptotic two-sample KS coefficient c(alpha) at the 1% level
_KS_C_1PCT = 1.628


@dataclass(frozen=True)
class KsReport:
    statistic: float
    n1: int
    n2: int
    reject_at_1pct: bool
    critical_value: float = math.nan
    pvalue: float = math.nan

    def to_dict(self):
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}


@dataclass
class LrdReport:
    slope_estimate: float
    slope_stderr: float
    classification: str
    theory_exponent: float
    prefactor_estimate: float
    times: list = field(default_factory=list)
    corr: list = field(default_factory=list)
    corr_stderr: list = field(default_factory=list)
    floor: float = 0.0

    def to_dict(self):
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}

    def to_json(self):
        return json.dumps(self.to_dict(), allow_nan=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["log_t", "log_corr"])
        for t, c in zip(self.times, self.corr):
            d = c - self.floor
            w.writerow([repr(math.log(t)), repr(math.log(d)) if d > 0 else "nan"])
        return buf.getvalue()


@dataclass
class LilReport:
    times: np.ndarray
    running_min: np.ndarray
    theory_constant: float
    normalized_final: np.ndarray
    ks: KsReport

    def nonincreasing(self):
        return bool(np.all(np.diff(self.running_min, axis=1) <= 0))

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "times": [float(t) for t in self.times],
            "theory_constant": self.theory_constant,
            "n_paths": int(self.running_min.shape[0]),
            "ks": asdict(self.ks),
        }


def ks_two_sample(x, y):
    """Two-sample Kolmogorov-Smirnov test at the 1% level (asymptotic critical value)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = x.size, y.size
    res = stats.ks_2samp(x, y)
    crit = _KS_C_1PCT * math.sqrt((n1 + n2) / (n1 * n2))
    stat = float(res.statistic)
    return KsReport(stat, n1, n2, bool(stat > crit), crit, float(res.pvalue))


# ---------------------------------------------------------------- correlation


def corr_with_stderr(x, y):
    """Pearson correlation with a delete-one jackknife standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    x = x - x.mean()
    y = y - y.mean()
    sx, sy = x.sum(), y.sum()
    sxx, syy, sxy = (x * x).sum(), (y * y).sum(), (x * y).sum()
    if sxx == 0 or syy == 0:
        return MonteCarloEstimate(math.nan, math.nan, n)
    r = sxy / math.sqrt(sxx * syy)
    m = n - 1
    # leave-one-out sums, then centred moments of the remaining m points
    lx, ly = sx - x, sy - y
    cxx = (sxx - x * x) - lx * lx / m
    cyy = (syy - y * y) - ly * ly / m
    cxy = (sxy - x * y) - lx * ly / m
    with np.errstate(invalid="ignore", divide="ignore"):
        r_i = cxy / np.sqrt(cxx * cyy)
    r_i = r_i[np.isfinite(r_i)]
    se = math.sqrt((m / n) * np.sum((r_i - r_i.mean()) ** 2)) if r_i.size > 1 else math.nan
    return MonteCarloEstimate(float(r), se, n)


def _check_finite_moments(spec):
    _moment_kind(spec)


def estimate_corr(spec, s, t, n_paths, rng, step=None, threads=1):
    """Monte Carlo ``Corr[W(s), W(t)]`` from jointly simulated paths."""
    _check_finite_moments(spec)
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    if s == t:
        return MonteCarloEstimate(1.0, 0.0, int(n_paths))
    w = simulate_paths(spec, [0.0, s, t], n_paths, rng, step=step, threads=threads)
    return corr_with_stderr(w[:, 1], w[:, 2])


def ntfpp_corr_asymptotic(beta, rate, s, t):
    """Large-t form ``L_t^-1 (q1 L_s + d1 L_s^2) / sqrt((2 d1 - q1^2) Var W(s))``, ``L = Lambda**beta``.

    Degenerates at beta = 1 where ``2 d1 - q1^2 = 0``.
    """
    if not (0.0 < beta < 1.0):
        raise DomainError("the asymptotic correlation needs beta in (0, 1); 2*d1 - q1**2 vanishes at beta=1")
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    q1 = 1.0 / math.gamma(1.0 + beta)
    d1 = beta * q1 * q1 * math.exp(math.lgamma(beta) + math.lgamma(1 + beta) - math.lgamma(1 + 2 * beta))
    ls = rate.cumulative(s) ** beta
    lt = rate.cumulative(t) ** beta
    return (q1 * ls + d1 * ls * ls) / (lt * math.sqrt((2 * d1 - q1 * q1) * ntfpp_var(beta, rate, s)))


def classify_slope(slope, stderr, z=1.959963984540054):
    """LRD if the CI of the slope lies in (-1, 0), SRD if in (-2, -1), else inconclusive."""
    if not (math.isfinite(slope) and math.isfinite(stderr)):
        return "inconclusive"
    lo, hi = slope - z * stderr, slope + z * stderr
    if -1.0 < lo and hi < 0.0:
        return "LRD"
    if -2.0 < lo and hi < -1.0:
        return "SRD"
    return "inconclusive"


def _theory_exponent(spec):
    rate = spec.rate
    a = rate.a if isinstance(rate, Weibull) else (1.0 if isinstance(rate, Constant) else math.nan)
    if spec.variant == "STFPP":
        a = 1.0
    if spec.beta < 1.0:
        return a * spec.beta
    # Poisson: Corr = sqrt(Lambda(s) / Lambda(t))
    return a / 2.0


def lrd_exponent(spec, s, t_grid, n_paths, rng, plateau_t=None, step=None, threads=1):
    """Fit the power-law decay of ``Corr[W(s), W(t)]`` over ``t_grid``.

    Weighted least squares of ``log(Corr - floor)`` on ``log t`` with
    weights ``1 / stderr**2`` (delta method on the jackknife errors).  The
    floor is 0 except for FNPP, whose correlation tends to a positive
    plateau; that plateau is estimated by the correlation at ``plateau_t``
    (default ``10 * max(t_grid)``) and subtracted first.

    Returns
    -------
    LrdReport
        ``classification`` is ``inconclusive`` when any point has
        ``stderr > estimate / 3``.
    """
    _check_finite_moments(spec)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 5:
        raise DomainError("t_grid needs at least 5 points")
    if np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be increasing")
    if t_grid[0] < 10 * s:
        raise DomainError("t_grid must start at or beyond 10*s")
    fnpp = spec.variant == "FNPP"
    times = [0.0, s, *t_grid]
    if fnpp:
        plateau_t = 10.0 * t_grid[-1] if plateau_t is None else float(plateau_t)
        if plateau_t <= t_grid[-1]:
            raise DomainError("plateau_t must exceed the last grid time")
        times.append(plateau_t)
    w = simulate_paths(spec, np.array(times), n_paths, rng, step=step, threads=threads)
    ws = w[:, 1]
    ests = [corr_with_stderr(ws, w[:, j]) for j in range(2, 2 + t_grid.size)]
    corr = np.array([e.value for e in ests])
    se = np.array([e.stderr for e in ests])
    floor, floor_se = 0.0, 0.0
    if fnpp:
        pe = corr_with_stderr(ws, w[:, -1])
        floor, floor_se = pe.value, pe.stderr
    resid = corr - floor
    resid_se = np.sqrt(se**2 + floor_se**2)

    theory = _theory_exponent(spec)
    ok = resid > 0
    if ok.sum() < 2:
        return LrdReport(math.nan, math.nan, "inconclusive", theory, math.nan, t_grid.tolist(), corr.tolist(), se.tolist(), floor)
    x = np.log(t_grid[ok])
    y = np.log(resid[ok])
    sy = resid_se[ok] / resid[ok]
    wts = 1.0 / sy**2
    X = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(X.T @ (X * wts[:, None]))
    coef = cov @ (X.T @ (wts * y))
    slope, slope_se = float(coef[1]), float(math.sqrt(cov[1, 1]))
    noisy = (not ok.all()) or bool(np.any(resid_se > np.abs(resid) / 3.0))
    cls = "inconclusive" if noisy else classify_slope(slope, slope_se)
    return LrdReport(slope, slope_se, cls, theory, float(math.exp(coef[0])), t_grid.tolist(), corr.tolist(), se.tolist(), floor)


# ---------------------------------------------------------------- limit theorems


def limit_reference_draws(spec, n, rng):
    """Draws of the limit variable: ``D_alpha(E_beta(1))``, or ``(E_beta(1)/b)**a`` for FNPP."""
    gen = as_generator(rng)
    e = _e_one(spec.beta, n, gen) if spec.beta < 1 else np.ones(n)
    if spec.variant == "FNPP":
        if not isinstance(spec.rate, Weibull):
            raise DomainError("the FNPP limit theorem is stated for the Weibull rate")
        return (e / spec.rate.b) ** spec.rate.a
    if spec.alpha == 1.0:
        return e
    return e ** (1.0 / spec.alpha) * standard_stable(spec.alpha, n, gen)


def _limit_normaliser(spec, t):
    if spec.variant == "FNPP":
        if not isinstance(spec.rate, Weibull):
            raise DomainError("the FNPP limit theorem is stated for the Weibull rate")
        return t ** (spec.rate.a * spec.beta)
    return spec.operational(t) ** (spec.beta / spec.alpha)


def limit_ratio_ks(spec, t, n_paths, rng, min_lambda=1e3):
    """KS test of ``W(t) / Lambda(t)**(beta/alpha)`` against the limit law.

    For FNPP with Weibull rate the normaliser is ``t**(a beta)`` and the
    limit is ``(E_beta(1) / b)**a``.  ``n_paths`` exact marginal draws are
    compared with ``n_paths`` independent draws of the limit variable.
    """
    clock = spec.rate.cumulative(t) if spec.variant == "FNPP" else spec.operational(t)
    if clock < min_lambda:
        raise DomainError(f"Lambda(t) = {clock:.4g} is below the large-time guard {min_lambda:g}")
    gen = as_generator(rng)
    ratio = sample_marginal(spec, t, n_paths, gen) / _limit_normaliser(spec, t)
    ref = limit_reference_draws(spec, n_paths, gen)
    return ks_two_sample(ratio, ref)


# ---------------------------------------------------------------- LIL


def lil_constant(alpha):
    """``alpha (1 - alpha)**((1 - alpha) / alpha)`` for alpha in (0, 1)."""
    if not (0.0 < alpha < 1.0):
        raise DomainError("the LIL constant is defined for alpha in (0, 1)")
    return alpha * (1.0 - alpha) ** ((1.0 - alpha) / alpha)


def lil_normaliser(alpha, beta, lam):
    """``g = L**(1/alpha) (log log L)**(1 - 1/alpha)`` with ``L = Lambda**beta``."""
    lb = np.asarray(lam, dtype=float) ** beta
    ll = np.log(np.log(lb))
    return lb ** (1.0 / alpha) * ll ** (1.0 - 1.0 / alpha)


def lil_diagnostic(alpha, beta, rate, t_schedule, n_paths, rng, step=None, rel_step=1e-3, threads=1):
    """Running minima of ``W(t) / g(t)`` along ``t_schedule`` (smoke test only).

    Paths are simulated jointly along the schedule.  The final running
    minimum divided by :func:`lil_constant` is compared by KS with fresh
    draws of ``E_beta(1)**(1/alpha)``.

    Returns
    -------
    LilReport
    """
    lil_constant(alpha)
    t = np.asarray(t_schedule, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise DomainError("t_schedule must be positive and strictly increasing")
    lam = np.asarray(rate.cumulative(t), dtype=float)
    if np.any(lam <= math.exp(1.0 / beta)):
        raise DomainError(f"every schedule time needs Lambda(t) > exp(1/beta) = {math.exp(1.0 / beta):.4g}")
    spec = ProcessSpec("NSTFPP", alpha, beta, rate)
    if step is None and beta < 1:
        step = 1e-3 * lam[0] ** beta
    gen = as_generator(rng)
    w = simulate_paths(spec, np.concatenate([[0.0], t]), n_paths, gen, step=step, rel_step=rel_step, threads=threads)[:, 1:]
    ratio = w / lil_normaliser(alpha, beta, lam)
    rmin = np.minimum.accumulate(ratio, axis=1)
    const = lil_constant(alpha)
    final = rmin[:, -1] / const
    ref = (_e_one(beta, n_paths, gen) if beta < 1 else np.ones(n_paths)) ** (1.0 / alpha)
    return LilReport(t, rmin, const, final, ks_two_sample(final, ref))


# ---------------------------------------------------------------- pgf FDE


def pgf_fde_residual(alpha, beta, rate, s, t, n_grid=2048, k_max=None, tol=1e-16, return_sides=False):
    """``|D_t^beta G(s, t) - RHS|`` for a Weibull rate.

    The left side applies :func:`fracpp.specfun.caputo_numeric` to
    ``u -> G(s, u)``.  The right side is the series
    ``sum_k (-1)^(k+1) (1-s)^(alpha(k+1)) / Gamma(beta(k+1)+1) * D^beta Lambda^(beta(k+1))(t)``
    with each Caputo derivative in closed form, since
    ``Lambda(t)**(beta(k+1)) = (t/b)**(a beta (k+1))`` is a power.  The
    series stops when a term falls below ``tol`` after its peak, or at
    ``k_max``.
    """
    if not isinstance(rate, Weibull):
        raise DomainError("pgf_fde_residual needs a Weibull rate")
    if not (0.0 <= s <= 1.0):
        raise DomainError("s must lie in [0, 1]")
    if not t > 0:
        raise DomainError("t must be > 0")
    if s == 1.0:
        return (0.0, 0.0, 0.0) if return_sides else 0.0
    u = np.linspace(0.0, t, n_grid + 1)
    c = (1.0 - s) ** alpha
    g = ml_array(beta, -c * (u / rate.b) ** (rate.a * beta))
    lhs = caputo_numeric(g, beta, t)

    terms = []
    prev = math.inf
    k = 0
    while True:
        p = rate.a * beta * (k + 1)
        mag = math.exp((k + 1) * math.log(c) - math.lgamma(beta * (k + 1) + 1.0) - p * math.log(rate.b))
        term = (-1) ** (k + 1) * mag * caputo_power(p, beta, t)
        terms.append(term)
        k += 1
        if (k_max is not None and k >= k_max) or (abs(term) < tol and abs(term) < prev):
            break
        prev = abs(term)
        if k > 10000:
            break
    rhs = math.fsum(terms)
    res = abs(lhs - rhs)
    return (res, lhs, rhs) if return_sides else res
