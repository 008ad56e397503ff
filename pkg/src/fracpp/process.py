"""Fractional Poisson process variants: simulation, pmf/pgf series, moments.

All variants are time changes of a unit-rate Poisson process N:

=======  ====================================  ===================
variant  W(t)                                  indices
=======  ====================================  ===================
NSTFPP   N(D_alpha(E_beta(Lambda(t))))         alpha, beta in (0,1]
NTFPP    N(E_beta(Lambda(t)))                  alpha = 1
NSFPP    N(D_alpha(Lambda(t)))                 beta = 1
NPP      N(Lambda(t))                          alpha = beta = 1
STFPP    NSTFPP with Lambda(t) = lam**(alpha/beta) t
FNPP     N(Lambda(E_beta(t)))                  alpha = 1
=======  ====================================  ===================

For every variant except FNPP the marginal law depends on t only through
``x = Lambda(t)**beta`` and has pgf ``L_beta(-(1-s)**alpha x)``; the pmf is

    p(n) = sum_k (-x)^k / Gamma(beta k + 1) * (-1)^n binom(alpha k, n).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError
from .rates import Constant, RateFunction, Weibull, rate_from_dict
from .specfun import SeriesResult, incomplete_beta, mittag_leffler
from .subord import (
    RngStream,
    as_generator,
    chunk_generators,
    default_step,
    inverse_stable_at,
    standard_stable,
)

__all__ = [
    "VARIANTS",
    "ProcessSpec",
    "SamplePath",
    "MonteCarloEstimate",
    "PmfTable",
    "simulate_paths",
    "simulate_path",
    "sample_marginal",
    "pmf",
    "pmf_vector",
    "survival",
    "pgf",
    "pgf_min_uniform_mc",
    "ntfpp_mean",
    "ntfpp_var",
    "ntfpp_cov",
    "fnpp_mean",
    "fnpp_var",
    "fnpp_cov",
    "mean",
    "variance",
    "covariance",
    "inverse_stable_moment",
    "frac_moment_inverse_stable",
    "arrival_time_cdf",
    "PMF_X_MAX",
]

VARIANTS = ("NSTFPP", "NTFPP", "NSFPP", "STFPP", "FNPP", "NPP")

# pmf/pmf_vector refuse x = Lambda(t)**beta above this (alternating-series guard)
PMF_X_MAX = 30.0

_INFINITE_MEAN = "mean of the SFPP process is infinite for alpha < 1; moments exist only for NTFPP, FNPP and NPP"


@dataclass(frozen=True)
class ProcessSpec:
    """One process variant with its indices and rate.

    ``rate`` is required for every variant except STFPP, which instead uses
    the homogeneous rate ``lambda_hom``.
    """

    variant: str
    alpha: float = 1.0
    beta: float = 1.0
    rate: RateFunction | None = None
    lambda_hom: float | None = None

    def __post_init__(self):
        v = str(self.variant).upper()
        object.__setattr__(self, "variant", v)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if v not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}; expected one of {', '.join(VARIANTS)}")
        for name in ("alpha", "beta"):
            x = getattr(self, name)
            if not (0.0 < x <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1], got {x}")
        if v in ("NTFPP", "FNPP", "NPP") and self.alpha != 1.0:
            raise DomainError(f"{v} requires alpha=1")
        if v in ("NSFPP", "NPP") and self.beta != 1.0:
            raise DomainError(f"{v} requires beta=1")
        if v == "STFPP":
            if self.lambda_hom is None or not self.lambda_hom > 0:
                raise DomainError("STFPP requires lambda_hom > 0")
        elif self.rate is None:
            raise DomainError(f"{v} requires a rate function")

    def operational(self, t):
        """Deterministic inner clock: ``Lambda(t)``, or ``lam**(alpha/beta) t`` for STFPP."""
        if self.variant == "STFPP":
            t = np.asarray(t, dtype=float)
            if np.any(t < 0):
                raise DomainError("time must be >= 0")
            out = self.lambda_hom ** (self.alpha / self.beta) * t
            return float(out) if np.ndim(out) == 0 else out
        return self.rate.cumulative(t)

    def ml_argument(self, t):
        """``x = Lambda(t)**beta`` (``lam**alpha t**beta`` for STFPP)."""
        if self.variant == "FNPP":
            raise DomainError("FNPP marginals are not of Mittag-Leffler type")
        if self.variant == "STFPP":
            if t < 0:
                raise DomainError("time must be >= 0")
            return self.lambda_hom**self.alpha * t**self.beta
        return self.rate.cumulative(t) ** self.beta

    def to_dict(self):
        return {
            "variant": self.variant,
            "alpha": self.alpha,
            "beta": self.beta,
            "rate": None if self.rate is None else self.rate.to_dict(),
            "lambda_hom": self.lambda_hom,
        }

    @classmethod
    def from_dict(cls, d):
        rate = d.get("rate")
        return cls(
            d["variant"],
            d.get("alpha", 1.0),
            d.get("beta", 1.0),
            None if rate is None else rate_from_dict(rate),
            d.get("lambda_hom"),
        )


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    n: int

    @classmethod
    def from_samples(cls, x):
        x = np.asarray(x, dtype=float)
        n = x.size
        sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
        return cls(float(np.mean(x)), sd / math.sqrt(n) if n else math.nan, int(n))

    def zscore(self, target):
        """``(value - target) / stderr``; 0 when both the error and the stderr vanish."""
        diff = self.value - target
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.stderr

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "n": self.n}


@dataclass
class SamplePath:
    times: np.ndarray
    counts: np.ndarray
    spec: ProcessSpec
    rng: RngStream | None = None

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "count"])
        for t, c in zip(self.times, self.counts):
            w.writerow([repr(float(t)), int(c)])
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "spec": self.spec.to_dict(),
                "rng": None if self.rng is None else self.rng.to_dict(),
                "times": [float(t) for t in self.times],
                "counts": [int(c) for c in self.counts],
            }
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        rng = d.get("rng")
        return cls(
            np.asarray(d["times"], dtype=float),
            np.asarray(d["counts"], dtype=np.int64),
            ProcessSpec.from_dict(d["spec"]),
            None if rng is None else RngStream(**rng),
        )


@dataclass(frozen=True)
class PmfTable:
    """Probabilities ``p(0..n_max)``.

    ``tail_mass`` is ``1 - sum(probs)``; ``tail_bound`` is ``P(W > n_max)``
    computed independently from the survival series, so the two agree when
    the table is accurate.
    """

    probs: np.ndarray
    n_max: int
    tail_mass: float
    tail_bound: float
    converged: bool
    clamped: int = 0
    terms_used: int = 0

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "probability"])
        for n, p in enumerate(self.probs):
            w.writerow([n, repr(float(p))])
        return buf.getvalue()


# ---------------------------------------------------------------- simulation


def _check_grid(grid):
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.ndim != 1 or grid.size < 1:
        raise DomainError("grid must be a non-empty 1-d array")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be nonnegative and strictly increasing")
    return grid


_POISSON_NORMAL = 1e12
_POISSON_CAP = 4e18


def _poisson(gen, lam):
    """Poisson draws; a rounded normal replaces numpy's sampler for huge means."""
    lam = np.minimum(lam, _POISSON_CAP)
    big = lam > _POISSON_NORMAL
    out = gen.poisson(np.where(big, 0.0, lam))
    if np.any(big):
        z = gen.standard_normal(int(big.sum()))
        lb = lam[big]
        out[big] = np.maximum(np.rint(lb + np.sqrt(lb) * z), 0).astype(np.int64)
    return out


def _counts_from_clock(gen, clock):
    """Unit-rate Poisson process read at the nondecreasing random times ``clock`` (rows)."""
    incr = np.diff(clock, axis=1, prepend=0.0)
    np.maximum(incr, 0.0, out=incr)
    return np.cumsum(_poisson(gen, incr), axis=1)


def _stable_at(gen, alpha, e):
    """D_alpha evaluated at the nondecreasing operational times ``e`` (rows)."""
    if alpha == 1.0:
        return e
    de = np.diff(e, axis=1, prepend=0.0)
    np.maximum(de, 0.0, out=de)
    return np.cumsum(de ** (1.0 / alpha) * standard_stable(alpha, de.shape, gen), axis=1)


def _simulate_chunk(spec, grid, n, gen, step, rel_step, exact_marginal):
    v = spec.variant
    if v == "FNPP":
        if exact_marginal:
            e = grid[0] ** spec.beta * _e_one(spec.beta, n, gen)[:, None] if spec.beta < 1 else np.full((n, 1), grid[0])
        else:
            e = inverse_stable_at(spec.beta, grid, n, gen, step=step, rel_step=rel_step, chunk=n)
        clock = np.asarray(spec.rate.cumulative(e), dtype=float).reshape(n, grid.size)
        return _counts_from_clock(gen, clock)
    levels = np.atleast_1d(np.asarray(spec.operational(grid), dtype=float))
    if spec.beta == 1.0:
        e = np.tile(levels, (n, 1))
    elif exact_marginal:
        e = levels[0] ** spec.beta * _e_one(spec.beta, n, gen)[:, None]
    else:
        e = inverse_stable_at(spec.beta, levels, n, gen, step=step, rel_step=rel_step, chunk=n)
    return _counts_from_clock(gen, _stable_at(gen, spec.alpha, e))


def _e_one(beta, n, gen):
    """Exact draws of E_beta(1) = D_beta(1)**(-beta)."""
    return standard_stable(beta, n, gen) ** (-beta)


def simulate_paths(spec, grid, n_paths, rng, step=None, rel_step=None, threads=1, chunk=4096):
    """Counts ``W(t_i)`` for ``n_paths`` independent paths on ``grid``.

    Each path shares one inverse-stable path, one stable path and one
    Poisson path across all grid times, so joint statistics (covariance,
    running minima) are those of the process.  When the grid holds a single
    positive time the exact marginal representation
    ``E_beta(x) = x**beta * E_beta(1)`` is used instead of path inversion.

    Parameters
    ----------
    spec : ProcessSpec
    grid : array_like
        Observation times, nonnegative and strictly increasing.
    n_paths : int
    rng : RngStream, numpy Generator or int
        Chunks draw from independent sub-streams in a fixed order, so the
        result does not depend on ``threads``.
    step, rel_step : float, optional
        Operational resolution of the inverse-stable sampler (see
        :func:`fracpp.subord.inverse_stable_at`).

    Returns
    -------
    ndarray of int64, shape (n_paths, len(grid))
    """
    grid = _check_grid(grid)
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    exact = grid.size == 1 and grid[0] > 0
    if step is None and spec.beta < 1.0 and not exact:
        top = grid[-1] if spec.variant == "FNPP" else float(np.max(spec.operational(grid)))
        step = default_step(spec.beta, top)
    sizes = [min(chunk, n_paths - i) for i in range(0, n_paths, chunk)]
    gens = chunk_generators(rng, len(sizes))

    def work(i):
        return _simulate_chunk(spec, grid, sizes[i], gens[i], step, rel_step, exact)

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(i) for i in range(len(sizes))]
    out = np.concatenate(parts, axis=0).astype(np.int64)
    out[:, grid == 0.0] = 0
    return out


def simulate_path(spec, grid, rng, step=None):
    """A single :class:`SamplePath` on ``grid``."""
    grid = _check_grid(grid)
    counts = simulate_paths(spec, grid, 1, rng, step=step)[0]
    return SamplePath(grid, counts, spec, rng if isinstance(rng, RngStream) else None)


def sample_marginal(spec, t, n, rng, threads=1):
    """``n`` independent exact draws of ``W(t)``."""
    if not t > 0:
        raise DomainError("t must be > 0")
    return simulate_paths(spec, [t], n, rng, threads=threads)[:, 0]


# ---------------------------------------------------------------- pmf / pgf


def _pmf_x(spec, t):
    if spec.variant == "FNPP":
        raise DomainError("the pmf series is not available for FNPP")
    x = spec.ml_argument(t)
    if x > PMF_X_MAX:
        raise AccuracyError(
            f"Lambda(t)**beta = {x:.4g} exceeds the pmf validity bound {PMF_X_MAX}; use Monte Carlo (simulate_paths)"
        )
    return x


def _series_terms(alpha, beta, x, tol):
    """Number of k-terms so the omitted part is below ``tol``, plus log10 of the largest term.

    Uses the bound ``|binom(alpha k, n)| <= 2**(alpha k + 1)``.
    """
    if x == 0.0:
        return 1, 0.0
    lx = math.log(x)
    log_tol = math.log(tol) - math.log(1e3)
    peak = -math.inf
    k = 0
    prev = math.inf
    while True:
        lt = k * lx + (alpha * k + 1) * math.log(2.0) - math.lgamma(beta * k + 1.0)
        peak = max(peak, lt)
        if k > 2 and lt < prev and lt < log_tol:
            return k + 1, peak / math.log(10.0)
        prev = lt
        k += 1
        if k > 100000:
            raise AccuracyError("pmf series did not converge")


def _snap(a):
    r = round(a)
    return float(r) if abs(a - r) < 1e-12 * max(1.0, abs(a)) else a


def _alpha_ratio(alpha):
    """alpha as an exact ratio (num, den) when it is a short decimal, e.g. 0.9 -> (9, 10).

    Under heavy cancellation every term must see the same alpha; float
    products ``alpha * k`` round differently for each k.
    """
    fr = Fraction(alpha).limit_denominator(10**6)
    if abs(float(fr) - alpha) <= 1e-15 * alpha:
        return fr.numerator, fr.denominator
    return Fraction(alpha).numerator, Fraction(alpha).denominator


def _alpha_k_mp(ratio, k):
    num, den = ratio
    return mpmath.mpf(num * k) / den


def pmf(spec, n, t, tol=1e-14):
    """``P[W(t) = n]`` from the Mittag-Leffler type series.

    Summed in extended precision with the gamma ratio
    ``Gamma(alpha k + 1) / Gamma(alpha k + 1 - n)`` written through the
    reciprocal gamma function, so terms at its poles vanish exactly.

    Returns
    -------
    SeriesResult
    """
    n = int(n)
    if n < 0:
        raise DomainError("n must be >= 0")
    x = _pmf_x(spec, t)
    if x == 0.0:
        return SeriesResult(1.0 if n == 0 else 0.0, 1, 0.0)
    k_terms, log10_peak = _series_terms(spec.alpha, spec.beta, x, tol)
    dps = int(25 + max(0.0, log10_peak))
    with mpmath.workdps(dps):
        br = _alpha_ratio(spec.beta)
        mx = -mpmath.mpf(x)
        pref = (-1) ** n / mpmath.factorial(n)
        total = mpmath.mpf(0)
        ar = _alpha_ratio(spec.alpha)
        for k in range(k_terms):
            ak = _alpha_k_mp(ar, k)
            ratio = mpmath.gamma(ak + 1) * mpmath.rgamma(ak + 1 - n)
            total += mx**k * mpmath.rgamma(_alpha_k_mp(br, k) + 1) * ratio
        value = float(pref * total)
    if not (-tol <= value <= 1 + tol):
        raise AccuracyError(f"pmf value {value} outside [0, 1]", value)
    return SeriesResult(min(max(value, 0.0), 1.0), k_terms, tol)


def _coeffs(alpha, beta, x, k_terms, dps=None):
    """c_k = (-x)^k / Gamma(beta k + 1) and the exponents alpha k.

    Float64 arrays when ``dps`` is None, otherwise lists of mpf at ``dps``.
    """
    if dps is None:
        ks = np.arange(k_terms)
        c = np.exp(ks * math.log(x) - special.gammaln(beta * ks + 1.0)) * np.where(ks % 2 == 0, 1.0, -1.0)
        return c, np.array([_snap(alpha * k) for k in range(k_terms)])
    ar = _alpha_ratio(alpha)
    br = _alpha_ratio(beta)
    with mpmath.workdps(dps):
        c = [(-mpmath.mpf(x)) ** k * mpmath.rgamma(_alpha_k_mp(br, k) + 1) for k in range(k_terms)]
        ak = [_alpha_k_mp(ar, k) for k in range(k_terms)]
    return c, ak


def survival(spec, n, t, tol=1e-14):
    """``P[W(t) > n]`` from the series ``-sum_{k>=1} c_k (-1)^n binom(alpha k - 1, n)``.

    Uses ``sum_{j<=n} (-1)^j binom(a, j) = (-1)^n binom(a - 1, n)``; it
    gives the exact tail mass that a finite pmf table leaves out.
    """
    n = int(n)
    if n < 0:
        raise DomainError("n must be >= 0")
    x = _pmf_x(spec, t)
    if x == 0.0:
        return 0.0
    k_terms, log10_peak = _series_terms(spec.alpha, spec.beta, x, tol)
    dps = int(25 + max(0.0, log10_peak))
    c, ak = _coeffs(spec.alpha, spec.beta, x, k_terms, dps)
    with mpmath.workdps(dps):
        sign = -1 if n % 2 else 1
        total = mpmath.mpf(0)
        for k in range(1, k_terms):
            total += c[k] * sign * mpmath.binomial(ak[k] - 1, n)
        return float(-total)


def _pmf_block_float(c, ak, n0, m, carry):
    """p(n0 .. n0+m-1) in float64; ``carry`` holds (-1)^n0 binom(a_k, n0) per k."""
    ns = np.arange(n0, n0 + m, dtype=float)
    ratios = (ns[None, :] - ak[:, None]) / (ns[None, :] + 1.0)
    b = np.empty((ak.size, m))
    b[:, 0] = carry
    if m > 1:
        b[:, 1:] = carry[:, None] * np.cumprod(ratios[:, :-1], axis=1)
    next_carry = b[:, -1] * ratios[:, -1]
    return c @ b, next_carry


def pmf_vector(spec, t, n_max=None, tol=1e-12, n_cap=1_000_000):
    """``p(0), ..., p(n_max)`` in one pass.

    The binomial factors follow the recurrence
    ``b_k(n+1) = b_k(n) (n - alpha k) / (n + 1)``.  Float64 is used when the
    largest series term is small enough that cancellation costs at most
    three digits, extended precision otherwise.

    With ``n_max=None`` the table stops at the first n where the cumulative
    mass reaches ``1 - tol`` and ``p(n) < tol / 10``, or at ``n_cap``
    (``converged=False``).  Heavy tails (alpha < 1) decay like n**(-alpha),
    so the cap is reached there; ``tail_bound`` still reports the exact
    missing mass.

    Returns
    -------
    PmfTable
    """
    x = _pmf_x(spec, t)
    fixed = n_max is not None
    if fixed and n_max < 0:
        raise DomainError("n_max must be >= 0")
    if x == 0.0:
        m = n_max if fixed else 0
        probs = np.zeros(m + 1)
        probs[0] = 1.0
        return PmfTable(probs, m, 0.0, 0.0, True, 0, 1)
    k_terms, log10_peak = _series_terms(spec.alpha, spec.beta, x, min(tol, 1e-14))
    use_mp = log10_peak > 3.0
    limit = n_max if fixed else (min(n_cap, 2000) if use_mp else n_cap)

    out = []
    total = 0.0
    converged = fixed
    if not use_mp:
        c, ak = _coeffs(spec.alpha, spec.beta, x, k_terms)
        carry = np.ones(k_terms)
        n0 = 0
        block = 256
        while n0 <= limit:
            m = min(block, limit + 1 - n0)
            p, carry = _pmf_block_float(c, ak, n0, m, carry)
            if not fixed:
                cums = total + np.cumsum(p)
                stop = np.flatnonzero((cums >= 1.0 - tol) & (np.abs(p) < tol / 10.0))
                if stop.size:
                    out.append(p[: stop[0] + 1])
                    converged = True
                    break
            out.append(p)
            total += float(p.sum())
            n0 += m
            block = min(block * 2, 65536)
    else:
        dps = int(25 + log10_peak)
        c, ak = _coeffs(spec.alpha, spec.beta, x, k_terms, dps)
        with mpmath.workdps(dps):
            b = [mpmath.mpf(1)] * k_terms
            a_mp = ak
            cum = mpmath.mpf(0)
            n = 0
            while n <= limit:
                pn = mpmath.fsum(ci * bi for ci, bi in zip(c, b))
                out.append(np.array([float(pn)]))
                cum += pn
                if not fixed and cum >= 1 - tol and abs(pn) < tol / 10:
                    converged = True
                    break
                b = [bi * (n - ai) / (n + 1) for bi, ai in zip(b, a_mp)]
                n += 1
    probs = np.concatenate(out)
    m = probs.size - 1

    clamped = 0
    neg = probs < 0
    if np.any(neg):
        if np.any(probs < -max(tol, 1e-10)):
            raise AccuracyError(f"pmf_vector produced {probs.min():.3g} < 0; series lost accuracy", probs)
        clamped = int(neg.sum())
        warnings.warn(f"clamped {clamped} slightly negative pmf entries to 0", RuntimeWarning, stacklevel=2)
        probs = np.where(neg, 0.0, probs)
    if np.any(probs > 1.0 + tol):
        raise AccuracyError("pmf_vector produced a probability above 1", probs)
    tail_mass = float(1.0 - math.fsum(probs))
    tail_bound = survival(spec, m, t)
    return PmfTable(probs, m, tail_mass, tail_bound, converged, clamped, k_terms)


def pgf(spec, s, t):
    """Generating function ``E[s**W(t)] = L_beta(-(1-s)**alpha x)``.

    ``G(s, 0) = 1`` since ``Lambda(0) = 0``.
    """
    if not (0.0 <= s <= 1.0):
        raise DomainError(f"s must lie in [0, 1], got {s}")
    if spec.variant == "FNPP":
        raise DomainError("the Mittag-Leffler pgf does not apply to FNPP")
    x = spec.ml_argument(t)
    if s == 1.0 or x == 0.0:
        return 1.0
    return mittag_leffler(spec.beta, -((1.0 - s) ** spec.alpha) * x).value


def pgf_min_uniform_mc(spec, s, t, n_paths, rng):
    """Monte Carlo estimate of ``P[min_{1<=i<=M} U_i**(1/alpha) >= 1 - s]``.

    ``M`` is the count of the time-fractional (alpha = 1) companion
    ``N(E_beta(Lambda(t)))`` with the same beta and clock; for M = 0 the
    minimum is +inf and the event holds.  The minimum of M uniforms is drawn
    directly as ``1 - V**(1/M)``.  This estimates ``pgf(spec, s, t)``.
    """
    if not (0.0 <= s <= 1.0):
        raise DomainError(f"s must lie in [0, 1], got {s}")
    if spec.variant == "FNPP":
        raise DomainError("the min-uniform representation does not apply to FNPP")
    if s == 1.0:
        return MonteCarloEstimate(1.0, 0.0, int(n_paths))
    gen = as_generator(rng)
    if spec.variant == "STFPP":
        comp = ProcessSpec("STFPP", 1.0, spec.beta, lambda_hom=spec.lambda_hom ** spec.alpha)
    else:
        comp = ProcessSpec("NTFPP" if spec.beta < 1 else "NPP", 1.0, spec.beta, spec.rate)
    if t == 0:
        return MonteCarloEstimate(1.0, 0.0, int(n_paths))
    m = sample_marginal(comp, t, n_paths, gen)
    v = gen.random(n_paths)
    u_min = np.where(m > 0, -np.expm1(np.log1p(-v) / np.maximum(m, 1)), np.inf)
    hit = u_min ** (1.0 / spec.alpha) >= 1.0 - s
    return MonteCarloEstimate.from_samples(hit.astype(float))


# ---------------------------------------------------------------- moments


def _q1_d1(beta):
    q1 = 1.0 / math.gamma(1.0 + beta)
    d1 = beta * q1 * q1 * special.beta(beta, 1.0 + beta)
    return q1, d1


def ntfpp_mean(beta, rate, t):
    """``E W(t) = q1 Lambda(t)**beta`` with ``q1 = 1/Gamma(1+beta)``."""
    q1, _ = _q1_d1(beta)
    return q1 * rate.cumulative(t) ** beta


def ntfpp_var(beta, rate, t):
    """``q1 L (1 - q1 L) + 2 d1 L**2`` with ``L = Lambda(t)**beta``, ``d1 = beta q1^2 B(beta, 1+beta)``."""
    q1, d1 = _q1_d1(beta)
    lb = rate.cumulative(t) ** beta
    return q1 * lb * (1.0 - q1 * lb) + 2.0 * d1 * lb * lb


def ntfpp_cov(beta, rate, s, t):
    """Covariance of the NTFPP at times ``0 < s <= t``."""
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    q1, d1 = _q1_d1(beta)
    ls = rate.cumulative(s)
    lt = rate.cumulative(t)
    if lt == 0.0:
        return 0.0
    return (
        q1 * ls**beta
        + d1 * ls ** (2 * beta)
        - q1 * q1 * ls**beta * lt**beta
        + q1 * q1 * beta * lt ** (2 * beta) * incomplete_beta(beta, 1.0 + beta, ls / lt)
    )


def inverse_stable_moment(q, beta):
    """Exact ``E[E_beta(1)**q] = Gamma(1+q) / Gamma(1+beta q)`` for q > -1."""
    if not q > -1:
        raise DomainError("moment order must exceed -1")
    return math.exp(math.lgamma(1.0 + q) - math.lgamma(1.0 + beta * q))


def frac_moment_inverse_stable(a, beta, n_draws, rng):
    """Monte Carlo ``E[E_beta(1)**a]`` from exact marginal draws."""
    if not a > 0:
        raise DomainError("a must be > 0")
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if beta == 1.0:
        return MonteCarloEstimate(1.0, 0.0, int(n_draws))
    e = _e_one(beta, n_draws, as_generator(rng))
    return MonteCarloEstimate.from_samples(e**a)


def _weibull_moments(beta, rate, moment_source):
    if not isinstance(rate, Weibull):
        raise DomainError("FNPP moments are implemented for the Weibull rate only")
    a = rate.a
    if moment_source == "exact":
        m1 = inverse_stable_moment(a, beta)
        m2 = inverse_stable_moment(2 * a, beta)
    elif callable(moment_source):
        m1 = float(moment_source(a))
        m2 = float(moment_source(2 * a))
    else:
        raise DomainError("moment_source must be 'exact' or a callable q -> E[E_beta(1)**q]")
    return m1, max(m2 - m1 * m1, 0.0)


def fnpp_mean(beta, rate, t, moment_source="exact"):
    """``E W(t) = t**(a beta) / b**a * E[E_beta(1)**a]`` (Weibull rate)."""
    m1, _ = _weibull_moments(beta, rate, moment_source)
    return t ** (rate.a * beta) / rate.b**rate.a * m1


def fnpp_var(beta, rate, t, moment_source="exact"):
    """``Var W(t) = E[Lambda(E(t))] + Var[Lambda(E(t))]``."""
    return fnpp_cov(beta, rate, t, t, moment_source)


def fnpp_cov(beta, rate, s, t, moment_source="exact"):
    """FNPP covariance for a Weibull rate, ``0 < s <= t``.

    ``(s**(a beta) / b**a) E[E**a] + ((s t)**(a beta) / b**(2a)) Var[E**a]``
    with ``E = E_beta(1)``.  ``moment_source`` is ``"exact"`` or a callable
    returning ``E[E_beta(1)**q]`` (e.g. a Monte Carlo estimate).
    """
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    m1, v = _weibull_moments(beta, rate, moment_source)
    a, b = rate.a, rate.b
    return s ** (a * beta) / b**a * m1 + (s * t) ** (a * beta) / b ** (2 * a) * v


def _moment_kind(spec):
    if spec.variant == "FNPP":
        return "fnpp", spec.rate
    if spec.alpha < 1.0:
        raise DomainError(_INFINITE_MEAN)
    if spec.variant == "STFPP":
        return "ntfpp", Constant(spec.lambda_hom ** (1.0 / spec.beta))
    return "ntfpp", spec.rate


def mean(spec, t):
    kind, rate = _moment_kind(spec)
    return fnpp_mean(spec.beta, rate, t) if kind == "fnpp" else ntfpp_mean(spec.beta, rate, t)


def variance(spec, t):
    kind, rate = _moment_kind(spec)
    return fnpp_var(spec.beta, rate, t) if kind == "fnpp" else ntfpp_var(spec.beta, rate, t)


def covariance(spec, s, t):
    kind, rate = _moment_kind(spec)
    return fnpp_cov(spec.beta, rate, s, t) if kind == "fnpp" else ntfpp_cov(spec.beta, rate, s, t)


# ---------------------------------------------------------------- arrival times


def arrival_time_cdf(spec, n, t):
    """``P[J_n <= t] = P[W(t) >= n] = 1 - sum_{r<n} p(r)``."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return 0.0
    table = pmf_vector(spec, t, n_max=n - 1)
    return float(min(max(1.0 - math.fsum(table.probs), 0.0), 1.0))
