"""Pole-safe special functions used by the process formulas.

The Mittag-Leffler function is summed from its Taylor series.  On the
negative real axis that series alternates and cancels badly once |z| grows,
so the default ``method="auto"`` reroutes such arguments either to an
extended-precision (mpmath) summation or, for ``gamma == 1`` and
``beta < 1``, to the real integral representation

    L_beta(-x) = sin(beta*pi)/(beta*pi) * int_0^inf exp(-(u*x)**(1/beta))
                 / (u**2 + 2*u*cos(beta*pi) + 1) du,

which has a smooth positive integrand.  ``method="series"`` keeps the plain
float64 series with compensated summation and raises ``AccuracyError``
once the cancellation ratio passes ``cancellation_limit``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, DomainError

__all__ = [
    "SeriesResult",
    "mittag_leffler",
    "mittag_leffler_two_param",
    "ml_array",
    "recip_gamma",
    "incomplete_beta",
    "caputo_power",
    "caputo_numeric",
]

EPS = 1e-16
# Cancellation ratio (largest term / |sum|) the float64 pass may absorb
# before "auto" switches to an exact route (leaves ~12 good digits).
_DOUBLE_RATIO_OK = 1e3
_MAX_DPS = 4000


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series together with its truncation diagnostics."""

    value: float
    terms_used: int
    trunc_error_bound: float

    def __post_init__(self):
        if self.terms_used < 1:
            raise ValueError("terms_used must be >= 1")
        if not self.trunc_error_bound >= 0:
            raise ValueError("trunc_error_bound must be >= 0")

    def __float__(self):
        return float(self.value)


def _check_beta(beta):
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"order beta must lie in (0, 1], got {beta!r}")


def _log_term(beta, gamma, log_abs_z, k):
    return k * log_abs_z - math.lgamma(beta * k + gamma)


def _peak(beta, gamma, z, max_terms):
    """Locate the largest term of sum z^k / Gamma(beta k + gamma).

    The log-magnitude is concave in k, so the first decrease marks the peak.
    Returns ``(k_peak, log_peak)``; ``k_peak`` is None when no peak is found
    within ``max_terms`` terms.
    """
    la = math.log(abs(z))
    best = _log_term(beta, gamma, la, 0)
    for k in range(1, max_terms + 1):
        lm = _log_term(beta, gamma, la, k)
        if lm < best:
            return k - 1, best
        best = lm
    return None, best


def _series_float(beta, gamma, z, max_terms):
    terms = []
    running = 0.0
    k = 0
    while True:
        x = beta * k + gamma
        if x < 170.0 and k * math.log(abs(z)) < 700.0:
            term = z**k / math.gamma(x)
        else:
            sign = -1.0 if (z < 0 and k % 2) else 1.0
            term = sign * math.exp(_log_term(beta, gamma, math.log(abs(z)), k))
        terms.append(term)
        running += term
        k += 1
        if k > 2 and abs(term) < abs(terms[-2]) and (abs(term) <= EPS * abs(running) or term == 0.0):
            break
        if k >= max_terms:
            raise AccuracyError(
                f"Mittag-Leffler series did not converge in {max_terms} terms",
                math.fsum(terms),
            )
    value = math.fsum(terms)
    biggest = max(abs(t) for t in terms)
    x = beta * k + gamma
    nxt = abs(z) ** k / math.gamma(x) if x < 170.0 and k * math.log(abs(z)) < 700 else 0.0
    bound = 2.0 * nxt + 4.0 * EPS * biggest * math.sqrt(len(terms))
    ratio = biggest / abs(value) if value != 0.0 else math.inf
    return value, len(terms), bound, ratio


def _series_mp(beta, gamma, z, dps, max_terms):
    with mpmath.workdps(dps):
        zm = mpmath.mpf(z)
        bm = mpmath.mpf(beta)
        gm = mpmath.mpf(gamma)
        tol = mpmath.mpf(10) ** (-dps)
        total = mpmath.mpf(0)
        biggest = mpmath.mpf(0)
        prev = None
        for k in range(max_terms):
            term = zm**k * mpmath.rgamma(bm * k + gm)
            total += term
            biggest = max(biggest, abs(term))
            if prev is not None and abs(term) < abs(prev) and abs(term) <= tol * abs(total):
                bound = abs(term) + biggest * tol * 10
                return float(total), k + 1, float(bound)
            prev = term
    raise AccuracyError(
        f"extended Mittag-Leffler series did not converge in {max_terms} terms",
        float(total),
    )


def _ml_integral(beta, x):
    """L_beta(-x) for 0 < beta < 1, x > 0 from the integral representation."""
    c = math.cos(beta * math.pi)
    inv_beta = 1.0 / beta

    def f(u):
        return math.exp(-((u * x) ** inv_beta)) / (u * u + 2.0 * u * c + 1.0)

    cuts = {0.0, 1.0 / x, 4.0 / x}
    if c < 0.0:
        cuts.update({-c, -2.0 * c})
    cuts = sorted(cuts)
    total = 0.0
    err = 0.0
    neval = 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, e, info = integrate.quad(f, lo, hi, epsabs=1e-17, epsrel=1e-13, limit=200, full_output=1)[:3]
        total += val
        err += e
        neval += info["neval"]
    val, e, info = integrate.quad(f, cuts[-1], np.inf, epsabs=1e-17, epsrel=1e-13, limit=200, full_output=1)[:3]
    total += val
    err += e
    neval += info["neval"]
    scale = math.sin(beta * math.pi) / (beta * math.pi)
    return scale * total, neval, scale * err


def _ml(beta, gamma, z, method, cancellation_limit, max_terms):
    _check_beta(beta)
    if not gamma > 0:
        raise DomainError(f"second parameter gamma must be > 0, got {gamma!r}")
    if not math.isfinite(z):
        raise DomainError(f"argument z must be finite, got {z!r}")
    if method not in ("auto", "series"):
        raise ValueError(f"unknown method {method!r}")
    if z == 0.0:
        return SeriesResult(1.0 / math.gamma(gamma), 1, 0.0)

    k_peak, log_peak = _peak(beta, gamma, z, max_terms)
    if k_peak is None and z < 0 and gamma == 1.0 and beta < 1.0 and method == "auto":
        value, neval, err = _ml_integral(beta, -z)
        return SeriesResult(value, max(neval, 1), err)
    if k_peak is None or (z > 0 and log_peak > 700.0):
        raise AccuracyError(f"Mittag-Leffler series for z={z} is outside the supported range")

    if z > 0:
        value, n, bound, _ = _series_float(beta, gamma, z, max_terms)
        return SeriesResult(value, n, bound)

    # Lower bound on |result| used to predict cancellation for the
    # classical gamma == 1 case; other gammas are assumed O(1).
    if gamma == 1.0 and beta == 1.0:
        log_result = z
    elif gamma == 1.0:
        log_result = -math.log1p(math.gamma(1.0 - beta) * -z)
    else:
        log_result = 0.0
    lost = (log_peak - log_result) / math.log(10.0)

    if method == "series" or lost <= math.log10(_DOUBLE_RATIO_OK):
        if log_peak > 700.0:
            raise AccuracyError(f"series terms overflow for z={z}")
        value, n, bound, ratio = _series_float(beta, gamma, z, max_terms)
        if method == "auto" and ratio <= _DOUBLE_RATIO_OK:
            return SeriesResult(value, n, bound)
        if method == "series":
            if ratio > cancellation_limit:
                raise AccuracyError(
                    f"catastrophic cancellation in Mittag-Leffler series at z={z} "
                    f"(largest term / |sum| = {ratio:.3g})",
                    value,
                )
            return SeriesResult(value, n, bound)
        lost = max(lost, math.log10(ratio))

    if gamma == 1.0 and beta < 1.0:
        value, neval, err = _ml_integral(beta, -z)
        return SeriesResult(value, max(neval, 1), err)
    dps = int(math.ceil(lost)) + 25
    if dps > _MAX_DPS:
        raise AccuracyError(f"Mittag-Leffler argument z={z} needs more than {_MAX_DPS} digits")
    value, n, bound = _series_mp(beta, gamma, z, dps, max_terms)
    return SeriesResult(value, n, bound)


def mittag_leffler(beta, z, *, method="auto", cancellation_limit=1e12, max_terms=20000):
    """One-parameter Mittag-Leffler function ``sum_k z^k / Gamma(1 + beta k)``.

    Parameters
    ----------
    beta : float
        Order in (0, 1].
    z : float
        Real argument.  On ``z <= 0`` the value lies in (0, 1].
    method : {"auto", "series"}
        ``"series"`` forces the float64 Taylor series (compensated sum) and
        raises :class:`AccuracyError` when the ratio of the largest term to
        the result exceeds ``cancellation_limit``.  ``"auto"`` reroutes
        cancelling arguments to an exact representation instead.

    Returns
    -------
    SeriesResult
    """
    return _ml(float(beta), 1.0, float(z), method, cancellation_limit, max_terms)


def mittag_leffler_two_param(beta, gamma, z, *, method="auto", cancellation_limit=1e12, max_terms=20000):
    """Two-parameter Mittag-Leffler function ``sum_k z^k / Gamma(beta k + gamma)``."""
    return _ml(float(beta), float(gamma), float(z), method, cancellation_limit, max_terms)


def ml_array(beta, z):
    """Vectorised ``mittag_leffler(beta, z).value`` over an array of arguments."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    flat = out.reshape(-1)
    for i, zi in enumerate(z.reshape(-1)):
        flat[i] = _ml(float(beta), 1.0, float(zi), "auto", 1e12, 20000).value
    return out


def recip_gamma(x):
    """Reciprocal gamma function ``1 / Gamma(x)``.

    Entire, so it is defined everywhere and is exactly zero at the poles
    ``x = 0, -1, -2, ...``.
    """
    out = special.rgamma(x)
    return float(out) if np.ndim(out) == 0 else out


def incomplete_beta(a, b, x):
    """Non-regularised incomplete beta integral ``int_0^x t^(a-1) (1-t)^(b-1) dt``."""
    if not (a > 0 and b > 0):
        raise DomainError(f"incomplete_beta needs a, b > 0, got a={a}, b={b}")
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)) or np.any(~np.isfinite(xa)):
        raise DomainError("incomplete_beta needs x in [0, 1]")
    out = special.betainc(a, b, xa) * special.beta(a, b)
    return float(out) if np.ndim(out) == 0 else out


def caputo_power(p, beta, t):
    """Caputo derivative of order ``beta`` of ``t**p`` (p > 0), in closed form."""
    if not p > 0:
        raise DomainError(f"caputo_power needs p > 0, got {p}; the derivative of a constant is 0")
    _check_beta(beta)
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    coef = math.gamma(p + 1.0) * recip_gamma(p - beta + 1.0)
    if coef == 0.0:
        return 0.0
    if t == 0.0:
        e = p - beta
        return 0.0 if e > 0 else (coef if e == 0 else math.inf)
    return coef * t ** (p - beta)


def caputo_numeric(f, beta, t, n_grid=512):
    """Caputo derivative of order ``beta`` at time ``t`` by product integration.

    ``f`` is either a callable (evaluated on ``n_grid + 1`` uniform nodes of
    [0, t]) or an array of samples on such nodes.  The function is
    interpolated linearly and the kernel ``(t - s)**(-beta)`` is integrated
    exactly on each cell (the L1 scheme).  For ``beta == 1`` a second-order
    backward difference of ``f`` at ``t`` is returned.
    """
    _check_beta(beta)
    if not t > 0:
        raise DomainError(f"caputo_numeric needs t > 0, got {t}")
    if callable(f):
        if n_grid < 16:
            raise DomainError(f"n_grid must be >= 16, got {n_grid}")
        s = np.linspace(0.0, t, n_grid + 1)
        try:
            fs = np.asarray(f(s), dtype=float)
            if fs.shape != s.shape:
                raise ValueError
        except (TypeError, ValueError):
            fs = np.array([f(si) for si in s], dtype=float)
    else:
        fs = np.asarray(f, dtype=float)
        n_grid = fs.size - 1
        if n_grid < 16:
            raise DomainError(f"need at least 17 samples, got {fs.size}")
    h = t / n_grid

    if beta == 1.0:
        return float((3.0 * fs[-1] - 4.0 * fs[-2] + fs[-3]) / (2.0 * h))

    # (t - s_j)^(1-beta) - (t - s_{j+1})^(1-beta) on the uniform grid
    m = np.arange(n_grid, -1, -1, dtype=float) * h
    powed = m ** (1.0 - beta)
    weights = powed[:-1] - powed[1:]
    df = np.diff(fs)
    return float(np.dot(df, weights) / (h * math.gamma(2.0 - beta)))
