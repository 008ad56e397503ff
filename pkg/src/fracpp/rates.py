"""Intensity / rate function pairs (lambda(t), Lambda(t)).

Every rate is an immutable dataclass with vectorised ``cumulative`` and
``intensity`` methods; the module-level functions of the same names add
domain checks.  ``Lambda(0) = 0`` for every kind.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import ClassVar

import numpy as np
from scipy import optimize

from .errors import DomainError

__all__ = [
    "RateFunction",
    "Weibull",
    "GompertzMakeham",
    "MusaOkumoto",
    "Constant",
    "CustomTable",
    "cumulative",
    "intensity",
    "inverse_cumulative",
    "check_consistency",
    "parse_rate",
    "rate_from_dict",
    "load_custom_table",
]


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


class RateFunction:
    """Base class; subclasses define ``_cum`` and ``_rate`` on arrays."""

    kind: ClassVar[str] = ""

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("rate functions are defined for t >= 0")
        return _scalar_or_array(self._cum(t))

    def intensity(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("rate functions are defined for t >= 0")
        return _scalar_or_array(self._rate(t))

    def to_dict(self):
        d = {"kind": self.kind}
        d.update(asdict(self))
        return d

    def describe(self):
        params = ",".join(f"{k}={v:g}" for k, v in asdict(self).items() if isinstance(v, (int, float)) and not isinstance(v, bool))
        return f"{self.kind}:{params}" if params else self.kind


def _positive(**kw):
    for name, value in kw.items():
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"parameter {name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class Weibull(RateFunction):
    """``Lambda(t) = (t/b)**a``, ``lambda(t) = (a/b) (t/b)**(a-1)``."""

    a: float
    b: float
    kind: ClassVar[str] = "weibull"

    def __post_init__(self):
        _positive(a=self.a, b=self.b)

    def _cum(self, t):
        return (t / self.b) ** self.a

    def _rate(self, t):
        if self.a < 1 and np.any(t == 0):
            raise DomainError("Weibull intensity diverges at t=0 when a < 1")
        return (self.a / self.b) * (t / self.b) ** (self.a - 1.0)


@dataclass(frozen=True)
class GompertzMakeham(RateFunction):
    """Gompertz-Makeham rate.

    By default ``Lambda(t) = (a/b)(exp(b t) - 1) + mu t`` with intensity
    ``a exp(b t) + mu``.  ``table_form=True`` selects the alternative
    ``Lambda(t) = a(exp(b t) - 1) + mu t`` with intensity ``a b exp(b t) + mu``.
    Both pairs satisfy ``Lambda' = lambda``.
    """

    a: float
    b: float
    mu: float
    table_form: bool = False
    kind: ClassVar[str] = "gompertz-makeham"

    def __post_init__(self):
        _positive(a=self.a, b=self.b, mu=self.mu)

    def _scale(self):
        return self.a if self.table_form else self.a / self.b

    def _cum(self, t):
        return self._scale() * np.expm1(self.b * t) + self.mu * t

    def _rate(self, t):
        return self._scale() * self.b * np.exp(self.b * t) + self.mu


@dataclass(frozen=True)
class MusaOkumoto(RateFunction):
    """``Lambda(t) = a log(1 + b t)``, ``lambda(t) = a b / (1 + b t)``."""

    a: float
    b: float
    kind: ClassVar[str] = "musa-okumoto"

    def __post_init__(self):
        _positive(a=self.a, b=self.b)

    def _cum(self, t):
        return self.a * np.log1p(self.b * t)

    def _rate(self, t):
        return self.a * self.b / (1.0 + self.b * t)


@dataclass(frozen=True)
class Constant(RateFunction):
    """Homogeneous rate: ``Lambda(t) = lam * t``."""

    lam: float
    kind: ClassVar[str] = "constant"

    def __post_init__(self):
        _positive(lam=self.lam)

    def _cum(self, t):
        return self.lam * t

    def _rate(self, t):
        return np.full_like(t, self.lam, dtype=float)


@dataclass(frozen=True)
class CustomTable(RateFunction):
    """Piecewise-linear ``Lambda`` through tabulated ``(knot, value)`` pairs.

    Beyond the last knot the final slope is continued.
    """

    knots: tuple = field(default=())
    values: tuple = field(default=())
    kind: ClassVar[str] = "table"

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        if len(knots) < 2 or len(knots) != len(values):
            raise DomainError("CustomTable needs at least two (time, value) pairs of equal length")
        if knots[0] != 0.0 or values[0] != 0.0:
            raise DomainError("CustomTable must start at (0, 0)")
        for i in range(1, len(knots)):
            if not knots[i] > knots[i - 1]:
                raise DomainError(f"CustomTable knots must be strictly increasing (row {i + 1})")
            if values[i] < values[i - 1]:
                raise DomainError(f"CustomTable values must be nondecreasing (row {i + 1})")

    def _slopes(self):
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        return np.diff(v) / np.diff(k)

    def _cum(self, t):
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        out = np.interp(t, k, v)
        beyond = t > k[-1]
        if np.any(beyond):
            out = np.where(beyond, v[-1] + self._slopes()[-1] * (t - k[-1]), out)
        return out

    def _rate(self, t):
        slopes = self._slopes()
        idx = np.searchsorted(np.asarray(self.knots), t, side="right") - 1
        return slopes[np.clip(idx, 0, slopes.size - 1)]

    def describe(self):
        return f"table:{len(self.knots)} knots"


def cumulative(rate, t):
    """``Lambda(t)``; raises :class:`DomainError` for negative times."""
    return rate.cumulative(t)


def intensity(rate, t):
    """``lambda(t)``; raises :class:`DomainError` where it diverges."""
    return rate.intensity(t)


def inverse_cumulative(rate, level):
    """Smallest ``t`` with ``Lambda(t) = level`` (scalar level >= 0)."""
    if level < 0:
        raise DomainError("level must be >= 0")
    if level == 0:
        return 0.0
    if isinstance(rate, Weibull):
        return rate.b * level ** (1.0 / rate.a)
    if isinstance(rate, Constant):
        return level / rate.lam
    if isinstance(rate, MusaOkumoto):
        return math.expm1(level / rate.a) / rate.b
    hi = 1.0
    while rate.cumulative(hi) < level:
        hi *= 2.0
    return optimize.brentq(lambda x: rate.cumulative(x) - level, 0.0, hi, xtol=1e-14, rtol=1e-14)


def check_consistency(rate, grid, h=1e-5):
    """Largest ``|dLambda/dt - lambda|`` over ``grid`` using central differences.

    The half-width is ``h * max(1, t)`` so rounding stays relative to the
    size of t; points closer than that to zero use a forward difference.
    """
    grid = np.asarray(grid, dtype=float)
    step = h * np.maximum(1.0, np.abs(grid))
    lo = np.maximum(grid - step, 0.0)
    hi = grid + step
    slope = (rate.cumulative(hi) - rate.cumulative(lo)) / (hi - lo)
    return float(np.max(np.abs(slope - rate.intensity(grid))))


_KINDS = {
    "weibull": (Weibull, ("a", "b")),
    "gompertz-makeham": (GompertzMakeham, ("a", "b", "mu")),
    "makeham": (GompertzMakeham, ("a", "b", "mu")),
    "gm": (GompertzMakeham, ("a", "b", "mu")),
    "musa-okumoto": (MusaOkumoto, ("a", "b")),
    "mo": (MusaOkumoto, ("a", "b")),
    "constant": (Constant, ("lam",)),
}


def parse_rate(text):
    """Parse ``kind:key=value,...`` such as ``weibull:a=2,b=1``.

    ``table:<path>`` loads a :class:`CustomTable` from CSV.  The
    Gompertz-Makeham kind also accepts ``table_form=1``.
    """
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "table":
        return load_custom_table(rest)
    if kind not in _KINDS:
        raise DomainError(f"unknown rate kind {kind!r}; expected one of {sorted(set(_KINDS))} or table")
    cls, names = _KINDS[kind]
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise DomainError(f"rate parameter {item!r} is not of the form key=value")
        key = key.strip()
        if key == "lambda":
            key = "lam"
        if key == "table_form" and cls is GompertzMakeham:
            params[key] = val.strip().lower() in ("1", "true", "yes")
            continue
        if key not in names:
            raise DomainError(f"unknown parameter {key!r} for {kind} (expected {', '.join(names)})")
        params[key] = float(val)
    missing = [n for n in names if n not in params]
    if missing:
        raise DomainError(f"{kind} rate is missing parameter(s): {', '.join(missing)}")
    return cls(**params)


def rate_from_dict(d):
    """Inverse of :meth:`RateFunction.to_dict`."""
    d = dict(d)
    kind = d.pop("kind")
    if kind == "table":
        return CustomTable(tuple(d["knots"]), tuple(d["values"]))
    cls, _ = _KINDS[kind]
    return cls(**d)


def load_custom_table(path):
    """Read a two-column CSV ``time,Lambda`` (with header) into a :class:`CustomTable`."""
    knots, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DomainError(f"{path}: expected a header row with two columns")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}: row {lineno} must have exactly two columns")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                raise DomainError(f"{path}: row {lineno} is not numeric: {row!r}") from None
            if knots and not t > knots[-1]:
                raise DomainError(f"{path}: row {lineno}: times must be strictly increasing")
            if values and v < values[-1]:
                raise DomainError(f"{path}: row {lineno}: Lambda values must be nondecreasing")
            if not knots and (t != 0.0 or v != 0.0):
                raise DomainError(f"{path}: row {lineno}: the first data row must be 0,0")
            knots.append(t)
            values.append(v)
    return CustomTable(tuple(knots), tuple(values))
