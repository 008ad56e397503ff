"""Stable subordinator D_alpha and its inverse E_beta.

``D_alpha`` has Laplace transform ``E exp(-s D(t)) = exp(-t s**alpha)``;
single draws use Kanter's representation.  The inverse subordinator
``E_beta(t) = inf{r : D_beta(r) > t}`` is sampled either exactly at a single
time through self-similarity, ``E_beta(t) = (t / D_beta(1))**beta``, or
jointly at several times by walking a discretised D_beta path until it
crosses each level.  Only the second sampler reproduces the joint law
(covariances, running minima); the marginal one is exact but gives
independent values per call.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "RngStream",
    "as_generator",
    "chunk_generators",
    "SubordinatorPath",
    "standard_stable",
    "sample_stable",
    "sample_stable_path",
    "sample_inverse_stable_marginal",
    "sample_inverse_stable_path",
    "inverse_stable_at",
    "default_step",
]


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Generators are Philox (counter-based); ``generator(*keys)`` derives
    independent sub-streams, e.g. one per Monte Carlo chunk.
    """

    seed: int
    stream_id: int = 0

    def generator(self, *keys):
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id), *map(int, keys)))
        return np.random.Generator(np.random.Philox(ss))

    def to_dict(self):
        return {"seed": int(self.seed), "stream_id": int(self.stream_id)}


def as_generator(rng):
    """Accept an RngStream, a numpy Generator, an int seed or None."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(0 if rng is None else int(rng)).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def chunk_generators(rng, n):
    """``n`` independent generators whose order does not depend on threading."""
    if isinstance(rng, RngStream):
        return [rng.generator(k) for k in range(n)]
    return as_generator(rng).spawn(n)


@dataclass
class SubordinatorPath:
    times: np.ndarray
    values: np.ndarray
    kind: str
    index: float


def _check_index(x, name):
    if not (0.0 < x <= 1.0):
        raise DomainError(f"{name} must lie in (0, 1], got {x!r}")


def standard_stable(alpha, size, gen):
    """Draws of D_alpha(1) (Laplace transform ``exp(-s**alpha)``), Kanter's method."""
    if alpha == 1.0:
        return np.ones(size)
    u = math.pi * (1.0 - gen.random(size))  # (0, pi]
    w = gen.standard_exponential(size)
    log_d = (np.log(np.sin(alpha * u)) - np.log(np.sin(u))) / alpha + (1.0 - alpha) / alpha * (
        np.log(np.sin((1.0 - alpha) * u)) - np.log(np.sin(alpha * u)) - np.log(w)
    )
    return np.exp(log_d)


def sample_stable(alpha, t, rng, size=None):
    """One draw (or ``size`` draws) of ``D_alpha(t)``; exactly ``t`` when alpha = 1."""
    _check_index(alpha, "alpha")
    if not t > 0:
        raise DomainError(f"operational time must be > 0, got {t}")
    if alpha == 1.0:
        return float(t) if size is None else np.full(size, float(t))
    d = t ** (1.0 / alpha) * standard_stable(alpha, 1 if size is None else size, as_generator(rng))
    return float(d[0]) if size is None else d


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise DomainError("grid must be a non-empty 1-d array")
    if grid[0] != 0.0:
        raise DomainError("grid must start at 0")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    return grid


def sample_stable_path(alpha, grid, rng):
    """``D_alpha`` at the points of ``grid`` (independent stable increments)."""
    _check_index(alpha, "alpha")
    grid = _check_grid(grid)
    if alpha == 1.0:
        return SubordinatorPath(grid.copy(), grid.copy(), "stable", 1.0)
    dt = np.diff(grid)
    incr = dt ** (1.0 / alpha) * standard_stable(alpha, dt.size, as_generator(rng))
    values = np.concatenate([[0.0], np.cumsum(incr)])
    return SubordinatorPath(grid.copy(), values, "stable", alpha)


def sample_inverse_stable_marginal(beta, t, rng, size=None):
    """Exact draw(s) of ``E_beta(t)`` via ``(t / D_beta(1))**beta``."""
    _check_index(beta, "beta")
    if not t > 0:
        raise DomainError(f"time must be > 0, got {t}")
    if beta == 1.0:
        return float(t) if size is None else np.full(size, float(t))
    s = standard_stable(beta, 1 if size is None else size, as_generator(rng))
    e = (t / s) ** beta
    return float(e[0]) if size is None else e


def default_step(beta, max_level):
    """Operational step ``1e-3 * max_level**beta`` (the scale of E_beta(max_level))."""
    return 1e-3 * max(max_level, 1e-12) ** beta


class _OperationalGrid:
    """Operational times r_j: uniform spacing ``step``; with ``rel_step`` the
    spacing grows to ``rel_step * r`` once that exceeds ``step``."""

    def __init__(self, step, rel_step=None):
        self.step = step
        self.rel = rel_step
        self.j_switch = math.inf if rel_step is None else math.ceil(1.0 / rel_step)

    def points(self, j0, m):
        j = np.arange(j0, j0 + m, dtype=float)
        if self.rel is None:
            return j * self.step
        r_switch = self.j_switch * self.step
        geo = r_switch * (1.0 + self.rel) ** np.maximum(j - self.j_switch, 0.0)
        return np.where(j <= self.j_switch, j * self.step, geo)


def _first_passage_chunk(beta, levels, n, gen, grid, block):
    n_lev = levels.size
    out = np.zeros((n, n_lev))
    done = np.zeros((n, n_lev), dtype=bool)
    done[:, levels <= 0.0] = True
    active = np.flatnonzero(~done.all(axis=1))
    d_last = np.zeros(n)
    j0 = 0  # index of the last simulated point; r_0 = 0 with D = 0
    while active.size:
        r = grid.points(j0, block + 1)
        dr = np.diff(r)
        incr = dr ** (1.0 / beta) * standard_stable(beta, (active.size, block), gen)
        d = d_last[active, None] + np.cumsum(incr, axis=1)
        mids = 0.5 * (r[:-1] + r[1:])
        for k in range(n_lev):
            pending = ~done[active, k]
            if not pending.any():
                continue
            rows = np.flatnonzero(pending)
            cnt = np.count_nonzero(d[rows] <= levels[k], axis=1)
            hit = cnt < block
            out[active[rows[hit]], k] = mids[cnt[hit]]
            done[active[rows[hit]], k] = True
        d_last[active] = d[:, -1]
        j0 += block
        active = active[~done[active].all(axis=1)]
    return out


def inverse_stable_at(beta, levels, n_paths, rng, step=None, rel_step=None, chunk=4096, block=512, threads=1):
    """Joint samples of ``E_beta`` at nondecreasing ``levels``.

    A D_beta path is simulated on an operational grid of spacing ``step``
    (default :func:`default_step` of the largest level) and
    ``E_beta(level)`` is taken as the midpoint of the first grid cell in
    which the path exceeds the level, which removes the first-order bias of
    the plain upper grid point.  Rows are independent paths; columns share
    one path, so the joint law is preserved up to O(step).

    Returns an array of shape ``(n_paths, len(levels))``.
    """
    _check_index(beta, "beta")
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    if np.any(levels < 0) or np.any(np.diff(levels) < 0):
        raise DomainError("levels must be nonnegative and nondecreasing")
    if beta == 1.0:
        return np.tile(levels, (n_paths, 1))
    if step is None:
        step = default_step(beta, levels.max())
    if not step > 0:
        raise DomainError(f"step must be > 0, got {step}")
    if rel_step is not None and not rel_step > 0:
        raise DomainError(f"rel_step must be > 0, got {rel_step}")
    grid = _OperationalGrid(step, rel_step)
    sizes = [min(chunk, n_paths - i) for i in range(0, n_paths, chunk)]
    gens = chunk_generators(rng, len(sizes))

    def work(i):
        return _first_passage_chunk(beta, levels, sizes[i], gens[i], grid, block)

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(i) for i in range(len(sizes))]
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, levels.size))


def sample_inverse_stable_path(beta, grid, step=None, rng=None, rel_step=None):
    """One path of ``E_beta`` on the real-time ``grid`` by inverting a D_beta path."""
    _check_index(beta, "beta")
    grid = _check_grid(grid)
    if step is not None and not step > 0:
        raise DomainError(f"step must be > 0, got {step}")
    values = inverse_stable_at(beta, grid, 1, rng, step=step, rel_step=rel_step)[0]
    return SubordinatorPath(grid.copy(), values, "inverse_stable", beta)
