"""Euler-Maruyama for dX = sigma(t, X) dW + b(t, X) dt, and the drift check."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _rng
from .core import Path, PathEnsemble, TimeGrid, check_seed, run_chunked
from .errors import InvalidArgument, NumericalBlowup

BLOWUP = 1e12

Field = Callable[[float, np.ndarray], "np.ndarray | float"]


@dataclass(frozen=True)
class DiffusionSpec:
    """Coefficients of the SDE plus the one-sided Lipschitz constant of the drift.

    ``sigma`` and ``drift`` are called as ``f(t, x)`` with ``x`` a float array
    and must broadcast (returning a scalar is fine).  They may be invoked from
    several threads at once.
    """

    sigma: Field
    drift: Field
    lipschitz_K: float = 0.0
    label: str = "sde"

    def __post_init__(self):
        if not math.isfinite(self.lipschitz_K):
            raise InvalidArgument("lipschitz_K must be finite")


@dataclass(frozen=True)
class DriftCheckReport:
    tested_pairs: int
    worst_violation: float
    tolerance: float
    passed: bool


def _em_block(spec: DiffusionSpec, grid: TimeGrid, x0: float, seeds: np.ndarray, every: int, offset: int = 0):
    n = seeds.shape[0]
    h = grid.h
    sqrt_h = math.sqrt(h)
    t = grid.nodes
    x = np.full(n, float(x0))
    rec = np.empty((n, grid.steps // every + 1))
    rec[:, 0] = x
    lo = x.copy()
    hi = x.copy()
    for k in range(grid.steps):
        xi = _rng.normals_at(seeds, k)
        x = x + spec.drift(t[k], x) * h + spec.sigma(t[k], x) * sqrt_h * xi
        bad = ~(np.abs(x) <= BLOWUP)
        if bad.any():
            i = int(np.argmax(bad))
            raise NumericalBlowup(
                f"path {offset + i}: value {x[i]!r} at step {k + 1}", step=k + 1, path_index=offset + i
            )
        np.minimum(lo, x, out=lo)
        np.maximum(hi, x, out=hi)
        if (k + 1) % every == 0:
            rec[:, (k + 1) // every] = x
    return rec, lo, hi


def euler_maruyama(spec: DiffusionSpec, grid: TimeGrid, x0: float, seed: int) -> Path:
    """One Euler-Maruyama path; coefficients are taken at the left endpoint of each step."""
    seeds = np.array([check_seed(seed)], dtype=np.uint64)
    rec, _, _ = _em_block(spec, grid, x0, seeds, 1)
    return Path(grid, rec[0])


def simulate_ensemble(
    spec: DiffusionSpec,
    grid: TimeGrid,
    x0: float,
    n_paths: int,
    master: int,
    *,
    workers: int = 1,
    record_every: int = 1,
) -> PathEnsemble:
    """``n_paths`` Euler paths; path ``i`` uses ``derive_path_seed(master, i)``."""
    if n_paths < 1:
        raise InvalidArgument("n_paths must be >= 1")
    master = check_seed(master)
    rec_grid = grid.coarsen(record_every)
    seeds = _rng.derive_many(np.uint64(master), 0, n_paths)

    def block(s, e):
        return _em_block(spec, grid, x0, seeds[s:e], record_every, offset=s)

    values, lo, hi = run_chunked(block, n_paths, workers)
    return PathEnsemble(
        rec_grid, values, master, f"euler_maruyama[{spec.label}]",
        path_min=lo, path_max=hi, sim_steps=grid.steps,
    )


def check_one_sided_lipschitz(
    spec: DiffusionSpec,
    t_samples: Sequence[float],
    x_lo: float,
    x_hi: float,
    grid_points: int,
    *,
    K: float | None = None,
) -> DriftCheckReport:
    """Scan b(t,y) - b(t,x) - K(y-x) over all lattice pairs x < y.

    Violations below ``tolerance`` (a few ulps of the operands) are rounding,
    not evidence, and do not fail the check.
    """
    if not x_lo < x_hi:
        raise InvalidArgument("need x_lo < x_hi")
    if grid_points < 2:
        raise InvalidArgument("grid_points must be >= 2")
    if len(t_samples) == 0:
        raise InvalidArgument("t_samples is empty")
    K = spec.lipschitz_K if K is None else float(K)
    xs = np.linspace(x_lo, x_hi, grid_points)
    worst = -math.inf
    scale = 0.0
    for t in t_samples:
        b = np.broadcast_to(np.asarray(spec.drift(float(t), xs), dtype=float), xs.shape)
        scale = max(scale, float(np.max(np.abs(b))))
        for i in range(grid_points - 1):
            v = (b[i + 1:] - b[i]) - K * (xs[i + 1:] - xs[i])
            worst = max(worst, float(v.max()))
    scale += abs(K) * max(abs(x_lo), abs(x_hi))
    tol = float(16 * np.finfo(float).eps * scale)
    pairs = len(t_samples) * grid_points * (grid_points - 1) // 2
    return DriftCheckReport(pairs, worst, tol, bool(worst <= tol))
