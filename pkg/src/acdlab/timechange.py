"""Brownian paths, additive-functional clocks, right inverses and time-changed paths.

A clock is ``A_t = int_0^t phi(B_s) ds`` along a Brownian path ``B``, its
right inverse is ``T_t = inf{u : A_u > t}`` and the time-changed process is
``X_t = B_{T_t}``.  Everything lives on uniform grids: ``A`` is the
left-endpoint Riemann sum on the grid of ``B`` and ``T_t`` is the first node
where ``A`` exceeds ``t``.

Two routes produce time-changed paths:

* the grid route materializes ``B`` on an oversampled horizon, builds ``A``
  and inverts it (:func:`sample_brownian`, :func:`additive_functional`,
  :func:`time_changed_path`);
* the streaming route (clocks with a compiled ``kind``) generates ``B`` step by
  step and stops as soon as the clock passes the last output level.  For the
  identity and lattice clocks it consumes the same normals in the same order
  as the grid route and returns the same path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numba as nb
import numpy as np

from . import _kernels as K
from . import _rng
from .core import Path, PathEnsemble, TimeGrid, check_seed, run_chunked, same_grid
from .errors import ClockExhausted, InvalidArgument, InvariantViolation

DEFAULT_HORIZON = 4
MAX_HORIZON = 64


@nb.njit(nogil=True, cache=True)
def _phi_array(kind, n, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = K.phi(kind, n, x[i])
    return out


@dataclass(frozen=True)
class ClockSpec:
    """Rate ``phi`` of an additive functional.

    ``integrand`` maps a float array to an array of nonnegative rates.
    ``kind``/``param`` name a compiled equivalent used by the streaming route;
    leave ``kind`` as ``None`` for arbitrary integrands.
    """

    integrand: Callable[[np.ndarray], np.ndarray]
    label: str
    kind: int | None = None
    param: float = 0.0

    def rates(self, x: np.ndarray) -> np.ndarray:
        r = np.broadcast_to(np.asarray(self.integrand(np.asarray(x, dtype=float)), dtype=float), np.shape(x))
        if np.any(r < 0) or np.any(np.isnan(r)):
            raise InvariantViolation(f"clock {self.label!r} produced a negative or NaN rate")
        return r


def _compiled_clock(kind: int, n: float, label: str) -> ClockSpec:
    return ClockSpec(lambda x: _phi_array(kind, float(n), np.ascontiguousarray(x, dtype=float)), label, kind, float(n))


def identity_clock() -> ClockSpec:
    return _compiled_clock(K.IDENTITY, 1.0, "identity")


def indicator_clock() -> ClockSpec:
    """``phi(x) = 1{x >= 0}``: the clock runs only while B is nonnegative."""
    return _compiled_clock(K.INDICATOR, 1.0, "indicator")


def reflection_clock(n: int) -> ClockSpec:
    """``phi(x) = max(1, -n x)^-2``."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    return _compiled_clock(K.REFL_PRELIMIT, n, f"reflection[n={n}]")


def lattice_clock(n: int) -> ClockSpec:
    """``phi = sigma_poisson(n, .)^-2``, concentrating the clock near the integers."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    return _compiled_clock(K.POISSON_PRELIMIT, n, f"lattice[n={n}]")


@dataclass(frozen=True)
class Clock:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise InvalidArgument(f"expected {len(self.grid)} clock values, got shape {v.shape}")
        if v[0] != 0.0:
            raise InvariantViolation("clock must start at 0")
        if np.any(np.diff(v) < 0) or np.any(np.isnan(v)):
            raise InvariantViolation("clock must be nondecreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def sample_brownian(grid: TimeGrid, seed: int) -> Path:
    """``B_0 = 0``; increment ``k`` is ``sqrt(h)`` times normal ``k`` of the seed's stream."""
    z = _rng.normals(np.uint64(check_seed(seed)), 0, grid.steps)
    b = np.empty(grid.steps + 1)
    b[0] = 0.0
    np.cumsum(math.sqrt(grid.h) * z, out=b[1:])
    return Path(grid, b)


def additive_functional(B: Path, clock: ClockSpec) -> Clock:
    """Left-endpoint Riemann sum ``A_{k+1} = A_k + phi(B_k) h``, ``A_0 = 0``."""
    rates = clock.rates(B.values[:-1])
    a = np.empty(len(B.grid))
    a[0] = 0.0
    np.cumsum(rates, out=a[1:])
    a[1:] *= B.grid.h
    return Clock(B.grid, a)


def right_inverse(A: Clock, t: float) -> float:
    """First grid node where ``A > t``; ``math.inf`` if the clock never gets there."""
    k = int(np.searchsorted(A.values, t, side="right"))
    return math.inf if k >= len(A.values) else float(A.grid.nodes[k])


def time_changed_path(B: Path, A: Clock, out_grid: TimeGrid) -> Path:
    """``X_s = B`` at the node just before ``T_s`` on the grid of ``B``.

    ``T_s`` is the first node ``t_k`` with ``A_{t_k} > s``, and the output is
    ``B_{t_{k-1}}``: the value that was driving the clock when it crossed
    ``s``.  This keeps ``X`` adapted to the left-endpoint clock, gives
    ``X = B`` exactly for the identity clock and ``X >= 0`` for the indicator
    clock.
    """
    same_grid(B.grid, A.grid)
    k = np.searchsorted(A.values, out_grid.nodes, side="right")
    if k[-1] >= len(A.values):
        j = int(np.argmax(k >= len(A.values)))
        raise ClockExhausted(
            f"clock reaches {A.values[-1]:.6g} on a B-horizon of {A.grid.t_end:.6g}, "
            f"below output time {out_grid.nodes[j]:.6g}"
        )
    return Path(out_grid, B.values[k - 1])


def sigma_poisson(n: int, x):
    """``(pi/n)^{1/4} (sum_k exp(-n (x+k)^2))^{-1/2}``.

    The lattice sum keeps terms with ``|x + k| <= 8/sqrt(n)`` and always the two
    nearest integers; dropped terms are below ``e^-64`` relative.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.exp(0.25 * math.log(math.pi / n) - 0.5 * _log_sum_array(float(n), np.ascontiguousarray(x_arr.ravel())))
    out = out.reshape(x_arr.shape)
    return float(out[0]) if np.ndim(x) == 0 else out


@nb.njit(nogil=True, cache=True)
def _log_sum_array(n, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = K.log_sum_poisson(n, x[i])
    return out


def sawtooth(x):
    """Distance from ``x`` to the nearest integer."""
    x = np.asarray(x, dtype=float)
    r = np.abs(x - np.round(x))
    return float(r) if r.ndim == 0 else r


def _grid_route(clock: ClockSpec, out_grid: TimeGrid, seed: int, horizon: int, max_horizon: int) -> Path:
    mult = horizon
    while True:
        bgrid = TimeGrid(mult * out_grid.t_end, mult * out_grid.steps)
        B = sample_brownian(bgrid, seed)
        try:
            return time_changed_path(B, additive_functional(B, clock), out_grid)
        except ClockExhausted:
            if mult >= max_horizon:
                raise
            mult = min(2 * mult, max_horizon)


def _check_horizon(horizon: int, max_horizon: int) -> None:
    if not (1 <= horizon <= max_horizon):
        raise InvalidArgument("need 1 <= horizon <= max_horizon")


def time_change(
    clock: ClockSpec,
    out_grid: TimeGrid,
    seed: int,
    *,
    horizon: int = DEFAULT_HORIZON,
    max_horizon: int = MAX_HORIZON,
    method: str = "auto",
) -> Path:
    """One path of ``B_{T_t}`` on ``out_grid``; ``B`` has the same step as ``out_grid``.

    ``method="grid"`` materializes ``B`` over ``horizon * t_end`` and doubles
    the horizon on exhaustion up to ``max_horizon * t_end``.  ``"stream"``
    (the default for compiled clocks) spends at most ``max_horizon * steps``
    Brownian steps.  Either raises :class:`ClockExhausted` when the budget
    runs out.
    """
    _check_horizon(horizon, max_horizon)
    seed = check_seed(seed)
    if method == "auto":
        method = "grid" if clock.kind is None else "stream"
    if method == "grid":
        return _grid_route(clock, out_grid, seed, horizon, max_horizon)
    if method != "stream" or clock.kind is None:
        raise InvalidArgument(f"method {method!r} unavailable for clock {clock.label!r}")
    rec, lo, hi, status, steps = K.time_change_batch(
        clock.kind, clock.param, np.array([seed], dtype=np.uint64), out_grid.nodes, 1, max_horizon * out_grid.steps
    )
    if status[0] != K.OK:
        raise ClockExhausted(f"clock did not reach {out_grid.t_end} within {max_horizon * out_grid.steps} steps")
    return Path(out_grid, rec[0])


def time_change_ensemble(
    clock: ClockSpec,
    out_grid: TimeGrid,
    n_paths: int,
    master: int,
    *,
    workers: int = 1,
    record_every: int = 1,
    max_horizon: int = MAX_HORIZON,
    method: str = "auto",
    tag: str | None = None,
) -> PathEnsemble:
    """``n_paths`` time-changed paths; path ``i`` uses ``derive_path_seed(master, i)``.

    Paths are simulated on ``out_grid`` and stored every ``record_every``
    nodes; ``path_min``/``path_max`` cover every node of ``out_grid``.
    """
    if n_paths < 1:
        raise InvalidArgument("n_paths must be >= 1")
    _check_horizon(1, max_horizon)
    master = check_seed(master)
    rec_grid = out_grid.coarsen(record_every)
    seeds = _rng.derive_many(np.uint64(master), 0, n_paths)
    if method == "auto":
        method = "grid" if clock.kind is None else "stream"
    if method == "stream" and clock.kind is None:
        raise InvalidArgument(f"clock {clock.label!r} has no compiled kernel")
    budget = max_horizon * out_grid.steps
    levels = out_grid.nodes

    def block(s, e):
        if method == "stream":
            rec, lo, hi, status, steps = K.time_change_batch(clock.kind, clock.param, seeds[s:e], levels, record_every, budget)
            bad = np.flatnonzero(status != K.OK)
            if bad.size:
                i = s + int(bad[0])
                raise ClockExhausted(f"path {i}: clock did not reach {out_grid.t_end} within {budget} steps", path_index=i)
            return rec, lo, hi, steps
        rows = []
        for i in range(s, e):
            try:
                p = _grid_route(clock, out_grid, int(seeds[i]), min(DEFAULT_HORIZON, max_horizon), max_horizon)
            except ClockExhausted as err:
                raise err.with_path(i) from None
            rows.append(p.values)
        v = np.array(rows)
        return v[:, ::record_every], v.min(axis=1), v.max(axis=1), np.zeros(e - s, dtype=np.int64)

    values, lo, hi, steps = run_chunked(block, n_paths, workers)
    return PathEnsemble(
        rec_grid, values, master, tag or f"time_change[{clock.label}]",
        path_min=lo, path_max=hi, sim_steps=out_grid.steps,
        meta={"brownian_steps": int(steps.sum())} if method == "stream" else {},
    )
