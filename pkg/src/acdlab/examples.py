"""The example sequences and their limits, plus a planted violator of almost-continuity.

* Reflecting limit: ``dX^n = max(1, -n X^n) dW`` converges to reflecting Brownian
  motion, written as Brownian motion run on the clock ``int 1{B >= 0}``.
* Lattice limit: ``dX^n = sigma_n(X^n) dW`` with ``sigma_n^-2`` a normalized
  Gaussian comb converges to a symmetric +-1 jump process on the integers.
  Starting at an integer, the clock collects only the local time there before
  ``B`` reaches a neighbour, and that local time has mean 1, so the limit
  jumps at rate 1.
* Two-dimensional counterexample: ``(f(nU) X^n, U)`` with ``f`` the sawtooth and
  ``U ~ N(0, 1)``, whose limit ``(V X, U)`` is neither continuous nor Markov.
  ``f`` takes values in ``[0, 1/2]``, so ``V ~ Uniform[0, 1/2]``.

Every path function takes one seed; ``*_ensemble`` variants take a master
seed and derive path ``i``'s seed with :func:`acdlab.core.derive_path_seed`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K
from . import _rng
from .core import Path, PathEnsemble, TimeGrid, check_seed, derive_stream_seed, run_chunked
from .errors import ClockExhausted, InvalidArgument
from .timechange import (
    MAX_HORIZON,
    identity_clock,
    indicator_clock,
    lattice_clock,
    reflection_clock,
    sawtooth,
    time_change,
    time_change_ensemble,
)

LIMIT_RATE = 1.0

# sub-stream indices under a sample's seed
_X_STREAM = 0
_AUX_STREAM = 1


def sigma_reflection(n: int, x):
    """``sigma_n(x) = max(1, -n x)``."""
    r = np.maximum(1.0, -n * np.asarray(x, dtype=float))
    return float(r) if r.ndim == 0 else r


def refl_bm_prelimit(n: int, out_grid: TimeGrid, seed: int) -> Path:
    """``X^n`` for ``sigma_n = max(1, -n x)``, via the clock ``sigma_n(B)^-2``."""
    return time_change(reflection_clock(n), out_grid, seed)


def refl_bm_limit(out_grid: TimeGrid, seed: int) -> Path:
    """Reflecting Brownian motion as ``B`` run on the clock ``int 1{B >= 0}``."""
    return time_change(indicator_clock(), out_grid, seed)


def poisson_prelimit(n: int, out_grid: TimeGrid, seed: int) -> Path:
    return time_change(lattice_clock(n), out_grid, seed)


def symmetric_poisson(rate: float, out_grid: TimeGrid, seed: int) -> Path:
    """Exact symmetric +-1 jump process at total rate ``rate``, cadlag on ``out_grid``."""
    if not rate > 0:
        raise InvalidArgument("rate must be positive")
    rec, _ = K.poisson_batch(float(rate), np.array([check_seed(seed)], dtype=np.uint64), out_grid.nodes, 1, out_grid.t_end)
    return Path(out_grid, rec[0])


def refl_bm_prelimit_ensemble(n: int, out_grid: TimeGrid, n_paths: int, master: int, **kw) -> PathEnsemble:
    return time_change_ensemble(reflection_clock(n), out_grid, n_paths, master, tag=f"refl_bm_prelimit[n={n}]", **kw)


def refl_bm_limit_ensemble(out_grid: TimeGrid, n_paths: int, master: int, **kw) -> PathEnsemble:
    return time_change_ensemble(indicator_clock(), out_grid, n_paths, master, tag="refl_bm_limit", **kw)


def poisson_prelimit_ensemble(n: int, out_grid: TimeGrid, n_paths: int, master: int, **kw) -> PathEnsemble:
    return time_change_ensemble(lattice_clock(n), out_grid, n_paths, master, tag=f"poisson_prelimit[n={n}]", **kw)


def brownian_ensemble(out_grid: TimeGrid, n_paths: int, master: int, **kw) -> PathEnsemble:
    return time_change_ensemble(identity_clock(), out_grid, n_paths, master, tag="brownian", **kw)


def symmetric_poisson_ensemble(
    rate: float,
    out_grid: TimeGrid,
    n_paths: int,
    master: int,
    *,
    workers: int = 1,
    record_every: int = 1,
    count_until: float | None = None,
) -> PathEnsemble:
    """Ensemble of :func:`symmetric_poisson`; ``meta["jump_counts"]`` counts jumps up to ``count_until``."""
    if not rate > 0:
        raise InvalidArgument("rate must be positive")
    if n_paths < 1:
        raise InvalidArgument("n_paths must be >= 1")
    master = check_seed(master)
    seeds = _rng.derive_many(np.uint64(master), 0, n_paths)
    until = out_grid.t_end if count_until is None else float(count_until)
    rec_grid = out_grid.coarsen(record_every)

    def block(s, e):
        return K.poisson_batch(float(rate), seeds[s:e], out_grid.nodes, record_every, until)

    values, counts = run_chunked(block, n_paths, workers)
    return PathEnsemble(
        rec_grid, values, master, f"symmetric_poisson[rate={rate}]",
        sim_steps=out_grid.steps, meta={"jump_counts": counts, "count_until": until},
    )


def lattice_jump_counts(n: int, out_grid: TimeGrid, n_paths: int, master: int, *, workers: int = 1) -> np.ndarray:
    """Jumps of each ``poisson_prelimit`` path: moves to a neighbouring integer once it is reached.

    Uses the same seeds as :func:`poisson_prelimit_ensemble`, so the counts
    belong to that ensemble's paths.  Paths start at the integer 0.
    """
    master = check_seed(master)
    seeds = _rng.derive_many(np.uint64(master), 0, n_paths)
    budget = MAX_HORIZON * out_grid.steps

    def block(s, e):
        rec, _, _, status, _ = K.time_change_batch(K.POISSON_PRELIMIT, float(n), seeds[s:e], out_grid.nodes, 1, budget)
        bad = np.flatnonzero(status != K.OK)
        if bad.size:
            i = s + int(bad[0])
            raise ClockExhausted(f"path {i}: clock did not reach {out_grid.t_end}", path_index=i)
        return K.lattice_transitions(rec)

    return run_chunked(block, n_paths, workers)


@dataclass(frozen=True)
class Example2DSample:
    """One draw of ``(Y, Z)`` with ``Z`` frozen at ``u_value``.

    ``amplitude`` multiplies the underlying path: ``f(nU)`` before the limit
    and ``V`` in it; ``v_value`` is ``None`` for pre-limit samples.
    """

    y_path: Path
    u_value: float
    v_value: float | None
    amplitude: float

    def z_path(self) -> Path:
        return Path(self.y_path.grid, np.full(len(self.y_path.grid), self.u_value))


def _aux(seed: int):
    return np.uint64(_rng.derive(np.uint64(seed), _AUX_STREAM))


def counterexample_2d_prelimit(n: int, out_grid: TimeGrid, seed: int) -> Example2DSample:
    """``Y^n = f(nU) X^n`` with ``X^n = poisson_prelimit(n)``, ``Z^n = U ~ N(0,1)``."""
    seed = check_seed(seed)
    x = poisson_prelimit(n, out_grid, int(_rng.derive(np.uint64(seed), _X_STREAM)))
    u = float(_rng.normal(_aux(seed), 0))
    amp = sawtooth(n * u)
    return Example2DSample(Path(out_grid, amp * x.values), u, None, amp)


def counterexample_2d_limit(out_grid: TimeGrid, seed: int, *, v: float | None = None) -> Example2DSample:
    """``Y = V X`` with ``X`` the rate-1 symmetric jump process, ``V ~ U[0, 1/2]``, ``Z = U ~ N(0,1)``.

    Passing ``v`` fixes the amplitude instead of drawing it.
    """
    seed = check_seed(seed)
    x = symmetric_poisson(LIMIT_RATE, out_grid, int(_rng.derive(np.uint64(seed), _X_STREAM)))
    aux = _aux(seed)
    u = float(_rng.normal(aux, 0))
    vv = 0.5 * float(_rng.uniform(aux, 1)) if v is None else float(v)
    return Example2DSample(Path(out_grid, vv * x.values), u, vv, vv)


@dataclass(frozen=True)
class Example2DBatch:
    """Many two-dimensional samples: ``Y`` paths, frozen ``U`` and amplitudes.

    ``jump_counts`` are the underlying process's jumps on ``[0, count_until]``.
    """

    y: PathEnsemble
    u: np.ndarray
    amplitude: np.ndarray
    v: np.ndarray | None
    jump_counts: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.y)

    def sample(self, i: int) -> Example2DSample:
        v = None if self.v is None else float(self.v[i])
        return Example2DSample(self.y.path(i), float(self.u[i]), v, float(self.amplitude[i]))


def counterexample_2d_limit_batch(
    out_grid: TimeGrid,
    n_samples: int,
    master: int,
    *,
    workers: int = 1,
    record_every: int = 1,
    count_until: float = 1.0,
    v: float | None = None,
) -> Example2DBatch:
    """``n_samples`` draws of :func:`counterexample_2d_limit`; sample ``i`` uses path seed ``i``."""
    master = check_seed(master)
    seeds = _rng.derive_many(np.uint64(master), 0, n_samples)
    x_seeds = _rng.derive_each(seeds, _X_STREAM)
    aux = _rng.derive_each(seeds, _AUX_STREAM)
    u = _rng.normals_at(aux, 0)
    amp = np.full(n_samples, float(v)) if v is not None else 0.5 * _rng.uniforms_at(aux, 1)
    rec_grid = out_grid.coarsen(record_every)

    def block(s, e):
        return K.poisson_batch(LIMIT_RATE, x_seeds[s:e], out_grid.nodes, record_every, float(count_until))

    xv, counts = run_chunked(block, n_samples, workers)
    y = PathEnsemble(rec_grid, amp[:, None] * xv, master, "counterexample_2d_limit", sim_steps=out_grid.steps)
    return Example2DBatch(y, u, amp, amp.copy(), counts)


def counterexample_2d_prelimit_batch(
    n: int, out_grid: TimeGrid, n_samples: int, master: int, *, workers: int = 1, record_every: int = 1
) -> Example2DBatch:
    master = check_seed(master)
    seeds = _rng.derive_many(np.uint64(master), 0, n_samples)
    x_seeds = _rng.derive_each(seeds, _X_STREAM)
    u = _rng.normals_at(_rng.derive_each(seeds, _AUX_STREAM), 0)
    amp = sawtooth(n * u)
    budget = MAX_HORIZON * out_grid.steps

    def block(s, e):
        rec, _, _, status, _ = K.time_change_batch(
            K.POISSON_PRELIMIT, float(n), x_seeds[s:e], out_grid.nodes, record_every, budget
        )
        bad = np.flatnonzero(status != K.OK)
        if bad.size:
            i = s + int(bad[0])
            raise ClockExhausted(f"path {i}: clock did not reach {out_grid.t_end}", path_index=i)
        return rec

    xv = run_chunked(block, n_samples, workers)
    y = PathEnsemble(out_grid.coarsen(record_every), amp[:, None] * xv, master, f"counterexample_2d_prelimit[n={n}]")
    return Example2DBatch(y, u, np.asarray(amp), None)


def _planted_values(seeds: np.ndarray, grid: TimeGrid) -> np.ndarray:
    u = _rng.uniforms_at(seeds, 0)
    d = np.where(_rng.uniforms_at(seeds, 1) < 0.5, 2.0, -2.0)
    after = grid.nodes >= 1.0
    return u[:, None] + d[:, None] * after[None, :]


def planted_nonac_process(out_grid: TimeGrid, seed: int) -> Path:
    """``U`` before time 1 and ``U + D`` from time 1 on; ``U ~ U(0,1)``, ``D = +-2``."""
    if not out_grid.t_end > 1:
        raise InvalidArgument("planted process needs t_end > 1")
    return Path(out_grid, _planted_values(np.array([check_seed(seed)], dtype=np.uint64), out_grid)[0])


def planted_nonac_ensemble(out_grid: TimeGrid, n_paths: int, master: int, **_) -> PathEnsemble:
    if not out_grid.t_end > 1:
        raise InvalidArgument("planted process needs t_end > 1")
    seeds = _rng.derive_many(np.uint64(check_seed(master)), 0, n_paths)
    return PathEnsemble(out_grid, _planted_values(seeds, out_grid), master, "planted_nonac")


def inequality_violator_ensemble(
    out_grid: TimeGrid, s: float, t: float, a: float, b: float, c: float, d: float, e: float, n_paths: int
) -> PathEnsemble:
    """Deterministic two-type ensemble that breaks the crossing inequality.

    Even paths sit at ``a - 1`` on ``[0, s]`` and move to ``(d + e) / 2`` after
    ``s``; odd paths sit at ``a + 1`` and move to ``(b + c) / 2``.  Paths never
    cross level ``a`` between the two types, so the left side is ``1/4`` and
    the right side is ``0``.
    """
    if not (b < c <= d < e):
        raise InvalidArgument("need b < c <= d < e")
    if not (0 <= s < t <= out_grid.t_end):
        raise InvalidArgument("need 0 <= s < t <= t_end")
    if n_paths < 2:
        raise InvalidArgument("need at least two paths")
    even = np.arange(n_paths) % 2 == 0
    before = np.where(even, a - 1.0, a + 1.0)
    after = np.where(even, 0.5 * (d + e), 0.5 * (b + c))
    late = out_grid.nodes > s
    values = np.where(late[None, :], after[:, None], before[:, None])
    return PathEnsemble(out_grid, values, 0, "inequality_violator")


# pair sources for the coupling diagnostics -------------------------------------------------

PROCESSES = ("planted", "refl-bm-limit", "refl-bm", "poisson", "poisson-prelimit", "brownian")


@dataclass(frozen=True)
class PairSource:
    """Independent pairs ``(Y_i, Z_i)``: ``Y`` from master stream ``"Y"``, ``Z`` from ``"Z"``.

    ``sample(start, stop)`` returns the two ``(stop - start, M + 1)`` value
    arrays for pair indices ``start .. stop-1``.
    """

    grid: TimeGrid
    sample: Callable[[int, int], tuple[np.ndarray, np.ndarray]]
    label: str


def pair_source(process: str, grid: TimeGrid, master: int, *, n: int = 64, rate: float = 1.0) -> PairSource:
    """Pair generator for ``process`` in :data:`PROCESSES` under ``master``."""
    master = check_seed(master)
    ys = derive_stream_seed(master, "Y")
    zs = derive_stream_seed(master, "Z")
    budget = MAX_HORIZON * grid.steps

    def seeds(m, s, e):
        return _rng.derive_many(np.uint64(m), s, e - s)

    def tc(kind, param):
        def values(sd, s):
            rec, _, _, status, _ = K.time_change_batch(kind, float(param), sd, grid.nodes, 1, budget)
            bad = np.flatnonzero(status != K.OK)
            if bad.size:
                i = s + int(bad[0])
                raise ClockExhausted(f"pair {i}: clock did not reach {grid.t_end}", path_index=i)
            return rec
        return values

    if process == "planted":
        if not grid.t_end > 1:
            raise InvalidArgument("planted process needs t_end > 1")
        values = lambda sd, s: _planted_values(sd, grid)  # noqa: E731
    elif process == "refl-bm-limit":
        values = tc(K.INDICATOR, 1.0)
    elif process == "refl-bm":
        values = tc(K.REFL_PRELIMIT, n)
    elif process == "poisson-prelimit":
        values = tc(K.POISSON_PRELIMIT, n)
    elif process == "brownian":
        values = tc(K.IDENTITY, 1.0)
    elif process == "poisson":
        if not rate > 0:
            raise InvalidArgument("rate must be positive")
        values = lambda sd, s: K.poisson_batch(float(rate), sd, grid.nodes, 1, grid.t_end)[0]  # noqa: E731
    else:
        raise InvalidArgument(f"unknown process {process!r}; choose from {', '.join(PROCESSES)}")

    def sample(s, e):
        return values(seeds(ys, s, e), s), values(seeds(zs, s, e), s)

    return PairSource(grid, sample, process)
