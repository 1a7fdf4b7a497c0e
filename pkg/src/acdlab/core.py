"""Grids, cadlag paths, ensembles and seed derivation."""
from __future__ import annotations

import bisect
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import GridMismatch, InvalidArgument, OutOfRange

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# Paths are simulated in fixed-size chunks; worker count only changes how the
# chunks are scheduled, never their boundaries, so results do not depend on it.
CHUNK = 1024


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    steps: int

    def __post_init__(self):
        if not (isinstance(self.steps, (int, np.integer)) and self.steps >= 1):
            raise InvalidArgument(f"steps must be a positive integer, got {self.steps!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise InvalidArgument(f"t_end must be positive and finite, got {self.t_end!r}")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "t_end", float(self.t_end))

    @property
    def h(self) -> float:
        return self.t_end / self.steps

    @cached_property
    def nodes(self) -> np.ndarray:
        # t_k = k*h so that a clock summing h exactly reproduces the nodes;
        # the last node is pinned to t_end
        t = np.arange(self.steps + 1, dtype=float) * self.h
        t[-1] = self.t_end
        t.setflags(write=False)
        return t

    def __len__(self) -> int:
        return self.steps + 1

    def index_at(self, t: float) -> int:
        """Index of the largest node <= t."""
        if not (0.0 <= t <= self.t_end):
            raise OutOfRange(f"t={t} outside [0, {self.t_end}]")
        return bisect.bisect_right(self.nodes, t) - 1

    def node_index(self, t: float) -> int:
        """Index of the node equal to ``t`` (to rounding); raises if ``t`` is off-grid."""
        k = int(round(t / self.h))
        if not (0 <= k <= self.steps) or not math.isclose(self.nodes[k], t, rel_tol=1e-9, abs_tol=1e-12):
            raise OutOfRange(f"t={t} is not a node of {self}")
        return k

    def coarsen(self, every: int) -> "TimeGrid":
        if every < 1 or self.steps % every:
            raise InvalidArgument(f"record interval {every} must divide steps={self.steps}")
        return TimeGrid(self.t_end, self.steps // every)


def make_uniform_grid(t_end: float, steps: int) -> TimeGrid:
    return TimeGrid(t_end, steps)


@dataclass(frozen=True)
class Path:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise InvalidArgument(f"expected {len(self.grid)} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("path values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, t: float) -> float:
        return eval_path(self, t)


def eval_path(p: Path, t: float) -> float:
    """Right-continuous step interpolation: the value at the last node <= t."""
    return float(p.values[p.grid.index_at(t)])


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_path_seed(master: int, index: int) -> int:
    """Seed of path ``index`` under ``master``: ``mix64(master + (index+1)*GOLDEN)``.

    ``index -> master + (index+1)*GOLDEN`` is injective mod 2**64 (GOLDEN is odd)
    and the SplitMix64 finalizer is a bijection, so distinct indices below 2**64
    never collide.
    """
    if index < 0:
        raise InvalidArgument("index must be nonnegative")
    return _mix64((int(master) + (index + 1) * GOLDEN) & MASK64)


def derive_stream_seed(master: int, tag: str) -> int:
    """Seed for an auxiliary stream (permutations, bootstrap) named by ``tag``."""
    h = 0
    for ch in tag.encode():
        h = _mix64((h ^ ch) + GOLDEN)
    return _mix64((int(master) ^ h) & MASK64)


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise InvalidArgument(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


@dataclass(frozen=True)
class PathEnsemble:
    """``N`` paths on one grid, stored as an ``(N, M+1)`` array.

    When paths were simulated on a finer grid than the one recorded,
    ``path_min``/``path_max`` hold the extremes over the fine grid and
    ``sim_steps`` its step count.
    """

    grid: TimeGrid
    values: np.ndarray
    master_seed: int
    generator_tag: str
    path_min: np.ndarray | None = None
    path_max: np.ndarray | None = None
    sim_steps: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != len(self.grid):
            raise InvalidArgument(f"values must have shape (N, {len(self.grid)}), got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    def path(self, i: int) -> Path:
        return Path(self.grid, self.values[i])

    @property
    def paths(self) -> list[Path]:
        return [self.path(i) for i in range(len(self))]

    def at(self, t: float) -> np.ndarray:
        """Values of every path at time ``t`` (cadlag evaluation)."""
        return self.values[:, self.grid.index_at(t)]

    def running_min(self) -> np.ndarray:
        return self.path_min if self.path_min is not None else self.values.min(axis=1)

    def running_max(self) -> np.ndarray:
        return self.path_max if self.path_max is not None else self.values.max(axis=1)


def same_grid(a: TimeGrid, b: TimeGrid) -> None:
    if a != b:
        raise GridMismatch(f"grids differ: {a} vs {b}")


def run_chunked(
    fn: Callable[[int, int], Sequence[np.ndarray] | np.ndarray],
    n: int,
    workers: int = 1,
    chunk: int = CHUNK,
):
    """Apply ``fn(start, stop)`` over fixed chunks of ``range(n)`` and concatenate.

    ``fn`` may return one array or a tuple of arrays (each concatenated along
    axis 0).  Output is independent of ``workers``.
    """
    bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if workers <= 1 or len(bounds) == 1:
        parts = [fn(s, e) for s, e in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda se: fn(*se), bounds))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(col, axis=0) for col in zip(*parts))
    return np.concatenate(parts, axis=0)
