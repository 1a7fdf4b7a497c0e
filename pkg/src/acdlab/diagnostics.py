"""Statistical verdicts computed from sampled paths.

Each check returns a :class:`DiagnosticReport`: a statistic, its Monte Carlo
half-width, a threshold, the comparison that decides ``passed``, and the
sample size.  Confidence half-widths are two-sided 99% normal
approximations unless stated otherwise.  Random permutations and bootstrap
resamples come from ``numpy.random.default_rng`` seeded with
:func:`acdlab.core.derive_stream_seed`, so every verdict is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from . import _kernels as K
from .core import Path, PathEnsemble, derive_stream_seed, run_chunked, same_grid
from .errors import InsufficientData, InvalidArgument, OutOfRange

Z99 = float(stats.norm.ppf(0.995))

WITH_TOUCH = "crossed_with_touch"
WITHOUT_TOUCH = "crossed_without_touch"


@dataclass(frozen=True)
class DiagnosticReport:
    """A statistic with its half-width and verdict.

    ``comparison`` spells out how ``passed`` was decided from ``value``,
    ``ci_halfwidth`` and ``threshold``.
    """

    statistic_name: str
    value: float
    ci_halfwidth: float
    threshold: float
    passed: bool
    sample_size: int
    comparison: str
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = _plain(asdict(self))
        d["pass"] = d.pop("passed")
        return d


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _rate_report(name: str, hits: int, n: int, *, below: float | None, expected: float | None,
                 tolerance: float | None, extras: dict) -> DiagnosticReport:
    p = hits / n
    ci = Z99 * math.sqrt(p * (1 - p) / n)
    if expected is not None:
        tol = 0.01 if tolerance is None else tolerance
        return DiagnosticReport(name, p, ci, expected, abs(p - expected) <= tol, n,
                                f"|value - threshold| <= {tol}", extras)
    thr = 0.01 if below is None else below
    return DiagnosticReport(name, p, ci, thr, p + ci < thr, n, "value + ci < threshold", extras)


# almost-continuity ------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingEvent:
    """A sign change of ``Y - Z`` between nodes ``s_index < t_index``.

    ``direction`` is ``"up"`` when Y passes from below Z to above it.
    """

    s_index: int
    t_index: int
    kind: str
    direction: str


@dataclass(frozen=True)
class CouplingEventLog:
    events: list
    delta: float
    pair_count: int

    def count(self, kind: str | None = None, direction: str | None = None) -> int:
        return sum(1 for e in self.events
                   if (kind is None or e.kind == kind) and (direction is None or e.direction == direction))


def almost_continuity_scan(Y: Path, Z: Path, delta: float) -> CouplingEventLog:
    """Every crossing of ``Y`` and ``Z`` in either direction, classified by touch.

    A crossing joins consecutive nodes ``k < l`` where ``Y - Z`` is nonzero
    with opposite signs (nodes in between are exact ties).  It counts as
    touched when ``|Y - Z| <= delta`` at some node of ``k..l``.
    """
    same_grid(Y.grid, Z.grid)
    if not delta > 0:
        raise InvalidArgument("delta must be positive")
    ev = K.crossing_events(Y.values, Z.values, float(delta))
    events = [
        CouplingEvent(int(k), int(l), WITH_TOUCH if t else WITHOUT_TOUCH, "up" if u else "down")
        for k, l, t, u in ev
    ]
    return CouplingEventLog(events, float(delta), 1)


def almost_continuity_rate(
    source,
    n_pairs: int,
    delta: float,
    *,
    below: float | None = None,
    expected: float | None = None,
    tolerance: float | None = None,
    workers: int = 1,
) -> DiagnosticReport:
    """Fraction of pairs where Y crosses Z from below without touching.

    ``source.sample(start, stop)`` yields pair values (see
    :class:`acdlab.examples.PairSource`).  The verdict is ``value + ci <
    below`` (default 0.01), or ``|value - expected| <= tolerance`` when an
    expected rate is given.
    """
    if n_pairs < 1:
        raise InvalidArgument("n_pairs must be >= 1")
    if not delta > 0:
        raise InvalidArgument("delta must be positive")

    def block(s, e):
        ys, zs = source.sample(s, e)
        return K.untouched_crossing_flags(ys, zs, float(delta))

    up, down = run_chunked(block, n_pairs, workers)
    extras = {"delta": float(delta), "h": source.grid.h, "down_rate": float(down.mean()),
              "either_rate": float((up | down).mean()), "process": source.label}
    return _rate_report("almost_continuity_rate", int(up.sum()), n_pairs,
                        below=below, expected=expected, tolerance=tolerance, extras=extras)


def simultaneous_jump_flags(ys: np.ndarray, zs: np.ndarray, jump_threshold: float) -> np.ndarray:
    dy = np.abs(np.diff(ys, axis=1)) > jump_threshold
    dz = np.abs(np.diff(zs, axis=1)) > jump_threshold
    return np.any(dy & dz, axis=1)


def simultaneous_jump_rate(
    source, n_pairs: int, jump_threshold: float, *, below: float = 0.01, workers: int = 1
) -> DiagnosticReport:
    """Fraction of pairs where both paths jump by more than ``jump_threshold`` in the same grid step."""
    if not jump_threshold > 0:
        raise InvalidArgument("jump_threshold must be positive")

    def block(s, e):
        ys, zs = source.sample(s, e)
        return simultaneous_jump_flags(ys, zs, jump_threshold)

    flags = run_chunked(block, n_pairs, workers)
    return _rate_report("simultaneous_jump_rate", int(flags.sum()), n_pairs, below=below, expected=None,
                        tolerance=None, extras={"jump_threshold": jump_threshold, "h": source.grid.h,
                                                "process": source.label})


# crossing inequality -----------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    s: float
    t: float
    a: float
    b: float
    c: float
    d: float
    e: float
    lhs_estimate: float
    rhs_estimate: float
    lhs_ci: float
    rhs_ci: float
    satisfied_within_ci: bool
    sample_size: int

    def to_report(self) -> DiagnosticReport:
        return DiagnosticReport(
            "crossing_inequality", self.lhs_estimate - self.rhs_estimate, self.lhs_ci + self.rhs_ci, 0.0,
            self.satisfied_within_ci, self.sample_size, "value <= threshold + ci",
            {k: getattr(self, k) for k in ("s", "t", "a", "b", "c", "d", "e", "lhs_estimate", "rhs_estimate")},
        )


def _product_ci(f: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    """Estimate of E[f] E[g] from one sample and its delta-method half-width."""
    n = f.shape[0]
    fm, gm = f.mean(), g.mean()
    if n < 2:
        return float(fm * gm), math.inf
    cov = np.cov(f, g)
    var = (gm * gm * cov[0, 0] + fm * fm * cov[1, 1] + 2 * fm * gm * cov[0, 1]) / n
    return float(fm * gm), Z99 * math.sqrt(max(var, 0.0))


Weight = Callable[[np.ndarray, np.ndarray], np.ndarray]


def crossing_inequality_check(
    ens: PathEnsemble,
    s: float,
    t: float,
    a: float,
    b: float,
    c: float,
    d: float,
    e: float,
    *,
    weight_u: Weight | None = None,
    weight_v: Weight | None = None,
) -> InequalityReport:
    """Check ``E[U; X_s<a, d<X_t<e] E[V; X_s>a, b<X_t<c] <= E[U; X_s<a, b<X_t<c] E[V; X_s>a, d<X_t<e]``.

    Events use strict inequalities on the sampled values, so a lattice value
    equal to a threshold falls outside the event.  Weights, if given, are
    called as ``w(values, times)`` with the ensemble restricted to nodes in
    ``[0, s]`` and must return one nonnegative number per path; both default
    to 1.
    """
    if not s < t:
        raise InvalidArgument("need s < t")
    if not (b < c <= d < e):
        raise InvalidArgument("need b < c <= d < e")
    if t > ens.grid.t_end or s < 0:
        raise OutOfRange(f"times must lie in [0, {ens.grid.t_end}]")
    ks = ens.grid.index_at(s)
    xs = ens.values[:, ks]
    xt = ens.at(t)
    n = len(ens)

    def weight(w):
        if w is None:
            return np.ones(n)
        out = np.asarray(w(ens.values[:, : ks + 1], ens.grid.nodes[: ks + 1]), dtype=float)
        if out.shape != (n,) or np.any(out < 0) or not np.all(np.isfinite(out)):
            raise InvalidArgument("weights must be finite, nonnegative, one per path")
        return out

    u, v = weight(weight_u), weight(weight_v)
    below, above = xs < a, xs > a
    low, high = (b < xt) & (xt < c), (d < xt) & (xt < e)
    lhs, lhs_ci = _product_ci(u * (below & high), v * (above & low))
    rhs, rhs_ci = _product_ci(u * (below & low), v * (above & high))
    return InequalityReport(s, t, a, b, c, d, e, lhs, rhs, lhs_ci, rhs_ci, lhs <= rhs + lhs_ci + rhs_ci, n)


# one-dimensional and joint laws ------------------------------------------------------------

def ks_distance(sample: Sequence[float], reference_cdf: Callable) -> float:
    """Two-sided Kolmogorov distance ``sup |F_n - F|``.

    Both sides of every jump of the empirical CDF are compared, using the
    reference's left limit ``F(x-)`` below a sample point, so atoms in the
    reference are handled exactly.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0:
        raise InvalidArgument("empty sample")
    vals, counts = np.unique(x, return_counts=True)
    n = x.size
    after = np.cumsum(counts) / n
    before = after - counts / n
    f_at = _cdf(reference_cdf, vals)
    f_left = _cdf(reference_cdf, np.nextafter(vals, -np.inf))
    return float(max(np.max(np.abs(after - f_at)), np.max(np.abs(f_left - before))))


def _cdf(f, x):
    try:
        out = np.asarray(f(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(v)) for v in x])


def _energy_terms_1d(z_sorted: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    """Within-group distance sums ``sum_{i,j in A} |z_i - z_j|`` and the same for ``~mask``."""
    out = []
    for m in (mask, ~mask):
        cnt = m.sum()
        rank = np.cumsum(m)
        out.append(2.0 * float(np.sum(z_sorted[m] * (2.0 * rank[m] - cnt - 1.0))))
    return out[0], out[1]


def energy_statistic(xa: np.ndarray, xb: np.ndarray) -> float:
    """Scaled energy distance ``nm/(n+m) (2 E|X-Y| - E|X-X'| - E|Y-Y'|)`` (V-statistic form)."""
    return float(_energy_perm(np.vstack([_as2d(xa), _as2d(xb)]), len(xa), 0, None)[0])


def _as2d(x):
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def _energy_from_sums(saa, sbb, stot, n, m):
    sab = 0.5 * (stot - saa - sbb)
    return (n * m / (n + m)) * (2.0 * sab / (n * m) - saa / (n * n) - sbb / (m * m))


def _energy_perm(z: np.ndarray, n: int, n_perm: int, rng) -> np.ndarray:
    """Energy statistic for the observed split (first ``n`` rows), then ``n_perm`` random relabelings."""
    total, d = z.shape
    m = total - n
    labels = []
    for p in range(n_perm + 1):
        lab = np.zeros(total, dtype=bool)
        if p == 0:
            lab[:n] = True
        else:
            lab[rng.permutation(total)[:n]] = True
        labels.append(lab)
    out = np.empty(len(labels))
    if d == 1:
        order = np.argsort(z[:, 0], kind="stable")
        zs = z[order, 0]
        stot = 2.0 * float(np.sum(zs * (2.0 * np.arange(1, total + 1) - total - 1.0)))
        for i, lab in enumerate(labels):
            saa, sbb = _energy_terms_1d(zs, lab[order])
            out[i] = _energy_from_sums(saa, sbb, stot, n, m)
        return out
    L = np.array(labels, dtype=float).T
    saa = np.zeros(len(labels))
    sbb = np.zeros(len(labels))
    stot = 0.0
    step = max(1, 4_000_000 // total)
    for r0 in range(0, total, step):
        D = cdist(z[r0:r0 + step], z)
        rows = D.sum(axis=1)
        G = D @ L
        Lr = L[r0:r0 + step]
        saa += np.sum(Lr * G, axis=0)
        sbb += np.sum((1.0 - Lr) * (rows[:, None] - G), axis=0)
        stot += float(rows.sum())
    return np.array([_energy_from_sums(saa[i], sbb[i], stot, n, m) for i in range(len(labels))])


def fdd_two_sample(
    ens_a: PathEnsemble,
    ens_b: PathEnsemble,
    times: Sequence[float],
    n_permutations: int,
    *,
    seed: int | None = None,
    alpha: float = 0.01,
) -> DiagnosticReport:
    """Energy-distance permutation test that ``(X_{t_1}, ..., X_{t_d})`` has the same law in both ensembles.

    The p-value is ``(1 + #{permuted >= observed}) / (1 + n_permutations)``
    and the test passes when ``p >= alpha``.  Shuffles come from ``seed``,
    by default a stream derived from both ensembles' master seeds.
    """
    times = [float(t) for t in times]
    if not times or any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
        raise InvalidArgument("times must be nonempty and strictly increasing")
    if n_permutations < 1:
        raise InvalidArgument("n_permutations must be >= 1")
    horizon = min(ens_a.grid.t_end, ens_b.grid.t_end)
    if times[0] < 0 or times[-1] > horizon:
        raise OutOfRange(f"times must lie in [0, {horizon}]")
    xa = np.column_stack([ens_a.at(t) for t in times])
    xb = np.column_stack([ens_b.at(t) for t in times])
    if seed is None:
        seed = derive_stream_seed(ens_a.master_seed ^ (ens_b.master_seed * 0x9E3779B97F4A7C15 % 2**64), "fdd")
    rng = np.random.default_rng(seed)
    stat = _energy_perm(np.vstack([xa, xb]), len(xa), n_permutations, rng)
    obs, perm = stat[0], stat[1:]
    # relabelings that reproduce the observed split can differ from it by rounding
    ge = int(np.sum(perm >= obs * (1 - 1e-12)))
    p = (1 + ge) / (1 + n_permutations)
    return DiagnosticReport(
        "fdd_energy_pvalue", p, 0.0, alpha, p >= alpha, len(xa) + len(xb), "value >= threshold",
        {"energy_statistic": float(obs), "times": times, "n_permutations": n_permutations,
         "n_a": len(xa), "n_b": len(xb)},
    )


# conditional expectation regularity ---------------------------------------------------------

def _binned_slope(xs: np.ndarray, gt: np.ndarray, width: float, min_count: int):
    idx = np.floor(xs / width).astype(np.int64)
    keys, inv, counts = np.unique(idx, return_inverse=True, return_counts=True)
    sums = np.bincount(inv, weights=gt)
    ok = counts >= min_count
    k = keys[ok]
    if k.size < 2:
        return None, int(k.size)
    f = sums[ok] / counts[ok]
    centers = (k + 0.5) * width
    slopes = np.abs(np.diff(f)) / np.diff(centers)
    return float(slopes.max()), int(k.size)


def conditional_lipschitz_estimate(
    ens: PathEnsemble,
    s: float,
    t: float,
    g: Callable[[np.ndarray], np.ndarray],
    bin_width: float,
    K: float = 0.0,
    *,
    min_count: int = 50,
    n_boot: int = 200,
    seed: int | None = None,
) -> DiagnosticReport:
    """Largest slope of the binned regression ``x -> E[g(e^{-Kt} X_t) | e^{-Ks} X_s = x]``.

    Bins of width ``bin_width`` with at least ``min_count`` samples qualify;
    the statistic is the largest ``|df| / |d center|`` between consecutive
    qualifying bins.  ``g`` should be bounded and 1-Lipschitz.  The
    half-width is half the 99% bootstrap percentile interval (paths resampled
    ``n_boot`` times), and the check passes when the estimate is at most
    ``1 + ci + bin_width``, ``bin_width`` covering the binning bias.
    """
    if not s < t:
        raise InvalidArgument("need s < t")
    if not bin_width > 0:
        raise InvalidArgument("bin_width must be positive")
    xs = math.exp(-K * s) * ens.at(s)
    gt = np.asarray(g(math.exp(-K * t) * ens.at(t)), dtype=float)
    gt = np.broadcast_to(gt, xs.shape)
    est, nbins = _binned_slope(xs, gt, bin_width, min_count)
    if est is None:
        raise InsufficientData(f"{nbins} bin(s) with >= {min_count} samples; need 2")
    if seed is None:
        seed = derive_stream_seed(ens.master_seed, f"lipschitz:{s}:{t}:{bin_width}:{K}")
    rng = np.random.default_rng(seed)
    n = xs.shape[0]
    boots = []
    for _ in range(n_boot):
        i = rng.integers(0, n, n)
        b, _ = _binned_slope(xs[i], gt[i], bin_width, min_count)
        if b is not None:
            boots.append(b)
    if len(boots) >= 2:
        lo, hi = np.quantile(boots, [0.005, 0.995])
        ci = 0.5 * float(hi - lo)
    else:
        ci = math.inf
    thr = 1.0 + bin_width
    return DiagnosticReport(
        "conditional_lipschitz", est, ci, thr, est <= thr + ci, n, "value <= threshold + ci",
        {"bins": nbins, "K": K, "s": s, "t": t, "bin_width": bin_width, "n_boot": n_boot},
    )


# support ----------------------------------------------------------------------------------

def support_connectedness(
    ens: PathEnsemble, t: float, resolution: float, *, trim: float = 1e-3
) -> DiagnosticReport:
    """Longest run of empty histogram bins between occupied bins of ``X_t``.

    Samples outside the ``[trim, 1 - trim]`` quantile range are dropped first,
    so isolated tail draws do not register as gaps.  Passes when the longest
    interior run is at most one bin.
    """
    if not resolution > 0:
        raise InvalidArgument("resolution must be positive")
    if not 0 <= trim < 0.5:
        raise InvalidArgument("trim must lie in [0, 1/2)")
    x = ens.at(t)
    lo, hi = np.quantile(x, [trim, 1 - trim]) if trim > 0 else (x.min(), x.max())
    x = x[(x >= lo) & (x <= hi)]
    idx = np.floor((x - lo) / resolution).astype(np.int64)
    occupied = np.zeros(int(idx.max()) + 1, dtype=bool)
    occupied[idx] = True
    gaps = np.diff(np.flatnonzero(occupied)) - 1
    gap = int(gaps.max()) if gaps.size else 0
    return DiagnosticReport(
        "support_max_gap_bins", float(gap), 0.0, 1.0, gap <= 1, len(ens), "value <= threshold",
        {"t": t, "resolution": resolution, "trim": trim, "occupied_bins": int(occupied.sum()),
         "range": [float(lo), float(hi)]},
    )


# Markov probe -----------------------------------------------------------------------------

def _probe_arrays(samples):
    from .examples import Example2DBatch

    if isinstance(samples, Example2DBatch):
        return samples.y.grid, samples.y.values, samples.v
    samples = list(samples)
    if not samples:
        raise InsufficientData("no samples")
    grid = samples[0].y_path.grid
    for smp in samples:
        same_grid(grid, smp.y_path.grid)
    y = np.array([smp.y_path.values for smp in samples])
    v = None if samples[0].v_value is None else np.array([smp.v_value for smp in samples])
    return grid, y, v


def _probe_diff(y: np.ndarray, k2: int, k3: int, tol: float, min_stratum: int):
    level = y[:, k2]
    stratum = np.abs(level) <= tol
    if stratum.sum() < min_stratum:
        raise InsufficientData(f"{int(stratum.sum())} samples with Y_t2 = 0; need {min_stratum}")
    ys = y[stratum]
    jump = np.max(np.abs(np.diff(ys[:, : k2 + 1], axis=1)), axis=1) if k2 > 0 else np.zeros(len(ys))
    fut = np.abs(ys[:, k3] - ys[:, k2])
    keep = jump > 0
    jump, fut = jump[keep], fut[keep]
    if jump.size == 0:
        return 0.0, 0.0, int(stratum.sum()), 0, 0
    med = np.median(jump)
    high, low = fut[jump > med], fut[jump <= med]
    if high.size < 2 or low.size < 2:
        return 0.0, 0.0, int(stratum.sum()), int(high.size), int(low.size)
    diff = float(high.mean() - low.mean())
    se = math.sqrt(high.var(ddof=1) / high.size + low.var(ddof=1) / low.size)
    return diff, se, int(stratum.sum()), int(high.size), int(low.size)


def markov_probe(
    samples,
    t1: float,
    t2: float,
    t3: float,
    *,
    zero_tol: float = 1e-12,
    min_stratum: int = 100,
    z_threshold: float = 4.0,
) -> DiagnosticReport:
    """Does the size of past jumps predict future movement from ``Y_t2 = 0``?

    Among samples with ``|Y_t2| <= zero_tol`` that jumped on ``[0, t2]``, those
    whose largest past jump is above the median are compared with the rest
    on ``|Y_t3 - Y_t2|``.  A Markov process gives no difference; the report
    passes (non-Markov behaviour detected) when the difference exceeds
    ``z_threshold`` standard errors.  ``t1`` only fixes the ordering
    ``t1 < t2 < t3``.  Accepts a list of samples or an ``Example2DBatch``.
    """
    if not (0 <= t1 < t2 < t3):
        raise InvalidArgument("need 0 <= t1 < t2 < t3")
    grid, y, _ = _probe_arrays(samples)
    if t3 > grid.t_end:
        raise OutOfRange(f"t3 beyond horizon {grid.t_end}")
    diff, se, n0, nh, nl = _probe_diff(y, grid.index_at(t2), grid.index_at(t3), zero_tol, min_stratum)
    z = diff / se if se > 0 else 0.0
    return DiagnosticReport(
        "markov_probe_difference", diff, z_threshold * se, 0.0, se > 0 and z > z_threshold, y.shape[0],
        "value > threshold + ci",
        {"z": z, "stratum_size": n0, "n_high": nh, "n_low": nl, "t1": t1, "t2": t2, "t3": t3},
    )


def markov_probe_stratified(
    samples,
    t1: float,
    t2: float,
    t3: float,
    *,
    n_strata: int = 40,
    zero_tol: float = 1e-12,
    min_stratum: int = 20,
    z_threshold: float = 4.0,
) -> DiagnosticReport:
    """:func:`markov_probe` run separately inside ``n_strata`` quantile strata of ``V``.

    Within a stratum ``V`` is nearly fixed, so the hidden state is gone and the
    probe should stay silent.  Reports the largest stratum z-score and passes
    when no stratum exceeds ``z_threshold`` (the control shows no detection).
    """
    if not (0 <= t1 < t2 < t3):
        raise InvalidArgument("need 0 <= t1 < t2 < t3")
    grid, y, v = _probe_arrays(samples)
    if v is None:
        raise InvalidArgument("stratified probe needs samples with V recorded")
    if t3 > grid.t_end:
        raise OutOfRange(f"t3 beyond horizon {grid.t_end}")
    k2, k3 = grid.index_at(t2), grid.index_at(t3)
    edges = np.quantile(v, np.linspace(0, 1, n_strata + 1))
    which = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, n_strata - 1)
    zs = []
    for k in range(n_strata):
        sel = which == k
        diff, se, *_ = _probe_diff(y[sel], k2, k3, zero_tol, min_stratum)
        zs.append(diff / se if se > 0 else 0.0)
    zmax = float(max(zs))
    return DiagnosticReport(
        "markov_probe_v_stratified_max_z", zmax, 0.0, z_threshold, zmax <= z_threshold, y.shape[0],
        "value <= threshold",
        {"n_strata": n_strata, "z_by_stratum": zs, "max_z_above_lowest_stratum": float(max(zs[1:], default=0.0)),
         "stouffer_z": float(sum(zs) / math.sqrt(len(zs)))},
    )


__all__ = [
    "CouplingEvent",
    "CouplingEventLog",
    "DiagnosticReport",
    "InequalityReport",
    "almost_continuity_rate",
    "almost_continuity_scan",
    "conditional_lipschitz_estimate",
    "crossing_inequality_check",
    "energy_statistic",
    "fdd_two_sample",
    "ks_distance",
    "markov_probe",
    "markov_probe_stratified",
    "simultaneous_jump_rate",
    "support_connectedness",
]
