"""Batch command line: run a pipeline, write a JSON report, optionally dump paths as CSV.

Exit status: 0 when every statistic passes, 1 when any fails, 2 for an
invalid configuration, 3 when a simulation blows up or runs out of clock
(the report then names the failing path).
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import time
from typing import Sequence

import numpy as np
from scipy import stats

from . import __version__
from . import diagnostics as D
from . import examples as ex
from .core import PathEnsemble, TimeGrid, derive_stream_seed
from .errors import InsufficientData, InvalidArgument, OutOfRange, SimulationError
from .sde import DiffusionSpec, check_one_sided_lipschitz, simulate_ensemble
from .timechange import sawtooth

SCHEMA_VERSION = 1

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SIMULATION = 0, 1, 2, 3

# options that never change results and are left out of the config echo
_NOT_ECHOED = {"out", "dump", "config", "workers"}

ENSEMBLE_PROCESSES = ("brownian", "refl-bm", "refl-bm-limit", "poisson-prelimit", "poisson", "planted", "ou")
EXAMPLES = ("refl-bm", "refl-bm-limit", "poisson", "poisson-limit", "counterexample-2d", "planted")


class ConfigError(Exception):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _seed(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="acdlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"acdlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, required=True, help="master seed (required)")
    common.add_argument("--paths", type=int, default=10000, help="number of paths or samples")
    common.add_argument("--t-end", type=float, default=1.0)
    common.add_argument("--steps", type=int, default=1000, help="grid steps on [0, t-end]")
    common.add_argument("--record-every", type=int, default=0,
                        help="store every k-th node (0: about 100 stored intervals)")
    common.add_argument("--workers", type=_positive_int, default=1, help="threads; results do not depend on it")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--dump", help="write the main ensemble as CSV (path_index,t,value)")
    common.add_argument("--config", help="key = value file with defaults for these flags")

    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="Euler-Maruyama ensemble and drift check")
    s.add_argument("--model", choices=("bm", "ou"), default="bm")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--kappa", type=float, default=1.0)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--x0", type=float, default=0.0)
    s.add_argument("--K", type=float, default=0.0, help="one-sided Lipschitz constant to check")

    s = sub.add_parser("example", parents=[common], help="one of the example constructions")
    s.add_argument("name", choices=EXAMPLES)
    s.add_argument("--n", type=_positive_int, default=64)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--permutations", type=_positive_int, default=199)
    s.add_argument("--t1", type=float, default=0.5)
    s.add_argument("--t2", type=float, default=1.0)
    s.add_argument("--t3", type=float, default=2.0)
    s.add_argument("--strata", type=_positive_int, default=40)

    s = sub.add_parser("ac-check", parents=[common], help="almost-continuity crossing rate")
    s.add_argument("--process", choices=ex.PROCESSES, default="planted")
    s.add_argument("--pairs", type=int, default=None, help="number of pairs (defaults to --paths)")
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--n", type=_positive_int, default=64)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--expected", type=float, default=None, help="expected rate (default 0.125 for planted)")
    s.add_argument("--tolerance", type=float, default=0.01)
    s.add_argument("--below", type=float, default=0.01)
    s.add_argument("--jump-threshold", type=float, default=None, help="also report the simultaneous-jump rate")

    s = sub.add_parser("ineq-check", parents=[common], help="crossing inequality")
    s.add_argument("--process", choices=ENSEMBLE_PROCESSES + ("violator",), default="refl-bm-limit")
    s.add_argument("--n", type=_positive_int, default=64)
    s.add_argument("--s", type=float, default=0.5)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--a", type=float, default=0.7)
    s.add_argument("--b", type=float, default=0.1)
    s.add_argument("--c", type=float, default=0.4)
    s.add_argument("--d", type=float, default=0.8)
    s.add_argument("--e", type=float, default=1.5)
    s.add_argument("--sweep", action="store_true", help="3x3x3 sweep of (a; b,c; d,e) over two (s,t) pairs")
    s.add_argument("--min-fraction", type=float, default=0.99)

    s = sub.add_parser("fdd-test", parents=[common], help="energy two-sample test of joint marginals")
    s.add_argument("--process-a", choices=ENSEMBLE_PROCESSES, default="poisson-prelimit")
    s.add_argument("--process-b", choices=ENSEMBLE_PROCESSES + ("abs-brownian",), default="poisson")
    s.add_argument("--n", type=_positive_int, default=256)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--times", type=_floats, default=[0.5, 1.0])
    s.add_argument("--permutations", type=_positive_int, default=199)

    s = sub.add_parser("lip-check", parents=[common], help="Lipschitz regularity of conditional expectations")
    s.add_argument("--process", choices=ENSEMBLE_PROCESSES, default="brownian")
    s.add_argument("--n", type=_positive_int, default=64)
    s.add_argument("--kappa", type=float, default=1.0)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--x0", type=float, default=0.0)
    s.add_argument("--s", type=float, default=0.5)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--g", choices=("clamp", "tanh", "const"), default="clamp")
    s.add_argument("--bin-width", type=float, default=0.1)
    s.add_argument("--K", type=float, default=0.0)
    s.add_argument("--bootstrap", type=_positive_int, default=200)

    s = sub.add_parser("support-check", parents=[common], help="connectedness of the support of X_t")
    s.add_argument("--process", choices=ENSEMBLE_PROCESSES + ("constant",), default="refl-bm-limit")
    s.add_argument("--n", type=_positive_int, default=256)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--time", type=float, default=None, help="defaults to t-end")
    s.add_argument("--resolution", type=float, default=0.05)

    s = sub.add_parser("markov-probe", parents=[common], help="non-Markov probe on the 2D counterexample")
    s.add_argument("--process", choices=("limit", "prelimit", "markov"), default="limit")
    s.add_argument("--n", type=_positive_int, default=256)
    s.add_argument("--t1", type=float, default=0.5)
    s.add_argument("--t2", type=float, default=1.0)
    s.add_argument("--t3", type=float, default=2.0)
    s.add_argument("--strata", type=_positive_int, default=40)
    return p


def _config_tokens(path: str) -> list[str]:
    tokens = []
    try:
        lines = open(path, encoding="utf-8").read().splitlines()
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() == "true":
            tokens.append(flag)
        elif value.lower() != "false":
            tokens += [flag, value]
    return tokens


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    """Parse ``argv``; flags from ``--config`` act as defaults that explicit flags override."""
    argv = list(argv)
    parser = build_parser()
    cfg = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            cfg = argv[i + 1]
        elif a.startswith("--config="):
            cfg = a.split("=", 1)[1]
    if cfg is not None:
        if not argv or argv[0].startswith("-"):
            raise ConfigError("the command must come first when --config is used")
        argv = argv[:1] + _config_tokens(cfg) + argv[1:]
    try:
        return parser.parse_args(argv)
    except SystemExit as err:
        if err.code in (0, None):
            raise
        raise ConfigError("invalid arguments") from None


# ensembles -------------------------------------------------------------------------------

def _record_every(args, grid: TimeGrid, times: Sequence[float]) -> int:
    k = args.record_every
    if k == 0:
        k = grid.steps // 100 if grid.steps % 100 == 0 and grid.steps >= 100 else 1
        if not all(_on_grid(grid.coarsen(k), t) for t in times):
            k = 1
    if k < 1 or grid.steps % k:
        raise InvalidArgument(f"record-every {k} must divide steps {grid.steps}")
    for t in times:
        if not _on_grid(grid.coarsen(k), t):
            raise InvalidArgument(f"time {t} is not a stored node; change --record-every")
    return k


def _on_grid(grid: TimeGrid, t: float) -> bool:
    try:
        grid.node_index(t)
        return True
    except OutOfRange:
        return False


def _ou_spec(args) -> DiffusionSpec:
    kappa, theta, sigma = args.kappa, args.theta, args.sigma
    return DiffusionSpec(lambda t, x: sigma, lambda t, x: kappa * (theta - x), 0.0, f"ou[kappa={kappa},theta={theta}]")


def _ensemble(process: str, args, grid: TimeGrid, n: int, master: int, every: int) -> PathEnsemble:
    kw = {"workers": args.workers, "record_every": every}
    if process == "brownian":
        return ex.brownian_ensemble(grid, n, master, **kw)
    if process == "abs-brownian":
        e = ex.brownian_ensemble(grid, n, master, **kw)
        return PathEnsemble(e.grid, np.abs(e.values), e.master_seed, "abs_brownian", sim_steps=e.sim_steps)
    if process == "refl-bm":
        return ex.refl_bm_prelimit_ensemble(args.n, grid, n, master, **kw)
    if process == "refl-bm-limit":
        return ex.refl_bm_limit_ensemble(grid, n, master, **kw)
    if process == "poisson-prelimit":
        return ex.poisson_prelimit_ensemble(args.n, grid, n, master, **kw)
    if process == "poisson":
        return ex.symmetric_poisson_ensemble(getattr(args, "rate", 1.0), grid, n, master, **kw)
    if process == "planted":
        return ex.planted_nonac_ensemble(grid, n, master)
    if process == "ou":
        return simulate_ensemble(_ou_spec(args), grid, args.x0, n, master, **kw)
    if process == "constant":
        return PathEnsemble(grid.coarsen(every), np.zeros((n, grid.steps // every + 1)), master, "constant")
    raise InvalidArgument(f"unknown process {process!r}")


def _grid(args) -> TimeGrid:
    if args.paths < 1:
        raise InvalidArgument("paths must be >= 1")
    return TimeGrid(args.t_end, args.steps)


# pipelines -------------------------------------------------------------------------------

def _cmd_simulate(args):
    grid = _grid(args)
    every = _record_every(args, grid, [])
    sigma = args.sigma
    if args.model == "bm":
        spec = DiffusionSpec(lambda t, x: sigma, lambda t, x: 0.0, args.K, "bm")
    else:
        spec = DiffusionSpec(lambda t, x: sigma, lambda t, x: args.kappa * (args.theta - x), args.K,
                             f"ou[kappa={args.kappa},theta={args.theta}]")
    ens = simulate_ensemble(spec, grid, args.x0, args.paths, args.seed, workers=args.workers, record_every=every)
    chk = check_one_sided_lipschitz(spec, [0.0, grid.t_end], -10.0, 10.0, 401, K=args.K)
    x = ens.values[:, -1]
    drift = D.DiagnosticReport(
        "one_sided_lipschitz_worst_violation", chk.worst_violation, 0.0, chk.tolerance, chk.passed,
        chk.tested_pairs, "value <= threshold", {"K": args.K},
    )
    if args.model == "bm":
        mean_ref = args.x0
    else:
        mean_ref = args.theta + (args.x0 - args.theta) * math.exp(-args.kappa * grid.t_end)
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.inf
    mean = D.DiagnosticReport(
        "terminal_mean", float(x.mean()), 4 * se, mean_ref, abs(float(x.mean()) - mean_ref) <= 4 * se, len(x),
        "|value - threshold| <= ci", {"variance": float(x.var(ddof=1)) if len(x) > 1 else 0.0},
    )
    return [drift, mean], ens


def _abs_normal_cdf(scale):
    return lambda x: np.clip(2.0 * stats.norm.cdf(np.asarray(x) / scale) - 1.0, 0.0, 1.0)


def _cmd_example(args):
    grid = _grid(args)
    name = args.name
    if name in ("refl-bm", "refl-bm-limit"):
        every = _record_every(args, grid, [grid.t_end])
        if name == "refl-bm":
            ens = ex.refl_bm_prelimit_ensemble(args.n, grid, args.paths, args.seed, workers=args.workers,
                                               record_every=every)
        else:
            ens = ex.refl_bm_limit_ensemble(grid, args.paths, args.seed, workers=args.workers, record_every=every)
        x = ens.values[:, -1]
        ks = D.ks_distance(x, _abs_normal_cdf(math.sqrt(grid.t_end)))
        out = [D.DiagnosticReport("ks_vs_reflected_normal", ks, 0.0, 0.05, ks < 0.05, len(x), "value < threshold",
                                  {"n": args.n if name == "refl-bm" else None, "t": grid.t_end, "h": grid.h})]
        mins = ens.running_min()
        if name == "refl-bm":
            m, se = float(mins.mean()), float(mins.std(ddof=1) / math.sqrt(len(mins)))
            out.append(D.DiagnosticReport("running_min_mean", m, 4 * se, -0.2, m + 4 * se <= -0.2, len(mins),
                                          "value + ci <= threshold", {"h": grid.h}))
        else:
            hits = int(np.sum(mins < -0.05))
            out.append(D._rate_report("running_min_below_-0.05", hits, len(mins), below=0.01, expected=None,
                                      tolerance=None, extras={"h": grid.h}))
            mean = float(x.mean())
            se = float(x.std(ddof=1) / math.sqrt(len(x)))
            ref = math.sqrt(2 * grid.t_end / math.pi)
            out.append(D.DiagnosticReport("terminal_mean", mean, 4 * se, ref, abs(mean - ref) <= max(4 * se, 0.01),
                                          len(x), "|value - threshold| <= max(ci, 0.01)", {}))
        return out, ens
    if name == "poisson":
        times = [0.5 * grid.t_end, grid.t_end]
        every = _record_every(args, grid, times)
        ens = ex.poisson_prelimit_ensemble(args.n, grid, args.paths, args.seed, workers=args.workers,
                                           record_every=every)
        x = ens.values[:, -1]
        far = int(np.sum(sawtooth(x) > 0.1))
        out = [D.DiagnosticReport("fraction_far_from_lattice", far / len(x), 0.0, 0.05, far / len(x) < 0.05,
                                  len(x), "value < threshold", {"n": args.n, "distance": 0.1})]
        jumps = ex.lattice_jump_counts(args.n, grid, args.paths, args.seed, workers=args.workers)
        total = int(jumps.sum())
        mean_gap = args.paths * grid.t_end / total if total else math.inf
        se = mean_gap / math.sqrt(total) if total else math.inf
        out.append(D.DiagnosticReport("inter_jump_mean", mean_gap, Z99 * se, 1.0, abs(mean_gap - 1.0) <= 0.05,
                                      total, "|value - threshold| <= 0.05", {"jumps": total, "n": args.n}))
        ref = ex.symmetric_poisson_ensemble(1.0, grid, args.paths, derive_stream_seed(args.seed, "limit"),
                                            workers=args.workers, record_every=every)
        out.append(D.fdd_two_sample(ens, ref, times, args.permutations,
                                    seed=derive_stream_seed(args.seed, "fdd")))
        return out, ens
    if name == "poisson-limit":
        every = _record_every(args, grid, [grid.t_end])
        ens = ex.symmetric_poisson_ensemble(args.rate, grid, args.paths, args.seed, workers=args.workers,
                                            record_every=every)
        x = ens.values[:, -1]
        var = float(x.var(ddof=1))
        expected = args.rate * grid.t_end
        m4 = float(np.mean((x - x.mean()) ** 4))
        se = math.sqrt(max(m4 - var * var, 0.0) / len(x))
        counts = ens.meta["jump_counts"]
        gap = args.paths * grid.t_end / max(int(counts.sum()), 1)
        return [
            D.DiagnosticReport("terminal_variance", var, 3 * se, expected, abs(var - expected) <= 3 * se, len(x),
                               "|value - threshold| <= ci", {"rate": args.rate}),
            D.DiagnosticReport("inter_jump_mean", gap, 0.0, 1.0 / args.rate, True, int(counts.sum()),
                               "informational", {}),
        ], ens
    if name == "counterexample-2d":
        return _markov_reports(args, "limit")
    if name == "planted":
        if not grid.t_end > 1:
            raise InvalidArgument("planted example needs t-end > 1")
        every = _record_every(args, grid, [])
        src = ex.pair_source("planted", grid, args.seed)
        rep = D.almost_continuity_rate(src, args.paths, 0.01, expected=0.125, tolerance=0.01, workers=args.workers)
        return [rep], None
    raise InvalidArgument(f"unknown example {name!r}")


Z99 = D.Z99


def _markov_reports(args, process):
    grid = _grid(args)
    every = _record_every(args, grid, [args.t2, args.t3])
    if process == "limit":
        batch = ex.counterexample_2d_limit_batch(grid, args.paths, args.seed, workers=args.workers,
                                                 record_every=every, count_until=min(1.0, grid.t_end))
    elif process == "markov":
        batch = ex.counterexample_2d_limit_batch(grid, args.paths, args.seed, workers=args.workers,
                                                 record_every=every, count_until=min(1.0, grid.t_end), v=1.0)
    else:
        batch = ex.counterexample_2d_prelimit_batch(args.n, grid, args.paths, args.seed, workers=args.workers,
                                                    record_every=every)
    out = []
    if batch.jump_counts is not None:
        c = batch.jump_counts
        m = float(c.mean())
        out.append(D.DiagnosticReport("jump_count_mean_on_[0,1]", m, Z99 * float(c.std(ddof=1)) / math.sqrt(len(c)),
                                      1.0, abs(m - 1.0) <= 0.02, len(c), "|value - threshold| <= 0.02", {}))
    probe = D.markov_probe(batch, args.t1, args.t2, args.t3)
    if process == "markov":
        probe = D.DiagnosticReport(probe.statistic_name, probe.value, probe.ci_halfwidth, probe.threshold,
                                   not probe.passed, probe.sample_size, "not (value > threshold + ci)",
                                   probe.extras)
    out.append(probe)
    if batch.v is not None and process == "limit":
        out.append(D.markov_probe_stratified(batch, args.t1, args.t2, args.t3, n_strata=args.strata))
    return out, batch.y


def _cmd_ac_check(args):
    grid = _grid(args)
    pairs = args.pairs if args.pairs is not None else args.paths
    if pairs < 1:
        raise InvalidArgument("pairs must be >= 1")
    src = ex.pair_source(args.process, grid, args.seed, n=args.n, rate=args.rate)
    expected = args.expected
    if expected is None and args.process == "planted":
        expected = 0.125
    out = [D.almost_continuity_rate(src, pairs, args.delta, below=args.below, expected=expected,
                                    tolerance=args.tolerance, workers=args.workers)]
    if args.jump_threshold is not None:
        out.append(D.simultaneous_jump_rate(src, pairs, args.jump_threshold, below=args.below, workers=args.workers))
    return out, None


SWEEP_A = (0.3, 0.7, 1.0)
SWEEP_BC = ((0.0, 0.3), (0.1, 0.4), (0.2, 0.6))
SWEEP_DE = ((0.6, 1.0), (0.8, 1.5), (1.0, 2.0))
SWEEP_ST = ((0.25, 0.5), (0.5, 1.0))


def _cmd_ineq_check(args):
    grid = _grid(args)
    if args.sweep:
        times = sorted({t for st in SWEEP_ST for t in st})
        tuples = [(s, t, a, b, c, d, e) for (s, t), a, (b, c), (d, e)
                  in itertools.product(SWEEP_ST, SWEEP_A, SWEEP_BC, SWEEP_DE)]
    else:
        times = [args.s, args.t]
        tuples = [(args.s, args.t, args.a, args.b, args.c, args.d, args.e)]
    for tm in times:
        if tm > grid.t_end:
            raise InvalidArgument(f"time {tm} beyond t-end {grid.t_end}")
    every = _record_every(args, grid, times)
    if args.process == "violator":
        s, t, a, b, c, d, e = tuples[0]
        ens = ex.inequality_violator_ensemble(grid.coarsen(every), s, t, a, b, c, d, e, args.paths)
    else:
        ens = _ensemble(args.process, args, grid, args.paths, args.seed, every)
    reports = [D.crossing_inequality_check(ens, *tp).to_report() for tp in tuples]
    if len(reports) == 1:
        return reports, ens
    ok = sum(r.passed for r in reports)
    frac = ok / len(reports)
    summary = D.DiagnosticReport("inequality_sweep_fraction_satisfied", frac, 0.0, args.min_fraction,
                                 frac >= args.min_fraction, len(reports), "value >= threshold",
                                 {"tuples": [r.to_dict() for r in reports]})
    return [summary], ens


def _cmd_fdd_test(args):
    grid = _grid(args)
    times = args.times
    every = _record_every(args, grid, times)
    a = _ensemble(args.process_a, args, grid, args.paths, derive_stream_seed(args.seed, "a"), every)
    b = _ensemble(args.process_b, args, grid, args.paths, derive_stream_seed(args.seed, "b"), every)
    return [D.fdd_two_sample(a, b, times, args.permutations, seed=derive_stream_seed(args.seed, "fdd"))], a


_G = {
    "clamp": lambda x: np.clip(x, -1.0, 1.0),
    "tanh": np.tanh,
    "const": lambda x: np.zeros_like(x),
}


def _cmd_lip_check(args):
    grid = _grid(args)
    every = _record_every(args, grid, [args.s, args.t])
    ens = _ensemble(args.process, args, grid, args.paths, args.seed, every)
    rep = D.conditional_lipschitz_estimate(ens, args.s, args.t, _G[args.g], args.bin_width, args.K,
                                           n_boot=args.bootstrap, seed=derive_stream_seed(args.seed, "bootstrap"))
    return [rep], ens


def _cmd_support_check(args):
    grid = _grid(args)
    t = grid.t_end if args.time is None else args.time
    every = _record_every(args, grid, [t])
    ens = _ensemble(args.process, args, grid, args.paths, args.seed, every)
    return [D.support_connectedness(ens, t, args.resolution)], ens


def _cmd_markov_probe(args):
    return _markov_reports(args, args.process)


COMMANDS = {
    "simulate": _cmd_simulate,
    "example": _cmd_example,
    "ac-check": _cmd_ac_check,
    "ineq-check": _cmd_ineq_check,
    "fdd-test": _cmd_fdd_test,
    "lip-check": _cmd_lip_check,
    "support-check": _cmd_support_check,
    "markov-probe": _cmd_markov_probe,
}


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


def write_csv(ens: PathEnsemble, path: str) -> None:
    """One row per (path, stored node): ``path_index,t,value`` with 17 significant digits."""
    n, m = ens.values.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("path_index,t,value\n")
        t = np.array([f"{x:.17g}" for x in ens.grid.nodes])
        for i in range(n):
            fh.write("".join(f"{i},{t[j]},{v:.17g}\n" for j, v in enumerate(ens.values[i])))


def render(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def run(argv: Sequence[str]) -> tuple[int, dict]:
    """Execute one command line; returns ``(exit status, report)``."""
    start = time.perf_counter()
    try:
        args = parse_args(argv)
    except ConfigError as err:
        return EXIT_CONFIG, {"schema_version": SCHEMA_VERSION, "error": str(err), "version": __version__}
    report = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": _echo(args),
              "version": __version__}
    status = EXIT_OK
    ens = None
    try:
        reports, ens = COMMANDS[args.command](args)
        report["statistics"] = [r.to_dict() for r in reports]
        report["passed"] = all(r.passed for r in reports)
        status = EXIT_OK if report["passed"] else EXIT_FAIL
    except SimulationError as err:
        report["error"] = {"type": type(err).__name__, "message": str(err), "path_index": err.path_index}
        report["passed"] = False
        status = EXIT_SIMULATION
    except (InvalidArgument, OutOfRange, InsufficientData, ValueError) as err:
        report["error"] = {"type": type(err).__name__, "message": str(err)}
        report["passed"] = False
        status = EXIT_CONFIG
    report["wall_time"] = time.perf_counter() - start
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(render(report))
    if args.dump and ens is not None:
        write_csv(ens, args.dump)
    return status, report


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    status, report = run(argv)
    if "error" in report and status == EXIT_CONFIG:
        err = report["error"]
        print(f"acdlab: {err['message'] if isinstance(err, dict) else err}", file=sys.stderr)
    out = None
    try:
        out = parse_args(argv).out
    except (ConfigError, SystemExit):
        pass
    if out is None and "command" in report:
        sys.stdout.write(render(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
