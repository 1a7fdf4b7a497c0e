from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from acdlab.core import TimeGrid, derive_path_seed
from acdlab.diagnostics import ks_distance
from acdlab.errors import InvalidArgument, NumericalBlowup
from acdlab.sde import DiffusionSpec, check_one_sided_lipschitz, euler_maruyama, simulate_ensemble


def spec(sigma=1.0, drift=None, K=0.0):
    drift = drift or (lambda t, x: 0.0)
    return DiffusionSpec(lambda t, x: sigma, drift, K)


def test_degenerate_coefficients_give_constant_path():
    p = euler_maruyama(spec(0.0), TimeGrid(1.0, 50), 2.0, 3)
    assert np.all(p.values == 2.0)


def test_unit_drift_reaches_x0_plus_one():
    p = euler_maruyama(spec(0.0, lambda t, x: 1.0), TimeGrid(1.0, 64), 0.5, 3)
    assert p.values[-1] == 1.5


def test_step_recursion_uses_left_endpoint():
    g = TimeGrid(1.0, 8)
    s = DiffusionSpec(lambda t, x: 1.0 + 0.1 * x, lambda t, x: -x + t, 0.0)
    p = euler_maruyama(s, g, 0.3, 11)
    from acdlab import _rng

    seed = np.uint64(11)
    x = 0.3
    for k in range(8):
        t = g.nodes[k]
        x = x + (-x + t) * g.h + (1.0 + 0.1 * x) * math.sqrt(g.h) * _rng.normal(seed, k)
        assert p.values[k + 1] == pytest.approx(x, abs=1e-15)


def test_euler_ode_error_halves_with_step():
    # dx = x dt, x0 = 1: Euler error at t = 1 is first order in h
    errs = []
    for m in (100, 200, 400):
        p = euler_maruyama(spec(0.0, lambda t, x: x), TimeGrid(1.0, m), 1.0, 0)
        errs.append(math.e - p.values[-1])
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.02)


def test_blowup_names_step_and_path():
    s = DiffusionSpec(lambda t, x: 0.0, lambda t, x: x * x * 1e3, 0.0)
    with pytest.raises(NumericalBlowup) as info:
        simulate_ensemble(s, TimeGrid(1.0, 100), 1.0, 3, 0)
    assert info.value.step >= 1
    assert info.value.path_index == 0


def test_brownian_law_mean_and_variance():
    ens = simulate_ensemble(spec(), TimeGrid(1.0, 20), 0.0, 100_000, 5)
    x = ens.values[:, -1]
    assert abs(x.mean()) <= 3 * x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.var(ddof=1) - 1) <= 0.02


def test_brownian_ks_against_normal():
    ens = simulate_ensemble(spec(), TimeGrid(1.0, 20), 0.0, 10_000, 6)
    assert ks_distance(ens.values[:, -1], stats.norm.cdf) < 0.02


def test_martingale_mean_at_every_node():
    s = DiffusionSpec(lambda t, x: 1.0 / (1.0 + x * x) + 0.5, lambda t, x: 0.0, 0.0)
    ens = simulate_ensemble(s, TimeGrid(1.0, 50), 0.7, 20_000, 8)
    se = ens.values[:, 1:].std(axis=0, ddof=1) / math.sqrt(len(ens))
    assert np.all(np.abs(ens.values[:, 1:].mean(axis=0) - 0.7) <= 4 * se)


def test_single_path_ensemble_matches_direct_call():
    g = TimeGrid(1.0, 30)
    ens = simulate_ensemble(spec(), g, 0.0, 1, 77)
    direct = euler_maruyama(spec(), g, 0.0, derive_path_seed(77, 0))
    assert np.array_equal(ens.values[0], direct.values)


def test_ensemble_deterministic_across_workers():
    g = TimeGrid(1.0, 40)
    s = spec(1.0, lambda t, x: -x)
    a = simulate_ensemble(s, g, 0.0, 2500, 9, workers=1)
    b = simulate_ensemble(s, g, 0.0, 2500, 9, workers=4)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.path_min, b.path_min)


def test_record_every_keeps_fine_extremes():
    g = TimeGrid(1.0, 100)
    full = simulate_ensemble(spec(), g, 0.0, 50, 4)
    coarse = simulate_ensemble(spec(), g, 0.0, 50, 4, record_every=10)
    assert np.array_equal(coarse.values, full.values[:, ::10])
    assert np.array_equal(coarse.running_min(), full.values.min(axis=1))


# drift check -------------------------------------------------------------------------------

def test_decreasing_drift_passes_with_zero_K():
    r = check_one_sided_lipschitz(spec(drift=lambda t, x: -x), [0.0, 1.0], -5, 5, 101, K=0.0)
    assert r.passed and r.worst_violation <= 0
    assert r.tested_pairs == 2 * 101 * 100 // 2


def test_steep_drift_fails():
    r = check_one_sided_lipschitz(spec(drift=lambda t, x: 2 * x), [0.0], -1, 1, 11, K=1.0)
    assert not r.passed and r.worst_violation > 0


def test_sine_drift_passes_with_unit_K():
    # |sin'| <= 1; a dense lattice probes near-equal pairs where rounding matters
    r = check_one_sided_lipschitz(spec(drift=lambda t, x: np.sin(x)), [0.0], -20, 20, 4001, K=1.0)
    assert r.passed


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=0, max_value=5))
def test_drift_check_monotone_in_K(slope, extra):
    s = spec(drift=lambda t, x: slope * x + 0.3 * np.sin(3 * x))
    r1 = check_one_sided_lipschitz(s, [0.0], -2, 2, 41, K=1.0)
    r2 = check_one_sided_lipschitz(s, [0.0], -2, 2, 41, K=1.0 + extra)
    if r1.passed:
        assert r2.passed
    assert r2.worst_violation <= r1.worst_violation + 1e-12


def test_drift_check_argument_errors():
    with pytest.raises(InvalidArgument):
        check_one_sided_lipschitz(spec(), [0.0], 1, 0, 10)
    with pytest.raises(InvalidArgument):
        check_one_sided_lipschitz(spec(), [0.0], 0, 1, 1)
    with pytest.raises(InvalidArgument):
        DiffusionSpec(lambda t, x: 1.0, lambda t, x: 0.0, math.inf)
