"""Compiled per-path kernels: streaming time change, exact Poisson sampling, crossing scan.

Time-change kernel
------------------
Brownian motion B is generated step by step on a grid of spacing ``h`` (the
output grid spacing) from the path's normal stream, and the clock is the
left-endpoint Riemann sum ``A_{k+1} = A_k + phi(B_k) h``.  The clock is kept as
``S_k * h`` with ``S_k`` the running sum of ``phi(B_i)``, i < k.  The output at
level ``s`` is ``B_{k-1}`` where ``k`` is the first node with ``A_k > s``: the
node whose clock increment carried the clock past ``s``.

Two clocks have a lower region handled in closed form instead of by stepping:

* indicator ``1{x >= 0}``: below zero the clock is frozen, so from a node
  ``b < 0`` we jump straight to the first grid node after the continuous path
  returns to 0.  The hitting time is ``b^2 / Z^2`` and the value at that node
  is ``N(0, r)`` with ``r`` the residual to the node.  Every skipped node lies
  below zero, so this is exact for the grid scheme.
* ``max(1, -n x)^-2`` below ``-1/n`` equals ``1 / (n x)^2``.  With
  ``u = int ds / B^2``, ``log|B|`` is a Brownian motion with drift ``-1/2`` in
  ``u``-time and the clock grows at ``du / n^2``.  The kernel advances
  ``log|B|`` exactly by steps of ``du = n^2 h``, so each step adds exactly ``h``
  of clock.  The path leaves this region when ``|B|`` drops back under ``1/n``.

Either way compute per path stays near one step per output node instead of
growing with the (heavy-tailed) Brownian horizon.  ``max_steps`` caps the
number of steps actually computed.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

from ._rng import derive, fill_normals, uniform

IDENTITY = 0
INDICATOR = 1
REFL_PRELIMIT = 2
POISSON_PRELIMIT = 3

OK = 0
EXHAUSTED = 1

_BUF = 256
_TWO52 = 4503599627370496.0


@nb.njit(nogil=True, cache=True)
def phi_poisson(n, x):
    """sigma_n(x)^-2 for the lattice-smoothing coefficient, computed in log space."""
    f = x - math.floor(x)
    w = 8.0 / math.sqrt(n)
    m_lo = min(0, int(math.ceil(f - w)))
    m_hi = max(1, int(math.floor(f + w)))
    e0 = -n * min(f * f, (1.0 - f) * (1.0 - f))
    s = 0.0
    for m in range(m_lo, m_hi + 1):
        d = f - m
        s += math.exp(-n * d * d - e0)
    return math.exp(0.5 * math.log(n / math.pi) + e0 + math.log(s))


@nb.njit(nogil=True, cache=True)
def log_sum_poisson(n, x):
    f = x - math.floor(x)
    w = 8.0 / math.sqrt(n)
    m_lo = min(0, int(math.ceil(f - w)))
    m_hi = max(1, int(math.floor(f + w)))
    e0 = -n * min(f * f, (1.0 - f) * (1.0 - f))
    s = 0.0
    for m in range(m_lo, m_hi + 1):
        d = f - m
        s += math.exp(-n * d * d - e0)
    return e0 + math.log(s)


@nb.njit(nogil=True, cache=True)
def phi(kind, n, x):
    if kind == IDENTITY:
        return 1.0
    if kind == INDICATOR:
        return 1.0 if x >= 0.0 else 0.0
    if kind == REFL_PRELIMIT:
        s = max(1.0, -n * x)
        return 1.0 / (s * s)
    return phi_poisson(n, x)


@nb.njit(nogil=True, cache=True)
def time_change_path(kind, n, seed, levels, every, max_steps, rec):
    """Record one time-changed path at every ``every``-th entry of ``levels`` into ``rec``.

    ``levels`` is a uniform grid starting at 0.  Returns
    ``(status, min, max, steps)`` with min/max over all levels.
    """
    m_out = levels.shape[0]
    h = levels[m_out - 1] / (m_out - 1)
    sqrt_h = math.sqrt(h)
    buf = np.empty(_BUF)
    base = 0
    pos = _BUF
    aux = derive(seed, 0)
    aux_ctr = 0
    deep = -1.0 / n if kind == REFL_PRELIMIT else 0.0
    du = n * n * h
    sqrt_du = math.sqrt(du)
    b = 0.0
    s_clock = 0.0
    j = 0
    steps = 0
    lo = math.inf
    hi = -math.inf
    while True:
        if kind == INDICATOR and b < 0.0:
            if pos == _BUF:
                fill_normals(seed, base, buf)
                base += _BUF
                pos = 0
            z = buf[pos]
            pos += 1
            tau = (b * b) / (z * z * h) if z != 0.0 else math.inf
            if tau < _TWO52:
                r = (math.ceil(tau) - tau) * h
            else:
                r = uniform(aux, aux_ctr) * h
                aux_ctr += 1
            if pos == _BUF:
                fill_normals(seed, base, buf)
                base += _BUF
                pos = 0
            b = math.sqrt(r) * buf[pos]
            pos += 1
            steps += 1
            if steps > max_steps:
                return EXHAUSTED, lo, hi, steps
            continue
        in_deep = kind == REFL_PRELIMIT and b < deep
        rate = 1.0 if in_deep else phi(kind, n, b)
        s_new = s_clock + rate
        a_new = s_new * h
        while j < m_out and a_new > levels[j]:
            if j % every == 0:
                rec[j // every] = b
            if b < lo:
                lo = b
            if b > hi:
                hi = b
            j += 1
        if j >= m_out:
            return OK, lo, hi, steps
        if pos == _BUF:
            fill_normals(seed, base, buf)
            base += _BUF
            pos = 0
        z = buf[pos]
        pos += 1
        if in_deep:
            rho = math.log(-b) - 0.5 * du + sqrt_du * z
            b = -math.exp(rho)
        else:
            b = b + sqrt_h * z
        s_clock = s_new
        steps += 1
        if steps > max_steps:
            return EXHAUSTED, lo, hi, steps


@nb.njit(nogil=True, cache=True)
def time_change_batch(kind, n, seeds, levels, every, max_steps):
    n_paths = seeds.shape[0]
    n_rec = (levels.shape[0] - 1) // every + 1
    rec = np.empty((n_paths, n_rec))
    lo = np.empty(n_paths)
    hi = np.empty(n_paths)
    status = np.zeros(n_paths, dtype=np.int64)
    steps = np.zeros(n_paths, dtype=np.int64)
    for i in range(n_paths):
        st, a, b, k = time_change_path(kind, n, seeds[i], levels, every, max_steps, rec[i])
        status[i] = st
        lo[i] = a
        hi[i] = b
        steps[i] = k
        if st != OK:
            break
    return rec, lo, hi, status, steps


@nb.njit(nogil=True, cache=True)
def poisson_path(rate, seed, levels, every, count_until, rec):
    """Symmetric +-1 jumps at Exp(rate) spacings, rendered cadlag on ``levels``.

    Stream layout: uniform 2i drives the i-th waiting time, uniform 2i+1 its sign.
    Returns the number of jumps in ``[0, min(count_until, levels[-1])]``.
    """
    m_out = levels.shape[0]
    t_end = levels[m_out - 1]
    k = 0
    x = 0.0
    j = 0
    t = 0.0
    count = 0
    while True:
        t += -math.log(uniform(seed, k)) / rate
        k += 1
        while j < m_out and levels[j] < t:
            if j % every == 0:
                rec[j // every] = x
            j += 1
        if t > t_end:
            break
        x += 1.0 if uniform(seed, k) < 0.5 else -1.0
        k += 1
        if t <= count_until:
            count += 1
    while j < m_out:
        if j % every == 0:
            rec[j // every] = x
        j += 1
    return count


@nb.njit(nogil=True, cache=True)
def poisson_batch(rate, seeds, levels, every, count_until):
    n_paths = seeds.shape[0]
    rec = np.empty((n_paths, (levels.shape[0] - 1) // every + 1))
    counts = np.empty(n_paths, dtype=np.int64)
    for i in range(n_paths):
        counts[i] = poisson_path(rate, seeds[i], levels, every, count_until, rec[i])
    return rec, counts


@nb.njit(nogil=True, cache=True)
def crossing_events(y, z, delta):
    """Sign changes of y - z as rows (k, l, touched, up).

    ``k`` is the last node before the change with nonzero difference, ``l`` the
    first after it; nodes strictly between are exact ties.  The crossing
    touches when some node in ``[k, l]`` has ``|y - z| <= delta``.
    """
    n = y.shape[0]
    out = np.empty((n, 4), dtype=np.int64)
    m = 0
    last = -1
    last_sign = 0
    for i in range(n):
        d = y[i] - z[i]
        s = 1 if d > 0.0 else (-1 if d < 0.0 else 0)
        if s == 0:
            continue
        if last_sign != 0 and s != last_sign:
            touched = (i - last > 1) or abs(y[last] - z[last]) <= delta or abs(d) <= delta
            out[m, 0] = last
            out[m, 1] = i
            out[m, 2] = 1 if touched else 0
            out[m, 3] = 1 if s > 0 else 0
            m += 1
        last = i
        last_sign = s
    return out[:m]


@nb.njit(nogil=True, cache=True)
def untouched_crossing_flags(ys, zs, delta):
    """Per pair: (any untouched Y-over-Z crossing, any untouched Z-over-Y crossing)."""
    n_pairs = ys.shape[0]
    up = np.zeros(n_pairs, dtype=np.bool_)
    down = np.zeros(n_pairs, dtype=np.bool_)
    for p in range(n_pairs):
        ev = crossing_events(ys[p], zs[p], delta)
        for e in range(ev.shape[0]):
            if ev[e, 2] == 0:
                if ev[e, 3] == 1:
                    up[p] = True
                else:
                    down[p] = True
    return up, down


@nb.njit(nogil=True, cache=True)
def lattice_transitions(values):
    """Per row: moves between neighbouring integers, starting from the integer 0.

    The current site changes to ``k + 1`` (``k - 1``) once the path reaches
    ``k + 1`` (``k - 1``); values strictly between neighbours never count.
    """
    n = values.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        cur = 0.0
        for j in range(values.shape[1]):
            x = values[i, j]
            while x >= cur + 1.0:
                cur += 1.0
                out[i] += 1
            while x <= cur - 1.0:
                cur -= 1.0
                out[i] += 1
    return out
