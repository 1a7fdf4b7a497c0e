"""Counter-based random streams shared by every simulation kernel.

A stream is identified by a 64-bit seed ``s``. Its ``k``-th raw word is

    mix64(s + (k + 1) * GOLDEN)        (arithmetic mod 2**64)

where ``mix64`` is the SplitMix64 finalizer::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

This is exactly the SplitMix64 output sequence, but random access by counter,
so any variate can be regenerated without replaying the stream.  Uniforms take
the top 53 bits, ``u = ((w >> 11) + 0.5) / 2**53``, which lies strictly inside
(0, 1).  Standard normals are ``ndtri(u)`` (Wichura's AS241, double precision),
one uniform per normal.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(nogil=True, cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(nogil=True, cache=True, inline="always")
def raw_word(seed, k):
    return mix64(np.uint64(seed) + (np.uint64(k) + np.uint64(1)) * GOLDEN)


@nb.njit(nogil=True, cache=True, inline="always")
def uniform(seed, k):
    return (float(raw_word(seed, k) >> _S11) + 0.5) * _INV53


@nb.njit(nogil=True, cache=True)
def ndtri(p):
    """Inverse standard normal CDF, AS241 (PPND16), relative error ~1e-16."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                    + 67265.770927008700853) * r + 45921.953931549871457) * r
                  + 13731.693765509461125) * r + 1971.5909503065514427) * r
                + 133.14166789178437745) * r + 3.387132872796366608)
        den = (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                    + 39307.89580009271061) * r + 21213.794301586595867) * r
                  + 5394.1960214247511077) * r + 687.1870074920579083) * r
                + 42.313330701600911252) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
        den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
        den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0)
    x = num / den
    return -x if q < 0.0 else x


@nb.njit(nogil=True, cache=True, inline="always")
def normal(seed, k):
    return ndtri(uniform(seed, k))


@nb.njit(nogil=True, cache=True)
def fill_normals(seed, start, out):
    """Write normals ``start .. start+len(out)-1`` of a stream into ``out``.

    Bit-identical to calling :func:`normal` per index; the central rational
    approximation runs as a separate branch-free pass so it vectorizes.
    """
    n = out.shape[0]
    for i in range(n):
        out[i] = uniform(seed, start + i)
    # tails first: a tail normal has |z| > 1.43, so the central pass below
    # cannot mistake it for an untouched uniform
    for i in range(n):
        p = out[i]
        q = p - 0.5
        if abs(q) > 0.425:
            out[i] = ndtri(p)
    for i in range(n):
        q = out[i] - 0.5
        if abs(q) <= 0.425:
            r = 0.180625 - q * q
            num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                        + 67265.770927008700853) * r + 45921.953931549871457) * r
                      + 13731.693765509461125) * r + 1971.5909503065514427) * r
                    + 133.14166789178437745) * r + 3.387132872796366608)
            den = (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                        + 39307.89580009271061) * r + 21213.794301586595867) * r
                      + 5394.1960214247511077) * r + 687.1870074920579083) * r
                    + 42.313330701600911252) * r + 1.0)
            out[i] = q * num / den
    return out


@nb.njit(nogil=True, cache=True)
def normals(seed, start, count):
    return fill_normals(seed, start, np.empty(count))


@nb.njit(nogil=True, cache=True)
def uniforms(seed, start, count):
    out = np.empty(count)
    for i in range(count):
        out[i] = uniform(seed, start + i)
    return out


@nb.njit(nogil=True, cache=True)
def normals_at(seeds, k):
    """The ``k``-th normal of every stream in ``seeds``."""
    out = np.empty(seeds.shape[0])
    for i in range(seeds.shape[0]):
        out[i] = normal(seeds[i], k)
    return out


@nb.njit(nogil=True, cache=True)
def derive(master, index):
    return mix64(np.uint64(master) + (np.uint64(index) + np.uint64(1)) * GOLDEN)


@nb.njit(nogil=True, cache=True)
def derive_many(master, start, count):
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = derive(master, start + i)
    return out


@nb.njit(nogil=True, cache=True)
def derive_each(seeds, index):
    """Sub-stream ``index`` of every stream in ``seeds``."""
    out = np.empty(seeds.shape[0], dtype=np.uint64)
    for i in range(seeds.shape[0]):
        out[i] = derive(seeds[i], index)
    return out


@nb.njit(nogil=True, cache=True)
def uniforms_at(seeds, k):
    """The ``k``-th uniform of every stream in ``seeds``."""
    out = np.empty(seeds.shape[0])
    for i in range(seeds.shape[0]):
        out[i] = uniform(seeds[i], k)
    return out
