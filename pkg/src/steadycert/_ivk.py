"""Vectorized interval kernels on arrays of endpoints.  Internal.

Arrays come in (lo, hi) pairs.  Elementwise add/mul use the same
error-free transformations as the scalar Enclosure type, so exact
operations stay exact.  The convolution and matrix-product kernels work
in midpoint-radius form on top of nearest-rounded numpy/BLAS products
and add an explicit a-priori bound on the accumulated rounding error of
a length-n nearest-rounded dot product (n*u*|a|^T|b| plus an underflow
allowance).  That bound assumes the platform BLAS evaluates dot products
as ordinary floating-point multiply/adds in some order (no Strassen-type
algebra), the standard assumption for verified linear algebra on BLAS.
"""

from __future__ import annotations

import math

import numpy as np

_U = 2.0**-53
_SPLIT = 134217729.0
_BIG = 2.0**996
_TINY = 2.0**-960
_MAX = math.ldexp(2.0 - 2.0**-52, 1022)
_UNDERFLOW_PAD = 1e-310  # absolute slack absorbing subnormal effects


def nudge_down(x):
    return np.nextafter(x, -np.inf)


def nudge_up(x):
    return np.nextafter(x, np.inf)


def _fix_nonfinite(lo, hi):
    bad_lo = ~np.isfinite(lo)
    bad_hi = ~np.isfinite(hi)
    if bad_lo.any():
        lo = np.where(bad_lo & (lo > 0), _MAX, lo)
    if bad_hi.any():
        hi = np.where(bad_hi & (hi < 0), -_MAX, hi)
    return lo, hi


def add(alo, ahi, blo, bhi):
    """Elementwise interval sum, exact when the float sum is exact."""
    with np.errstate(invalid="ignore", over="ignore"):
        s = alo + blo
        bb = s - alo
        e = (alo - (s - bb)) + (blo - bb)
        lo = np.where(e < 0.0, nudge_down(s), s)
        lo = np.where(np.isfinite(s), lo, np.where(s > 0, _MAX, -np.inf))

        t = ahi + bhi
        bb = t - ahi
        e = (ahi - (t - bb)) + (bhi - bb)
        hi = np.where(e > 0.0, nudge_up(t), t)
        hi = np.where(np.isfinite(t), hi, np.where(t < 0, -_MAX, np.inf))
    return lo, hi


def sub(alo, ahi, blo, bhi):
    return add(alo, ahi, -bhi, -blo)


def _prod_dir(a, b):
    """Directed roundings (down, up) of the elementwise product a*b."""
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        p = a * b
        ca = _SPLIT * a
        ah = ca - (ca - a)
        al = a - ah
        cb = _SPLIT * b
        bh = cb - (cb - b)
        bl = b - bh
        e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
        zero = (a == 0.0) | (b == 0.0)
        ok = zero | (
            (np.abs(a) < _BIG)
            & (np.abs(b) < _BIG)
            & (np.abs(p) > _TINY)
            & np.isfinite(p)
        )
        down = np.where(
            ok, np.where(e < 0.0, nudge_down(p), p), nudge_down(p)
        )
        up = np.where(ok, np.where(e > 0.0, nudge_up(p), p), nudge_up(p))
        down = np.where(zero, 0.0, down)
        up = np.where(zero, 0.0, up)
        nan = np.isnan(p) & ~zero
        if nan.any():
            down = np.where(nan, -np.inf, down)
            up = np.where(nan, np.inf, up)
    return down, up


def mul(alo, ahi, blo, bhi):
    """Elementwise interval product, exact when all endpoint products are."""
    d1, u1 = _prod_dir(alo, blo)
    d2, u2 = _prod_dir(alo, bhi)
    d3, u3 = _prod_dir(ahi, blo)
    d4, u4 = _prod_dir(ahi, bhi)
    lo = np.minimum(np.minimum(d1, d2), np.minimum(d3, d4))
    hi = np.maximum(np.maximum(u1, u2), np.maximum(u3, u4))
    return lo, hi


def abs_(lo, hi):
    """Elementwise |.| of intervals (exact)."""
    neg = hi <= 0.0
    straddle = (lo < 0.0) & (hi > 0.0)
    out_lo = np.where(neg, -hi, np.where(straddle, 0.0, lo))
    out_hi = np.maximum(np.abs(lo), np.abs(hi))
    return out_lo, out_hi


# -- midpoint-radius helpers ---------------------------------------------


def to_midrad(lo, hi):
    with np.errstate(invalid="ignore", over="ignore"):
        m = lo + 0.5 * (hi - lo)
        m = np.where(np.isfinite(m), m, 0.5 * lo + 0.5 * hi)
        r = nudge_up(np.maximum(m - lo, hi - m))
    return m, r


def from_midrad(m, r):
    return nudge_down(m - r), nudge_up(m + r)


def _dot_error_factor(n: int) -> float:
    # upper bound for gamma_n = n*u/(1-n*u), padded
    return (n + 4) * _U


def conv_midrad(am, ar, bm, br):
    """Full linear convolution of midpoint-radius interval vectors.

    Returns (cm, cr) with rigorous radii covering both input radii and
    the rounding error of the nearest-rounded convolutions.
    """
    n = min(len(am), len(bm))
    f = _dot_error_factor(n)
    cm = np.convolve(am, bm)
    absam, absbm = np.abs(am), np.abs(bm)
    mag = np.convolve(absam, absbm)
    with np.errstate(over="ignore"):
        cr = (
            np.convolve(absam, br)
            + np.convolve(ar, absbm)
            + np.convolve(ar, br)
            + f * mag
        )
        cr = nudge_up(cr * (1.0 + 8.0 * (n + 4) * _U) + _UNDERFLOW_PAD)
    return cm, cr


def matmul_midrad(Am, Ar, Bm, Br):
    """Interval matrix product in midpoint-radius form (BLAS-backed)."""
    n = Am.shape[1]
    f = _dot_error_factor(n)
    Cm = Am @ Bm
    absA, absB = np.abs(Am), np.abs(Bm)
    with np.errstate(over="ignore"):
        Cr = absA @ Br + Ar @ absB + Ar @ Br + f * (absA @ absB)
        Cr = nudge_up(Cr * (1.0 + 8.0 * (n + 4) * _U) + _UNDERFLOW_PAD)
    return Cm, Cr


def matmul(Alo, Ahi, Blo, Bhi):
    """Interval matrix product on endpoint form."""
    Am, Ar = to_midrad(Alo, Ahi)
    Bm, Br = to_midrad(Blo, Bhi)
    Cm, Cr = matmul_midrad(Am, Ar, Bm, Br)
    return from_midrad(Cm, Cr)


def sum_down(xs) -> float:
    from steadycert.enclosure import fsum_down

    return fsum_down(np.asarray(xs, dtype=float).tolist())


def sum_up(xs) -> float:
    from steadycert.enclosure import fsum_up

    return fsum_up(np.asarray(xs, dtype=float).tolist())
