"""Compensated double-double arithmetic on numpy arrays.

A value is carried as an unevaluated pair (hi, lo) of float64 with
|lo| <= ulp(hi)/2, giving roughly 32 significant decimal digits.  Used
where alternating binomial sums would otherwise lose the ~1e-9 tail of
the state probabilities to cancellation.
"""

from __future__ import annotations

import numpy as np

# Dekker splitting constant for 53-bit doubles: 2**27 + 1.
_SPLIT = 134217729.0


def two_sum(a, b):
    s = a + b
    v = s - a
    e = (a - (s - v)) + (b - v)
    return s, e


def quick_two_sum(a, b):
    # requires |a| >= |b| elementwise
    s = a + b
    e = b - (s - a)
    return s, e


def two_prod(a, b):
    p = a * b
    ah = _SPLIT * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLIT * b
    bh = bh - (bh - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def dd(value):
    """Promote a float/int/array to a dd pair (exact for floats)."""
    hi = np.asarray(value, dtype=float)
    return hi, np.zeros_like(hi)


def dd_from_int(n: int):
    """Exact dd representation of a python int with |n| < 2**106."""
    hi = float(n)
    lo = float(n - int(hi))
    return hi, lo


def dd_add(x, y):
    xh, xl = x
    yh, yl = y
    s, e = two_sum(xh, yh)
    e = e + (xl + yl)
    return quick_two_sum(s, e)


def dd_neg(x):
    return -x[0], -x[1]

def dd_sub(x, y):
    return dd_add(x, dd_neg(y))


def dd_mul(x, y):
    xh, xl = x
    yh, yl = y
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return quick_two_sum(p, e)


def dd_mul_float(x, f):
    xh, xl = x
    p, e = two_prod(xh, f)
    e = e + xl * f
    return quick_two_sum(p, e)


def dd_div(x, y):
    xh, xl = x
    yh, yl = y
    q1 = xh / yh
    r = dd_add(x, dd_neg(dd_mul_float((yh, yl), q1)))
    q2 = (r[0] + r[1]) / yh
    return quick_two_sum(q1, q2)


def dd_to_float(x):
    return x[0] + x[1]


def dd_zeros(shape):
    return np.zeros(shape), np.zeros(shape)


def dd_dot_float(xh, xl, v):
    """Sum_k (xh[..., k], xl[..., k]) * v[k] accumulated in dd.

    v is a plain float64 vector; the products are formed exactly and the
    accumulation stays in dd, so the only error left is the error of v
    itself.  Returns a dd pair reduced over the last axis.
    """
    acc_h = np.zeros(xh.shape[:-1])
    acc_l = np.zeros(xh.shape[:-1])
    for k in range(xh.shape[-1]):
        th, tl = dd_mul_float((xh[..., k], xl[..., k]), v[k])
        acc_h, acc_l = dd_add((acc_h, acc_l), (th, tl))
    return acc_h, acc_l
