"""Compiled inner loops for the envelope solver."""

import numpy as np
from numba import njit


@njit(cache=True)
def lower_hull_line(xs, v, out, hidx):
    """Lower convex hull of the points (xs[i], v[i]), re-sampled at xs.

    Collinear middle points are dropped from the hull support; they are then
    recomputed by interpolation, which leaves them (up to rounding) where
    they were.  The result never exceeds the input.
    """
    n = v.shape[0]
    m = 0
    for i in range(n):
        while m >= 2:
            a = hidx[m - 2]
            b = hidx[m - 1]
            if (v[b] - v[a]) * (xs[i] - xs[a]) < (v[i] - v[a]) * (xs[b] - xs[a]):
                break
            m -= 1
        hidx[m] = i
        m += 1
    for h in range(m - 1):
        a = hidx[h]
        b = hidx[h + 1]
        out[a] = v[a]
        span = xs[b] - xs[a]
        for i in range(a + 1, b):
            val = v[a] + (v[b] - v[a]) * ((xs[i] - xs[a]) / span)
            out[i] = val if val < v[i] else v[i]
    out[n - 1] = v[n - 1]


@njit(cache=True)
def graham_pass(G, xs, order):
    """Convexify every axis line of G in place, one axis after another.

    Returns the largest decrease of any entry.
    """
    n1 = G.shape[0]
    buf = np.empty(n1)
    out = np.empty(n1)
    hidx = np.empty(n1, np.int64)
    change = 0.0
    for ax in order:
        for j in range(n1):
            for k in range(n1):
                for i in range(n1):
                    if ax == 0:
                        buf[i] = G[i, j, k]
                    elif ax == 1:
                        buf[i] = G[j, i, k]
                    else:
                        buf[i] = G[j, k, i]
                lower_hull_line(xs, buf, out, hidx)
                for i in range(n1):
                    d = buf[i] - out[i]
                    if d > change:
                        change = d
                    if ax == 0:
                        G[i, j, k] = out[i]
                    elif ax == 1:
                        G[j, i, k] = out[i]
                    else:
                        G[j, k, i] = out[i]
    return change
