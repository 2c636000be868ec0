"""Closed-form Bhattacharyya bounds.

``f_serial`` is the exact Z of a serial combination of two BSCs, written in
terms of the operands' Z values.  ``g_tri`` does the same for
``(U P V) S W``.  All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import numpy as np


def _sqrt0(v):
    return np.sqrt(np.maximum(v, 0.0))


def f_serial(x, y):
    """``sqrt(x^2 + y^2 - x^2 y^2)``, bi-convex on the unit square."""
    x2, y2 = np.square(x), np.square(y)
    return _sqrt0(x2 + y2 - x2 * y2)


def g_tri_bsc(p, q, r):
    """Z of ``(BSC(p) P BSC(q)) S BSC(r)`` by direct enumeration of the outputs."""
    p, q, r = np.asarray(p, float), np.asarray(q, float), np.asarray(r, float)
    pb, qb, rb = 1.0 - p, 1.0 - q, 1.0 - r
    first = (p * qb * rb + pb * q * r) * (p * qb * r + pb * q * rb)
    second = (p * q * rb + pb * qb * r) * (p * q * r + pb * qb * rb)
    return 2.0 * _sqrt0(first) + 2.0 * _sqrt0(second)


def cd_pair(x, y, z):
    """The pair (C, D) with ``g = sqrt(C + D) + sqrt(C - D)``."""
    x2, y2, z2 = np.square(x), np.square(y), np.square(z)
    c = 0.25 * (x2 * y2 + (1.0 - x2) * z2 + (1.0 - y2) * z2)
    d = 0.5 * _sqrt0(1.0 - x2) * _sqrt0(1.0 - y2) * z2
    return c, d


def g_tri(x, y, z):
    """Z of ``(U P V) S W`` for BSCs with Z values x, y, z.

    Uses ``C +- D = (x^2 y^2 + z^2 (s +- t)^2) / 4`` with ``s = sqrt(1-x^2)``,
    ``t = sqrt(1-y^2)``, which avoids the cancellation in ``C - D`` near the
    coordinate axes.  ``s - t`` is formed as ``(y^2 - x^2) / (s + t)`` for
    the same reason.
    """
    x2, y2 = np.square(x), np.square(y)
    s, t = _sqrt0(1.0 - x2), _sqrt0(1.0 - y2)
    st = s + t
    with np.errstate(invalid="ignore", divide="ignore"):
        diff = np.where(st > 0.0, (y2 - x2) / np.where(st > 0.0, st, 1.0), 0.0)
    xy2 = x2 * y2
    z2 = np.square(z)
    return 0.5 * (np.sqrt(xy2 + z2 * st * st) + np.sqrt(xy2 + z2 * diff * diff))


def g_diag_closed(x):
    """``g(sqrt(x), sqrt(x), x) = x (1 + sqrt(5 - 4x)) / 2``."""
    x = np.asarray(x, float)
    return 0.5 * x * (1.0 + _sqrt0(5.0 - 4.0 * x))


def classic_lower(x):
    """``x sqrt(2 - x^2)``: the smallest Z(W S W) over channels with Z(W) = x."""
    x = np.asarray(x, float)
    return x * _sqrt0(2.0 - x * x)


def classic_upper(x):
    """``2x - x^2``: attained by erasure channels."""
    x = np.asarray(x, float)
    return 2.0 * x - x * x


def classic_bounds(x):
    """Return (lower, upper, parallel) bounds for W S W and W P W given Z(W) = x."""
    x = np.asarray(x, float)
    return classic_lower(x), classic_upper(x), x * x
