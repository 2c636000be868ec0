"""Certified sub-mesh lower bounds on g.

Two arrays bound g from below between mesh points:

* ``G_mono`` uses monotonicity of g: evaluating one mesh step back in every
  coordinate gives a value below g on the whole cell above.
* ``G_smooth`` subtracts ``(m1 + m2 + m3) / (8 n^2)`` from g, where the m's
  bound the pure second derivatives on the cells touching the point.

``merge_better`` picks, cell by cell, whichever is tighter.  All evaluations
go through :mod:`.interval` and take the lower endpoint, so the arrays are
certified even at the mesh points themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelope import Mesh3, check_budget, diag_eval
from .errors import DomainError, ResolutionMismatchError
from .interval import Interval
from .scalar_bounds import classic_lower

SLAB = 8


@dataclass(frozen=True)
class CellBounds:
    m1: float
    m2: float
    m3: float


def _sq_root_part(v: Interval) -> Interval:
    """sqrt(1 - v^2) for v in [0, 1]."""
    return (1.0 - v.square()).clamp_below(0.0).sqrt()


def g_interval(x: Interval, y: Interval, z: Interval) -> Interval:
    """Enclosure of g over a box, written as (sqrt(R+) + sqrt(R-)) / 2."""
    s, t = _sq_root_part(x), _sq_root_part(y)
    xy2 = x.square() * y.square()
    z2 = z.square()
    plus = (xy2 + z2 * (s + t).square()).sqrt()
    minus = (xy2 + z2 * (s - t).square()).sqrt()
    return ((plus + minus) * 0.5).clamp_below(0.0)


def _sqrt_second(r, rv, rvv):
    # d^2/dv^2 sqrt(R) = (2 R R'' - R'^2) / (4 R^(3/2))
    return (2.0 * r * rvv - rv.square()) / (4.0 * r * r.sqrt())


def _sqrt_first(r, rv):
    return rv / (2.0 * r.sqrt())


def g_second_derivatives(x: Interval, y: Interval, z: Interval):
    """Enclosures of (g_xx, g_yy, g_zz) over a box.

    Uses ``g^2 = E = (Q + sqrt(D)) / 2`` with the polynomials

        Q = x^2 y^2 + z^2 (2 - x^2 - y^2)
        D = Q^2 - V,   V = 4 z^4 (1 - x^2)(1 - y^2)

    The split into two square roots is singular at x = 1 or y = 1 even
    though g is smooth there; this form is not.  It only breaks down where
    D or E can vanish, i.e. near points with two zero coordinates, and such
    boxes come back unbounded.
    """
    x2, y2, z2 = x.square(), y.square(), z.square()
    sx, sy = 1.0 - x2, 1.0 - y2
    w = 2.0 - x2 - y2
    z4 = z2.square()
    q = x2 * y2 + z2 * w
    v = 4.0 * z4 * sx * sy
    # D = R+ R-, each factor a sum of squares, encloses tighter than Q^2 - V
    s, t = sx.clamp_below(0.0).sqrt(), sy.clamp_below(0.0).sqrt()
    xy2 = x2 * y2
    d = ((xy2 + z2 * (s + t).square()) * (xy2 + z2 * (s - t).square())).clamp_below(0.0)
    e = ((q + d.sqrt()) * 0.5).clamp_below(0.0)

    derivs = (
        # (Q_v, Q_vv, V_v, V_vv)
        (2.0 * x * (y2 - z2), 2.0 * (y2 - z2), -8.0 * x * z4 * sy, -8.0 * z4 * sy),
        (2.0 * y * (x2 - z2), 2.0 * (x2 - z2), -8.0 * y * z4 * sx, -8.0 * z4 * sx),
        (2.0 * z * w, 2.0 * w, 16.0 * z * z2 * sx * sy, 48.0 * z2 * sx * sy),
    )
    out = []
    for qv, qvv, vv, vvv in derivs:
        dv = 2.0 * q * qv - vv
        dvv = 2.0 * qv.square() + 2.0 * q * qvv - vvv
        ev = (qv + _sqrt_first(d, dv)) * 0.5
        evv = (qvv + _sqrt_second(d, dv, dvv)) * 0.5
        out.append(_sqrt_second(e, ev, evv))
    return tuple(out)


def _node_enclosures(n: int):
    k = np.arange(n + 1, dtype=float)
    return Interval.ratio(k, float(n))


def _cell_boxes(n: int):
    nodes = _node_enclosures(n)
    return Interval(nodes.lo[:-1], nodes.hi[1:])


def _upper_clamped(v: Interval) -> np.ndarray:
    hi = np.where(np.isnan(v.hi), np.inf, v.hi)
    return np.maximum(hi, 0.0)


def cell_second_bounds(n: int, hess=g_second_derivatives) -> np.ndarray:
    """Per-cell upper bounds of max(g_vv, 0); shape (3, n, n, n)."""
    check_budget(n, copies=4)
    box = _cell_boxes(n)
    out = np.empty((3, n, n, n))
    yb = box[None, :, None]
    zb = box[None, None, :]
    for i0 in range(0, n, SLAB):
        xb = box[i0:i0 + SLAB, None, None]
        with np.errstate(all="ignore"):
            parts = hess(xb, yb, zb)
        for a, p in enumerate(parts):
            out[a, i0:i0 + SLAB] = np.broadcast_to(_upper_clamped(p), out[a, i0:i0 + SLAB].shape)
    return out


def _touching_max(cells: np.ndarray) -> np.ndarray:
    """Max over the (up to 8) cells touching each mesh point."""
    n = cells.shape[0]
    out = cells
    for ax in range(3):
        c = np.moveaxis(out, ax, 0)
        shape = list(c.shape)
        shape[0] = n + 1
        m = np.empty(shape)
        m[0] = c[0]
        m[n] = c[n - 1]
        np.maximum(c[:-1], c[1:], out=m[1:n])
        out = np.moveaxis(m, 0, ax)
    return out


def second_derivative_bounds(n: int, a: int, b: int, c: int,
                             hess=g_second_derivatives) -> CellBounds:
    """Bounds m1, m2, m3 on the cells touching mesh point (a/n, b/n, c/n)."""
    if not all(0 <= v <= n for v in (a, b, c)):
        raise DomainError("mesh indices out of range")
    box = _cell_boxes(n)
    ranges = [[i for i in (v - 1, v) if 0 <= i < n] for v in (a, b, c)]
    best = np.zeros(3)
    for i in ranges[0]:
        for j in ranges[1]:
            for k in ranges[2]:
                with np.errstate(all="ignore"):
                    parts = hess(box[i], box[j], box[k])
                best = np.maximum(best, [float(_upper_clamped(p)) for p in parts])
    return CellBounds(*best.tolist())


def _lower_on_mesh(n: int, fn, shift: int = 0) -> np.ndarray:
    """Certified lower bounds of fn at mesh points, optionally shifted back."""
    nodes = _node_enclosures(n)
    idx = np.maximum(np.arange(n + 1) - shift, 0)
    pts = nodes[idx]
    out = np.empty((n + 1,) * 3)
    yb, zb = pts[None, :, None], pts[None, None, :]
    for i0 in range(0, n + 1, SLAB):
        with np.errstate(all="ignore"):
            v = fn(pts[i0:i0 + SLAB, None, None], yb, zb)
        out[i0:i0 + SLAB] = np.broadcast_to(v.lo, out[i0:i0 + SLAB].shape)
    return out


def build_g_monotone(n: int, fn=g_interval) -> Mesh3:
    """``G_mono[a, b, c] = g(a - 1/n v 0, b - 1/n v 0, c - 1/n v 0)``, rounded down."""
    if n < 2:
        raise DomainError("mesh resolution must be at least 2")
    check_budget(n)
    return Mesh3(n, _lower_on_mesh(n, fn, shift=1), "Gmono")


def build_g_smooth(n: int, fn=g_interval, hess=g_second_derivatives) -> Mesh3:
    """``G_smooth = g - (m1 + m2 + m3) / (8 n^2)``, rounded down.

    Points touching a cell with an unbounded second derivative get -inf.
    """
    if n < 2:
        raise DomainError("mesh resolution must be at least 2")
    glo = _lower_on_mesh(n, fn)
    cells = cell_second_bounds(n, hess)
    msum = Interval(0.0)
    for a in range(3):
        msum = msum + _touching_max(cells[a])
    del cells
    with np.errstate(all="ignore"):
        vals = (Interval(glo) - msum / float(8 * n * n)).lo
    vals = np.where(np.isinf(msum.hi), -np.inf, vals)
    return Mesh3(n, vals, "Gsmooth")


def merge_better(gm: Mesh3, gs: Mesh3) -> Mesh3:
    """Per-cell choice between the monotone and smoothness arrays.

    A cell switches to ``gs`` only if ``gs > gm`` at all eight of its
    corners; a mesh point then takes ``gs`` only if every cell touching it
    switched.
    """
    if gm.n != gs.n:
        raise ResolutionMismatchError(f"resolutions differ: {gm.n} vs {gs.n}")
    better = gs.values > gm.values
    cell = np.ones((gm.n,) * 3, dtype=bool)
    for da in (0, 1):
        for db in (0, 1):
            for dc in (0, 1):
                cell &= better[da:da + gm.n, db:db + gm.n, dc:dc + gm.n]
    padded = np.pad(cell, 1, constant_values=True)
    n1 = gm.n + 1
    use_smooth = np.ones((n1,) * 3, dtype=bool)
    for da in (0, 1):
        for db in (0, 1):
            for dc in (0, 1):
                use_smooth &= padded[da:da + n1, db:db + n1, dc:dc + n1]
    vals = np.where(use_smooth, gs.values, gm.values)
    out = Mesh3(gm.n, vals, "Gmerged")
    out.meta["smooth_fraction"] = float(use_smooth.mean())
    return out


def rigorous_diag_bound(env, x):
    """Certified lower bound on Z(W S W) for a parallel combination W with Z(W) = x.

    The envelope interpolant is combined with the bound ``x sqrt(2 - x^2)``
    that holds for every channel; both are valid, so their max is too.
    """
    return np.maximum(diag_eval(env, x), classic_lower(x))
