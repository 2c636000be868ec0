"""Discrete tri-convex lower envelope on the uniform mesh {0, 1/n, ..., 1}^3.

Two solvers are provided.  ``jacobi-descend`` repeatedly replaces every point
that breaks midpoint convexity along an axis by the average of its two axis
neighbours.  ``graham-axes`` replaces every axis line by its lower convex hull
in a single O(n) scan.  Both only ever lower entries and keep every
tri-convex minorant below them, so they share the same limit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, MemoryBudgetError

log = logging.getLogger(__name__)

AXES = "xyz"
DEFAULT_TOL = 1e-13
DEFAULT_MEMORY_BUDGET = 2 * 1024**3
ENVELOPE_KIND = {"G": "Genv", "Gmerged": "GenvRig", "Gmono": "GenvMono"}
MAX_PASSES = {"jacobi-descend": 10**6, "graham-axes": 10**4}


@dataclass
class Mesh3:
    n: int
    values: np.ndarray
    kind: str = "G"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.n + 1,) * 3
        if self.values.shape != shape:
            raise ValueError(f"values have shape {self.values.shape}, expected {shape}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    def copy(self, kind: str | None = None) -> "Mesh3":
        return Mesh3(self.n, self.values.copy(), kind or self.kind, dict(self.meta))


def mesh_axes(n: int):
    """Broadcastable coordinate arrays (n+1,1,1), (1,n+1,1), (1,1,n+1)."""
    m = np.linspace(0.0, 1.0, n + 1)
    return m[:, None, None], m[None, :, None], m[None, None, :]


def check_budget(n: int, budget: int = DEFAULT_MEMORY_BUDGET, copies: int = 1) -> None:
    need = copies * 8 * (n + 1) ** 3
    if need > budget:
        raise MemoryBudgetError(f"n={n} needs {need} bytes, budget is {budget}")


def init_mesh(n: int, fn, kind: str = "G", budget: int = DEFAULT_MEMORY_BUDGET) -> Mesh3:
    """Sample ``fn(x, y, z)`` at every mesh point (fn must broadcast)."""
    if n < 2:
        raise DomainError("mesh resolution must be at least 2")
    check_budget(n, budget)
    x, y, z = mesh_axes(n)
    vals = np.asarray(fn(x, y, z), dtype=float)
    vals = np.array(np.broadcast_to(vals, (n + 1,) * 3), dtype=float)
    return Mesh3(n, vals, kind)


def _second_diff(a: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    return 2.0 * a[1:-1] - a[:-2] - a[2:]


def convexity_residual(m: Mesh3):
    """Largest ``2G[mid] - G[left] - G[right]`` over interior points and axes.

    Returns ``(residual, axis, (i, j, k))``; a residual <= 0 means the mesh is
    discretely tri-convex.
    """
    best = (-np.inf, "x", (0, 0, 0))
    for ax in range(3):
        d = _second_diff(m.values, ax)
        flat = int(np.argmax(d))
        r = float(d.flat[flat])
        if r > best[0]:
            idx = list(np.unravel_index(flat, d.shape))
            idx[0] += 1
            # undo moveaxis: position 0 holds the swept axis
            loc = [0, 0, 0]
            rest = [a for a in range(3) if a != ax]
            loc[ax] = int(idx[0])
            loc[rest[0]], loc[rest[1]] = int(idx[1]), int(idx[2])
            best = (r, AXES[ax], tuple(loc))
    return best


def _jacobi_axis(a: np.ndarray, axis: int) -> int:
    v = np.moveaxis(a, axis, 0)
    left, mid, right = v[:-2], v[1:-1], v[2:]
    avg = 0.5 * (left + right)
    bad = 2.0 * mid > left + right
    count = int(bad.sum())
    if count:
        mid[...] = np.where(bad, np.minimum(avg, mid), mid)
    return count


def descend_sweep(m: Mesh3, order=(0, 1, 2)):
    """One pass of the averaging update along x, then y, then z.

    Within an axis the update is simultaneous (reads the array as it stood
    before that axis), so the result does not depend on point ordering.
    """
    out = m.copy()
    changed = sum(_jacobi_axis(out.values, ax) for ax in order)
    return out, changed


def convexify_axis_graham(nodes, values) -> np.ndarray:
    """Lower convex hull of a 1-D profile re-sampled at its own nodes."""
    from ._kernels import lower_hull_line

    xs = np.ascontiguousarray(nodes, dtype=float)
    v = np.ascontiguousarray(values, dtype=float)
    if xs.shape != v.shape or xs.size < 2:
        raise DomainError("need matching node and value lists of length >= 2")
    if np.any(np.diff(xs) <= 0.0):
        raise DomainError("nodes must be strictly increasing")
    out = np.empty_like(v)
    lower_hull_line(xs, v, out, np.empty(v.size, np.int64))
    return out


def tc_converge(m: Mesh3, tol: float = DEFAULT_TOL, method: str = "graham-axes",
                order=(0, 1, 2), max_passes: int | None = None,
                kind: str | None = None) -> Mesh3:
    """Lower ``m`` to its discrete tri-convex envelope.

    Stops once the convexity residual along all three axes is <= tol.
    Raises ConvergenceError (carrying the best mesh) past the pass cap.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if method not in MAX_PASSES:
        raise DomainError(f"unknown method {method!r}")
    cap = max_passes or MAX_PASSES[method]
    out = m.copy(kind or ENVELOPE_KIND.get(m.kind, m.kind + "env"))
    vals = out.values
    order = np.asarray(order, dtype=np.int64)
    if method == "graham-axes":
        from ._kernels import graham_pass
        xs = out.nodes
    residual = convexity_residual(out)[0]
    passes = 0
    while residual > tol:
        if passes >= cap:
            raise ConvergenceError(
                f"{method} did not reach residual {tol:g} in {cap} passes",
                best=out, residual=residual)
        if method == "graham-axes":
            graham_pass(vals, xs, order)
        else:
            for ax in order:
                _jacobi_axis(vals, int(ax))
        passes += 1
        residual = convexity_residual(out)[0]
    out.meta.update(passes=passes, residual=residual, method=method, tol=tol)
    log.debug("%s converged in %d passes, residual %.3g", method, passes, residual)
    return out


def _locate(u: np.ndarray, n: int):
    s = u * n
    r = np.rint(s)
    s = np.where(np.abs(s - r) <= 8.0 * np.finfo(float).eps * n, r, s)
    i = np.minimum(np.floor(s), n - 1).astype(np.intp)
    return i, s - i


def trilinear_eval(m: Mesh3, x, y, z):
    """Trilinear interpolant of ``m`` at points of the unit cube.

    Exact at mesh points.  Zero-weight corners are skipped so that -inf
    sentinel entries only affect cells that actually use them.
    """
    x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float),
                                  np.asarray(z, float))
    for u in (x, y, z):
        if np.any((u < 0.0) | (u > 1.0)) or np.any(np.isnan(u)):
            raise DomainError("trilinear_eval needs points in [0, 1]^3")
    n = m.n
    i, a = _locate(x, n)
    j, b = _locate(y, n)
    k, c = _locate(z, n)
    G = m.values
    total = np.zeros(x.shape)
    for di, wa in ((0, 1.0 - a), (1, a)):
        for dj, wb in ((0, 1.0 - b), (1, b)):
            for dk, wc in ((0, 1.0 - c), (1, c)):
                w = wa * wb * wc
                v = G[i + di, j + dj, k + dk]
                total += w * np.where(w == 0.0, 0.0, v)
    return total if total.ndim else float(total)


def diag_eval(m: Mesh3, x):
    """Interpolant along the curve (sqrt x, sqrt x, x)."""
    x = np.asarray(x, float)
    r = np.sqrt(x)
    return trilinear_eval(m, r, r, x)
