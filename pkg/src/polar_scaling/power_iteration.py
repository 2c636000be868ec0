"""Eigenfunction power iteration on a 1-D node grid.

Two modes share one engine.  The classic mode carries a single score h and
ranges the serial child's Bhattacharyya parameter over the classic interval
``[x sqrt(2 - x^2), 2x - x^2]``.  The two-state mode carries ``phi_s`` and
``phi_p``, one per "last combination was serial / parallel" state.  Its
parallel state uses a tighter lower end ``diag(x)`` for the serial child.

Grids are piecewise linear between nodes.  Endpoints are pinned at 0.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .scalar_bounds import classic_lower, classic_upper

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-15
DEFAULT_MAX_ITER = 50_000
SCHEMES = ("uniform", "chebyshev")


def make_grid(ell: int, scheme: str = "chebyshev") -> np.ndarray:
    """``ell + 1`` ascending nodes on [0, 1]."""
    if ell < 2:
        raise DomainError("ell must be at least 2")
    k = np.arange(ell + 1, dtype=float)
    if scheme == "uniform":
        nodes = k / ell
    elif scheme == "chebyshev":
        nodes = (1.0 - np.cos(k * np.pi / ell)) / 2.0
    else:
        raise DomainError(f"unknown node scheme {scheme!r}")
    nodes[0], nodes[-1] = 0.0, 1.0
    return nodes


@dataclass
class Grid1:
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.shape != self.values.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and values must be 1-D arrays of equal length")
        if self.nodes[0] != 0.0 or self.nodes[-1] != 1.0:
            raise DomainError("grid must span [0, 1]")

    def __call__(self, x):
        return lin_eval(self, x)

    def argmax(self) -> float:
        # np.argmax returns the first maximum, i.e. the smallest node
        return float(self.nodes[int(np.argmax(self.values))])


def lin_eval(g: Grid1, x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)) or np.any(np.isnan(x)):
        raise DomainError("lin_eval needs x in [0, 1]")
    out = np.interp(x, g.nodes, g.values)
    return out if out.ndim else float(out)


def h0(x):
    x = np.asarray(x, dtype=float)
    return x**0.78 * (1.0 - x) ** 0.78 * (2.0 * x * x + 3.0)


def init_h0(nodes) -> Grid1:
    v = h0(nodes)
    v[0] = v[-1] = 0.0
    return Grid1(np.asarray(nodes, float).copy(), v)


def _clamp(am, lo, hi):
    # three cases: below the range, above it, or inside
    return np.where(lo >= am, lo, np.where(hi <= am, hi, am))


def argmax_y(g: Grid1, x):
    """Maximiser of g over ``[x sqrt(2 - x^2), 2x - x^2]``, assuming g unimodal."""
    x = np.asarray(x, dtype=float)
    out = _clamp(g.argmax(), classic_lower(x), classic_upper(x))
    return out if out.ndim else float(out)


def argmax_z(g: Grid1, x, diag):
    """Like :func:`argmax_y` with the lower end replaced by ``diag(x)``."""
    x = np.asarray(x, dtype=float)
    hi = classic_upper(x)
    out = _clamp(g.argmax(), np.minimum(diag(x), hi), hi)
    return out if out.ndim else float(out)


def mu_from_lambda(lam: float) -> float:
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    return 1.0 / -np.log2(lam)


@dataclass
class EigenReport:
    lambda_s: float
    lambda_p: float
    lam: float
    mu_upper: float
    iterations: int
    final_delta: float
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"lambda_s": self.lambda_s, "lambda_p": self.lambda_p,
             "lambda": self.lam, "mu_upper": self.mu_upper,
             "iterations": self.iterations, "final_delta": self.final_delta}
        d.update(self.extra)
        return d


def is_unimodal(values: np.ndarray) -> bool:
    """Non-decreasing up to the first maximum, non-increasing after it."""
    k = int(np.argmax(values))
    return bool(np.all(np.diff(values[:k + 1]) >= 0.0)
                and np.all(np.diff(values[k:]) <= 0.0))


class RangeMax:
    """Sparse table for max of node values over index ranges."""

    def __init__(self, values: np.ndarray):
        self.levels = [np.asarray(values, float)]
        w = 1
        while 2 * w <= len(values):
            prev = self.levels[-1]
            self.levels.append(np.maximum(prev[:-w], prev[w:]))
            w *= 2

    def query(self, i, j):
        """Max over indices i..j inclusive (arrays, i <= j)."""
        span = j - i + 1
        k = np.floor(np.log2(span)).astype(np.intp)
        out = np.empty(np.shape(i))
        for lv in np.unique(k):
            sel = k == lv
            a = self.levels[lv]
            out[sel] = np.maximum(a[i[sel]], a[j[sel] - (1 << lv) + 1])
        return out


def range_sup(g: Grid1, lo, hi):
    """Sup of the interpolant of g over [lo, hi], pointwise in the arrays.

    The interpolant is piecewise linear, so the sup is attained at an end
    or at a node inside the range.
    """
    lo = np.asarray(lo, float)
    hi = np.maximum(np.asarray(hi, float), lo)
    best = np.maximum(np.interp(lo, g.nodes, g.values), np.interp(hi, g.nodes, g.values))
    i = np.searchsorted(g.nodes, lo, side="right")
    j = np.searchsorted(g.nodes, hi, side="left") - 1
    inside = i <= j
    if np.any(inside):
        rm = RangeMax(g.values)
        best[inside] = np.maximum(best[inside], rm.query(i[inside], j[inside]))
    return best


def _sup_values(g: Grid1, x, lo, hi):
    """g's sup over [lo, hi] at each x; fast path when g is unimodal."""
    if is_unimodal(g.values):
        return np.interp(_clamp(g.argmax(), lo, hi), g.nodes, g.values)
    log.info("grid is not unimodal; using range-max for the sup")
    return range_sup(g, lo, hi)


def classic_quotient(g: Grid1) -> float:
    """max over interior nodes of (g(x^2) + sup g over the classic range) / 2g(x)."""
    x = g.nodes[1:-1]
    num = np.interp(x * x, g.nodes, g.values) + _sup_values(g, x, classic_lower(x), classic_upper(x))
    return float(np.max(num / (2.0 * g.values[1:-1])))


def twostate_quotients(s: Grid1, p: Grid1, diag):
    x = s.nodes[1:-1]
    hi = classic_upper(x)
    par = np.interp(x * x, p.nodes, p.values)
    ys = _sup_values(s, x, classic_lower(x), hi)
    zs = _sup_values(s, x, np.minimum(diag(x), hi), hi)
    lam_s = float(np.max((par + ys) / (2.0 * s.values[1:-1])))
    lam_p = float(np.max((par + zs) / (2.0 * p.values[1:-1])))
    return lam_s, lam_p


def _check_tol(tol, max_iter):
    if tol <= 0:
        raise DomainError("tol must be positive")
    if max_iter < 1:
        raise DomainError("max_iter must be at least 1")


def classic_iterate(nodes, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                    init: Grid1 | None = None):
    """Power iteration ``H' = (H(x^2) + H(y*)) / 2`` normalised by its max."""
    _check_tol(tol, max_iter)
    g = init if init is not None else init_h0(nodes)
    L = g.nodes
    x2 = L * L
    lo, hi = classic_lower(L), classic_upper(L)
    H = g.values / g.values.max()
    delta = np.inf
    for it in range(1, max_iter + 1):
        y = _clamp(L[int(np.argmax(H))], lo, hi)
        Hn = 0.5 * (np.interp(x2, L, H) + np.interp(y, L, H))
        Hn[0] = Hn[-1] = 0.0
        Hn /= Hn.max()
        delta = float(np.max(np.abs(Hn - H)))
        H = Hn
        if delta <= tol:
            break
    else:
        grid = Grid1(L, H)
        lam = classic_quotient(grid)
        rep = EigenReport(lam, lam, lam, mu_from_lambda(lam), max_iter, delta)
        raise ConvergenceError(f"classic iteration did not reach {tol:g} in {max_iter} steps",
                               best=(grid, rep), residual=delta)
    grid = Grid1(L, H)
    lam = classic_quotient(grid)
    return grid, EigenReport(lam, lam, lam, mu_from_lambda(lam), it, delta)


def twostate_iterate(nodes, diag, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     init=None):
    """Joint iteration of the serial-state and parallel-state scores.

    ``diag(x)`` is a lower bound on the serial child's parameter when the
    parent came out of a parallel combination with parameter x.
    """
    _check_tol(tol, max_iter)
    if init is None:
        s0 = init_h0(nodes)
        init = (s0, Grid1(s0.nodes, s0.values.copy()))
    L = init[0].nodes
    x2 = L * L
    hi = classic_upper(L)
    lo_s = classic_lower(L)
    lo_p = np.minimum(np.asarray(diag(L), float), hi)
    m = init[0].values.max()
    S, P = init[0].values / m, init[1].values / m
    delta = np.inf
    for it in range(1, max_iter + 1):
        am = L[int(np.argmax(S))]
        par = np.interp(x2, L, P)
        Sn = 0.5 * (par + np.interp(_clamp(am, lo_s, hi), L, S))
        Pn = 0.5 * (par + np.interp(_clamp(am, lo_p, hi), L, S))
        Sn[0] = Sn[-1] = Pn[0] = Pn[-1] = 0.0
        m = Sn.max()
        Sn /= m
        Pn /= m
        delta = float(max(np.max(np.abs(Sn - S)), np.max(np.abs(Pn - P))))
        S, P = Sn, Pn
        if delta <= tol:
            break
    else:
        it = max_iter
    s, p = Grid1(L, S), Grid1(L, P)
    lam_s, lam_p = twostate_quotients(s, p, diag)
    lam = max(lam_s, lam_p)
    rep = EigenReport(lam_s, lam_p, lam, mu_from_lambda(lam), it, delta)
    if delta > tol:
        raise ConvergenceError(f"two-state iteration did not reach {tol:g} in {max_iter} steps",
                               best=((s, p), rep), residual=delta)
    return (s, p), rep


def write_dump(path, grids, names) -> None:
    """Plot-ready rows ``node,<name>...`` for one or more grids on shared nodes."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", *names])
        cols = [grids[0].nodes] + [g.values for g in grids]
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
