"""Seeded property suites checking the closed forms against the channel oracle.

Every suite draws from its own Philox stream keyed by (seed, suite index),
so results do not depend on which suites run or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channel_algebra as ca
from . import envelope as env
from . import rigor
from .interval import Interval
from .scalar_bounds import classic_lower, classic_upper, f_serial, g_tri, g_tri_bsc

MAX_REPORTED = 10
DEFAULT_SAMPLES = 10**4


@dataclass
class SuiteResult:
    name: str
    samples: int
    failures: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def fail(self, **case):
        self.failures += 1
        if len(self.counterexamples) < MAX_REPORTED:
            self.counterexamples.append(case)

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return f"{verdict} {self.name}: {self.failures} failures in {self.samples} samples"


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


def _mix(rng, max_atoms=3):
    return ca.random_mix(rng, int(rng.integers(1, max_atoms + 1)))


def suite_parallel(rng, samples):
    res = SuiteResult("parallel-multiplicativity", samples)
    for _ in range(samples):
        a, b = _mix(rng), _mix(rng)
        za, zb = ca.bhattacharyya(a), ca.bhattacharyya(b)
        zp = ca.bhattacharyya(ca.parallel(a, b))
        if abs(zp - za * zb) > 1e-10:
            res.fail(a=a, b=b, z_parallel=zp, product=za * zb)
    return res


def suite_closed_forms(rng, samples, g=g_tri):
    """f and g against brute-force enumeration on single BSCs."""
    res = SuiteResult("closed-forms", samples)
    p = rng.uniform(0.0, 0.5, (samples, 3))
    z = 2.0 * np.sqrt(p * (1.0 - p))
    fz = f_serial(z[:, 0], z[:, 1])
    gz = g(z[:, 0], z[:, 1], z[:, 2])
    gb = g_tri_bsc(p[:, 0], p[:, 1], p[:, 2])
    for i in range(samples):
        a, b, c = (ca.make_bsc(v) for v in p[i])
        f_or = ca.bhattacharyya(ca.serial(a, b))
        g_or = ca.bhattacharyya(ca.serial(ca.parallel(a, b), c))
        if abs(fz[i] - f_or) > 1e-12 or abs(gz[i] - g_or) > 1e-12 or abs(gb[i] - g_or) > 1e-12:
            res.fail(p=p[i].tolist(), f=float(fz[i]), f_oracle=f_or, g=float(gz[i]),
                     g_bsc=float(gb[i]), g_oracle=g_or)
    return res


def suite_sandwich(rng, samples):
    """Serial bounds on random mixtures: f <= Z(A S B) <= BEC value, and the W S W case."""
    res = SuiteResult("serial-sandwich", samples)
    for _ in range(samples):
        a, b = _mix(rng), _mix(rng)
        x, y = ca.bhattacharyya(a), ca.bhattacharyya(b)
        zab = ca.bhattacharyya(ca.serial(a, b))
        bec = x + y - x * y
        zaa = ca.bhattacharyya(ca.serial(a, a))
        if not (f_serial(x, y) - 1e-10 <= zab <= bec + 1e-10
                and classic_lower(x) - 1e-10 <= zaa <= classic_upper(x) + 1e-10):
            res.fail(a=a, b=b, z_ab=zab, z_aa=zaa, x=x, y=y)
    return res


def suite_rigorous_diag(rng, samples, mesh: env.Mesh3):
    """rigorous_diag_bound(Z(W)) <= Z(W S W) for W = V P V."""
    res = SuiteResult("rigorous-diag", samples)
    for _ in range(samples):
        v = _mix(rng)
        w = ca.parallel(v, v)
        x = ca.bhattacharyya(w)
        lo = float(rigor.rigorous_diag_bound(mesh, min(max(x, 0.0), 1.0)))
        z = ca.bhattacharyya(ca.serial(w, w))
        if lo > z + 1e-10:
            res.fail(v=v, x=x, bound=lo, z_serial=z)
    return res


def suite_envelope(rng, samples, mesh: env.Mesh3, g=g_tri, raw_n: int = 20):
    """Certified envelope below g at random points; raw envelope below g_bsc at mesh points.

    ``g`` is the implementation under test: the raw envelope is built from it
    while the mesh-point check uses the independent BSC enumeration formula.
    """
    res = SuiteResult("envelope-soundness", samples)
    pts = rng.uniform(0.0, 1.0, (samples, 3))
    lhs = env.trilinear_eval(mesh, pts[:, 0], pts[:, 1], pts[:, 2])
    rhs = g_tri(pts[:, 0], pts[:, 1], pts[:, 2])
    for i in np.flatnonzero(lhs > rhs):
        res.fail(point=pts[i].tolist(), envelope=float(lhs[i]), g=float(rhs[i]))
    raw = env.tc_converge(env.init_mesh(raw_n, g))
    ax = np.linspace(0.0, 1.0, raw_n + 1)
    pz = 0.5 * (1.0 - np.sqrt(np.maximum(0.0, 1.0 - ax * ax)))
    ref = g_tri_bsc(pz[:, None, None], pz[None, :, None], pz[None, None, :])
    bad = raw.values > ref + 1e-12
    res.samples += raw.values.size
    for idx in np.argwhere(bad):
        i, j, k = map(int, idx)
        res.fail(mesh_point=(i, j, k), envelope=float(raw.values[i, j, k]),
                 g_oracle=float(ref[i, j, k]))
    return res


_OPS = {
    "add": (lambda a, b: a + b, lambda a, b: a + b),
    "sub": (lambda a, b: a - b, lambda a, b: a - b),
    "mul": (lambda a, b: a * b, lambda a, b: a * b),
    "div": (lambda a, b: a / b, lambda a, b: a / b),
    "sqrt": (lambda a, b: a.sqrt(), lambda a, b: np.sqrt(a)),
    "square": (lambda a, b: a.square(), lambda a, b: a * a),
}


def suite_interval(rng, samples, inner: int = 1000):
    """Each elementary op's output contains the op applied to sampled inputs."""
    res = SuiteResult("interval-containment", samples)
    per_op = max(1, samples // len(_OPS))
    res.samples = per_op * len(_OPS)
    for name, (iop, fop) in _OPS.items():
        for _ in range(per_op):
            ends = np.sort(rng.uniform(-2.0, 2.0, (2, 2)), axis=1)
            if name == "sqrt":
                ends = np.abs(ends)
                ends.sort(axis=1)
            a, b = Interval(*ends[0]), Interval(*ends[1])
            out = iop(a, b)
            xa = rng.uniform(ends[0, 0], ends[0, 1], inner)
            xb = rng.uniform(ends[1, 0], ends[1, 1], inner)
            with np.errstate(all="ignore"):
                vals = fop(xa, xb)
            vals = vals[np.isfinite(vals)]
            if not np.all(out.contains(vals)):
                res.fail(op=name, a=ends[0].tolist(), b=ends[1].tolist(),
                         out=(float(out.lo), float(out.hi)))
    return res


SUITES = ("parallel", "closed-forms", "sandwich", "interval", "rigorous-diag", "envelope")


def run_all(seed: int, mesh: env.Mesh3, samples: int = DEFAULT_SAMPLES, g=g_tri,
            only=None, envelope_samples: int | None = None):
    """Run the suites; ``mesh`` is the certified envelope used by the last two."""
    chosen = only or SUITES
    out = []
    for idx, name in enumerate(SUITES):
        if name not in chosen:
            continue
        rng = _rng(seed, idx)
        if name == "parallel":
            out.append(suite_parallel(rng, samples))
        elif name == "closed-forms":
            out.append(suite_closed_forms(rng, samples, g))
        elif name == "sandwich":
            out.append(suite_sandwich(rng, samples))
        elif name == "interval":
            out.append(suite_interval(rng, samples))
        elif name == "rigorous-diag":
            out.append(suite_rigorous_diag(rng, samples, mesh))
        else:
            out.append(suite_envelope(rng, envelope_samples or samples, mesh, g))
    return out
