"""End-to-end runs: envelope build, rigorous merge, power iteration, reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import envelope as env
from . import power_iteration as pi
from . import rigor
from .meshio import MeshCache
from .scalar_bounds import classic_lower, g_diag_closed, g_tri

log = logging.getLogger(__name__)

DIAG_MODES = ("classic", "closed-form", "envelope", "rigorous-envelope")
PRESETS = {
    "desk": {"n": 100, "ell": 10**4},
    "paper": {"n": 200, "ell": 10**6},
}


@dataclass
class PipelineConfig:
    n: int = 200
    ell: int = 10**6
    scheme: str = "chebyshev"
    diag_mode: str = "rigorous-envelope"
    tol_envelope: float = env.DEFAULT_TOL
    tol_iter: float = pi.DEFAULT_TOL
    max_iter: int = pi.DEFAULT_MAX_ITER
    seed: int = 0
    cache_dir: str | None = None
    out_format: str = "json"
    tc_method: str = "graham-axes"

    def __post_init__(self):
        if self.n < 2 or self.ell < 2:
            raise ValueError("n and ell must be at least 2")
        if self.tol_envelope <= 0 or self.tol_iter <= 0:
            raise ValueError("tolerances must be positive")
        if self.scheme not in pi.SCHEMES:
            raise ValueError(f"unknown node scheme {self.scheme!r}")
        if self.diag_mode not in DIAG_MODES:
            raise ValueError(f"unknown diag mode {self.diag_mode!r}")
        if self.out_format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.out_format!r}")

    @classmethod
    def preset(cls, name: str, **overrides) -> "PipelineConfig":
        return cls(**{**PRESETS[name], **overrides})


@dataclass
class PipelineReport:
    command: str
    config: dict
    lambda_s: float = float("nan")
    lambda_p: float = float("nan")
    lam: float = float("nan")
    mu_upper: float = float("nan")
    iterations: int = 0
    final_delta: float = float("nan")
    envelope_residual: float | None = None
    stage_seconds: dict = field(default_factory=dict)
    cache_hits: list = field(default_factory=list)
    cache_built: list = field(default_factory=list)
    status: str = "ok"

    @classmethod
    def from_eigen(cls, command, cfg, rep: pi.EigenReport, **kw):
        return cls(command, asdict(cfg), rep.lambda_s, rep.lambda_p, rep.lam,
                   float(rep.mu_upper), rep.iterations, rep.final_delta, **kw)

    def as_dict(self) -> dict:
        d = asdict(self)
        return {("lambda" if k == "lam" else k): v for k, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, default=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["key", "value"])
        for k, v in _flatten(self.as_dict()):
            w.writerow([k, v])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list):
            yield key, ";".join(map(str, v))
        else:
            yield key, v


class _Stages:
    def __init__(self):
        self.seconds = {}

    def run(self, name, fn, *args, **kw):
        t = time.perf_counter()
        out = fn(*args, **kw)
        self.seconds[name] = self.seconds.get(name, 0.0) + time.perf_counter() - t
        return out


def run_classic(cfg: PipelineConfig, dump: str | Path | None = None):
    st = _Stages()
    nodes = pi.make_grid(cfg.ell, cfg.scheme)
    grid, rep = st.run("iterate", pi.classic_iterate, nodes, cfg.tol_iter, cfg.max_iter)
    if dump:
        pi.write_dump(dump, [grid], ["h"])
    return PipelineReport.from_eigen("classic", cfg, rep, stage_seconds=st.seconds)


class EnvelopeBuilder:
    """Lazily builds and caches every mesh the pipeline can ask for."""

    def __init__(self, cfg: PipelineConfig, cache: MeshCache | None = None):
        self.cfg = cfg
        self.cache = cache if cache is not None else MeshCache(cfg.cache_dir)
        self.stages = _Stages()
        self._mem = {}

    def _get(self, kind, build):
        if kind not in self._mem:
            if not self.cache.path(kind, self.cfg.n, self.cfg.tol_envelope).exists():
                log.warning("no cached %s mesh for n=%d, building it", kind, self.cfg.n)
            self._mem[kind] = self.stages.run(
                kind, self.cache.get, kind, self.cfg.n, self.cfg.tol_envelope, build)
        return self._mem[kind]

    def _tc(self, src_kind, kind):
        src = getattr(self, src_kind)()
        return env.tc_converge(src, self.cfg.tol_envelope, self.cfg.tc_method, kind=kind)

    def raw(self):
        return self._get("G", lambda: env.init_mesh(self.cfg.n, g_tri))

    def raw_env(self):
        return self._get("Genv", lambda: self._tc("raw", "Genv"))

    def mono(self):
        return self._get("Gmono", lambda: rigor.build_g_monotone(self.cfg.n))

    def mono_env(self):
        return self._get("GenvMono", lambda: self._tc("mono", "GenvMono"))

    def smooth(self):
        return self._get("Gsmooth", lambda: rigor.build_g_smooth(self.cfg.n))

    def merged(self):
        return self._get("Gmerged", lambda: rigor.merge_better(self.mono(), self.smooth()))

    def rigorous_env(self):
        return self._get("GenvRig", lambda: self._tc("merged", "GenvRig"))

    def build_all(self):
        return [self.raw(), self.mono(), self.smooth(), self.merged(), self.rigorous_env()]


def diag_function(cfg: PipelineConfig, builder: EnvelopeBuilder | None = None):
    """The lower bound on Z(W^s) for W = V P V, as a function of x = Z(W)."""
    mode = cfg.diag_mode
    if mode == "classic":
        return classic_lower
    if mode == "closed-form":
        return g_diag_closed
    builder = builder or EnvelopeBuilder(cfg)
    mesh = builder.raw_env() if mode == "envelope" else builder.rigorous_env()
    return lambda x: rigor.rigorous_diag_bound(mesh, x)


def _twostate(command, cfg, diag, builder, dump=None):
    nodes = pi.make_grid(cfg.ell, cfg.scheme)
    st = builder.stages if builder else _Stages()
    (s, p), rep = st.run("iterate", pi.twostate_iterate, nodes, diag, cfg.tol_iter, cfg.max_iter)
    if dump:
        pi.write_dump(dump, [s, p], ["phi_s", "phi_p"])
    out = PipelineReport.from_eigen(command, cfg, rep, stage_seconds=st.seconds)
    if builder:
        out.cache_hits = list(builder.cache.hits)
        out.cache_built = list(builder.cache.built)
    return out


def run_mu(cfg: PipelineConfig, builder: EnvelopeBuilder | None = None, dump=None):
    if cfg.diag_mode in ("envelope", "rigorous-envelope"):
        builder = builder or EnvelopeBuilder(cfg)
    diag = diag_function(cfg, builder)
    rep = _twostate("mu", cfg, diag, builder, dump)
    if builder and cfg.diag_mode == "rigorous-envelope":
        rep.envelope_residual = float(env.convexity_residual(builder.rigorous_env())[0])
    elif builder:
        rep.envelope_residual = float(env.convexity_residual(builder.raw_env())[0])
    return rep


def run_mono_only(cfg: PipelineConfig, builder: EnvelopeBuilder | None = None,
                  skip_tc: bool = False, dump=None):
    """Two-state iteration with the envelope of G_mono as the diagonal bound.

    ``skip_tc`` interpolates G_mono directly without convexifying.  That is
    not a valid bound for mixtures and exists only for comparison.
    """
    builder = builder or EnvelopeBuilder(cfg)
    mesh = builder.mono() if skip_tc else builder.mono_env()
    rep = _twostate("mono-only", cfg, lambda x: rigor.rigorous_diag_bound(mesh, x), builder,
                    dump)
    if not skip_tc:
        rep.envelope_residual = float(env.convexity_residual(mesh)[0])
    else:
        rep.status = "ok (no TC, not a certified bound)"
    return rep


def run_envelope(cfg: PipelineConfig, builder: EnvelopeBuilder | None = None):
    builder = builder or EnvelopeBuilder(cfg)
    meshes = builder.build_all()
    rep = PipelineReport("envelope", asdict(cfg), stage_seconds=builder.stages.seconds,
                         cache_hits=list(builder.cache.hits),
                         cache_built=list(builder.cache.built))
    rep.envelope_residual = float(env.convexity_residual(meshes[-1])[0])
    return rep


def with_overrides(cfg: PipelineConfig, **kw) -> PipelineConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})


def consistent(rep: PipelineReport, tol: float = 1e-12) -> bool:
    return bool(abs(rep.mu_upper - pi.mu_from_lambda(rep.lam)) <= tol)
