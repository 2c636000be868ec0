"""Command line front end: ``polar-scaling classic|envelope|mu|mono-only|verify``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict

from . import pipeline as pl
from . import verify as vf
from .errors import CacheCorruptionError, ConvergenceError, MemoryBudgetError
from .meshio import MeshCache
from .pipeline import PipelineConfig, PipelineReport

log = logging.getLogger("polar_scaling")

VERIFY_DEFAULT_N = 50


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=sorted(pl.PRESETS))
    common.add_argument("--n", type=int, help="mesh resolution (default 200)")
    common.add_argument("--ell", type=int, help="1-D grid size (default 10^6)")
    common.add_argument("--nodes", choices=("uniform", "chebyshev"), help="1-D node scheme")
    common.add_argument("--diag", choices=pl.DIAG_MODES, help="diagonal lower bound for mu")
    common.add_argument("--tol-env", type=float, help="envelope convexity tolerance")
    common.add_argument("--tol-iter", type=float, help="power iteration tolerance")
    common.add_argument("--max-iter", type=int)
    common.add_argument("--tc-method", choices=("graham-axes", "jacobi-descend"))
    common.add_argument("--seed", type=int)
    common.add_argument("--cache-dir", help="mesh cache directory ($POLAR_SCALING_CACHE wins)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--dump", help="write eigenfunction rows to this CSV file")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="polar-scaling",
                                description="Upper bounds on the polar code scaling exponent.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classic", parents=[common], help="single-function power iteration")
    sub.add_parser("envelope", parents=[common], help="build and cache the envelope meshes")
    sub.add_parser("mu", parents=[common], help="two-state power iteration")
    mono = sub.add_parser("mono-only", parents=[common],
                          help="two-state iteration using only the monotone array")
    mono.add_argument("--no-tc", action="store_true",
                      help="skip convexification (comparison only, not a certified bound)")
    ver = sub.add_parser("verify", parents=[common], help="seeded oracle property suites")
    ver.add_argument("--samples", type=int, default=vf.DEFAULT_SAMPLES)
    ver.add_argument("--suite", action="append", choices=vf.SUITES,
                     help="run only this suite (repeatable)")
    ver.add_argument("--mutate-g", type=float, default=0.0,
                     help="fault injection: add this constant to g under test")
    return p


def config_from_args(args) -> PipelineConfig:
    base = dict(pl.PRESETS[args.preset]) if args.preset else {}
    if args.command == "verify" and args.n is None and "n" not in base:
        base["n"] = VERIFY_DEFAULT_N
    over = {
        "n": args.n, "ell": args.ell, "scheme": args.nodes, "diag_mode": args.diag,
        "tol_envelope": args.tol_env, "tol_iter": args.tol_iter, "max_iter": args.max_iter,
        "seed": args.seed, "cache_dir": args.cache_dir, "out_format": args.format,
        "tc_method": args.tc_method,
    }
    base.update({k: v for k, v in over.items() if v is not None})
    return PipelineConfig(**base)


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _verify(cfg: PipelineConfig, args) -> int:
    builder = pl.EnvelopeBuilder(cfg, MeshCache(cfg.cache_dir))
    g = vf.g_tri
    if args.mutate_g:
        delta = args.mutate_g
        g = lambda x, y, z: vf.g_tri(x, y, z) + delta  # noqa: E731
    results = vf.run_all(cfg.seed, builder.rigorous_env(), args.samples, g, args.suite)
    lines = []
    for r in results:
        lines.append(r.line())
        for case in r.counterexamples:
            lines.append(f"    counterexample: {case}")
    bad = sum(not r.ok for r in results)
    lines.append(f"{len(results) - bad}/{len(results)} suites passed (seed {cfg.seed})")
    _emit("\n".join(lines), args.out)
    return 1 if bad else 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "verify":
            return _verify(cfg, args)
        if args.command == "classic":
            rep = pl.run_classic(cfg, dump=args.dump)
        elif args.command == "envelope":
            rep = pl.run_envelope(cfg)
        elif args.command == "mu":
            rep = pl.run_mu(cfg, dump=args.dump)
        else:
            rep = pl.run_mono_only(cfg, skip_tc=args.no_tc, dump=args.dump)
    except ConvergenceError as exc:
        best = exc.best
        rep = (PipelineReport.from_eigen(args.command, cfg, best[1])
               if isinstance(best, tuple) else PipelineReport(args.command, asdict(cfg)))
        rep.status = f"iteration limit: {exc}"
        _emit(rep.render(cfg.out_format), args.out)
        return 3
    except (MemoryBudgetError, CacheCorruptionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    _emit(rep.render(cfg.out_format), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
