"""Command-line interface.

    kswave simulate <cfg> [--out DIR] [--snapshot-times t1,t2,...] [--allow-unstable]
    kswave eig      <cfg> [--out DIR]
    kswave regime   <cfg> [--out DIR]
    kswave verify   <cfg> [--out DIR]
    kswave sweep    <cfg> [--out DIR] [--workers N]

Exit codes: 0 success, 1 validation error, 2 numerical fault.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .fixedpoint import SandwichError
from .harness import ConfigError, fmt, parse_config, run_experiment
from .ignition import BracketError
from .stepper import BlowUpError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kswave",
        description="Forced-wave simulator and verification toolkit for a "
                    "1-D chemotaxis system in a shifting habitat.",
        epilog="Config keys: chi mu nu b c (physics), L h tau T (grid and "
               "horizon), bc (case1 = Dirichlet left / zero-flux right, "
               "case2 = Dirichlet both), profile (x:r breakpoints), "
               "u0 (x:value breakpoints) or u0_bump (xl,xr), snapshot_times, "
               "conv_window [1.0] conv_tol [1e-3] extinct_tol [1e-3] "
               "plateau_rel_tol [0.02], allow_unstable [false], eig_h [0.01] "
               "eig_tol [1e-4], verify_samples [100] verify_epsilons "
               "[0.1,0.05,0.025], sweep_b/sweep_c/sweep_chi (min,max,count), "
               "horizon_scale [1.0].")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("simulate", "eig", "regime", "verify", "sweep"):
        p = sub.add_parser(mode)
        p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: out/<config stem>)")
        if mode == "simulate":
            p.add_argument("--snapshot-times", default=None,
                           help="comma-separated times overriding the config")
            p.add_argument("--allow-unstable", action="store_true")
        if mode == "sweep":
            p.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        spec = parse_config(text, mode=args.mode,
                            allow_unstable=getattr(args, "allow_unstable",
                                                   False))
        if getattr(args, "snapshot_times", None):
            times = tuple(float(t) for t in args.snapshot_times.split(","))
            spec = replace(spec, snapshot_times=times)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out_dir = args.out if args.out is not None else Path("out") / args.config.stem
    try:
        if args.mode == "sweep":
            from .harness import SweepSpec, render_manifest, sweep
            axes = tuple((name[len("sweep_"):], getattr(spec, name))
                         for name in ("sweep_b", "sweep_c", "sweep_chi")
                         if getattr(spec, name) is not None)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "manifest.cfg").write_text(render_manifest(spec))
            rows = sweep(SweepSpec(base=spec, axes=axes,
                                   horizon_scale=spec.horizon_scale),
                         out_dir / "regime_map.csv", workers=args.workers)
            n_err = sum(r["outcome"] == "error" for r in rows)
            print(f"sweep: {len(rows)} points, {n_err} errors "
                  f"-> {out_dir / 'regime_map.csv'}")
            return 2 if n_err else 0
        result = run_experiment(spec, out_dir)
    except (BlowUpError, BracketError, SandwichError) as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.mode == "simulate":
        line = f"outcome: {result.tag.value}"
        if result.plateau is not None:
            line += f", plateau u(T, L) = {fmt(result.plateau)}"
        if result.peak is not None:
            line += (f", peak max u(T) = {fmt(result.peak[0])} "
                     f"at x = {fmt(result.peak[1])}")
        print(line)
        print(f"artifacts in {out_dir}")
    elif args.mode == "eig":
        print(f"lambda_inf estimate: {fmt(result.estimate)} "
              f"(upper bound {fmt(result.upper_bound)}, "
              f"{'converged' if result.converged else 'not converged'})")
        for L, h, lam in result.table:
            print(f"  L = {fmt(L)}, h = {fmt(h)}: lambda = {fmt(lam)}")
    elif args.mode == "regime":
        thr = "undefined" if result.h1_threshold is None else fmt(result.h1_threshold)
        print(f"h1_holds: {result.h1_holds} (speed threshold {thr})")
        print(f"h2_damping_holds: {result.h2_damping_holds}")
        print(f"c_star: {fmt(result.c_star)}")
        print(f"lambda_inf: {fmt(result.lambda_inf)}")
    elif args.mode == "verify":
        report, waves = result
        status = "pass" if report.ok else "FAIL"
        hyp = "" if report.hypothesis_satisfied else " (damping hypothesis violated)"
        print(f"certification {status}{hyp}: worst residual "
              f"{fmt(report.worst.worst_residual)} on branch "
              f"{report.worst.branch}")
        for w in waves:
            print(f"  ignition eps = {fmt(w.epsilon)}: speed {fmt(w.speed)} "
                  f"< bound {fmt(w.speed_bound)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
