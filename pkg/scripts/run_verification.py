#!/usr/bin/env python3
"""Run the analytic verification pipeline for both habitat classes.

* super-solution certification of the envelopes (random frozen fields),
* ignition-wave speeds against their theoretical bound,
* the principal-eigenvalue limit certificate for the bounded patch,
* the frozen-chemotaxis fixed point and its drift under the coupled flow.
"""

import sys
import time
from pathlib import Path

import numpy as np

from kswave import (BoundaryCase, frozen_flow_fixed_point, lambda_infinity,
                    make_run_config, run, stationary_residual)
from kswave.harness import fmt, parse_config, run_experiment

ROOT = Path(__file__).resolve().parent.parent


def main():
    for name in ("case1_exp1", "case2_exp1"):
        spec = parse_config((ROOT / "experiments" / f"{name}.cfg").read_text(),
                            mode="verify")
        t0 = time.time()
        report, waves = run_experiment(spec, ROOT / "out" / f"{name}_verify")
        print(f"{name}: certification {'pass' if report.ok else 'FAIL'}, "
              f"worst residual {fmt(report.worst.worst_residual)} "
              f"[{time.time() - t0:.1f}s]")
        for w in waves:
            print(f"  ignition eps = {fmt(w.epsilon)}: "
                  f"speed {fmt(w.speed)} < bound {fmt(w.speed_bound)}")

    spec2 = parse_config((ROOT / "experiments" / "case2_exp1.cfg").read_text())
    res = lambda_infinity(spec2.growth_profile(), spec2.c)
    print(f"lambda_inf (bounded patch, c = {fmt(spec2.c)}): "
          f"{fmt(res.estimate)} (positive: {res.positive})")

    spec1 = parse_config((ROOT / "experiments" / "case1_exp1.cfg").read_text())
    params, profile, grid = spec1.params(), spec1.growth_profile(), spec1.grid()
    t0 = time.time()
    fp = frozen_flow_fixed_point(params, profile, grid)
    resid = stationary_residual(fp.u_star, params, profile, grid)
    cfg = make_run_config(params, profile, grid, BoundaryCase.CASE1,
                          spec1.tau, 5.0, snapshot_times=(1., 2., 3., 4., 5.))
    traj, _ = run(cfg, fp.u_star)
    drift = max(float(np.max(np.abs(u - fp.u_star)))
                for _, u, _ in traj.snapshots)
    print(f"fixed point: {fp.n_outer} outer iterations, residual {fmt(resid)}, "
          f"coupled drift over [0,5] = {fmt(drift)} [{time.time() - t0:.1f}s]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
