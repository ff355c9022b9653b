"""Frozen-chemotaxis fixed-point iteration.

For a frozen u the scalar parabolic flow

    U_t = U_xx + (c - chi v_x(.;u)) U_x
          + (r(x) - chi nu v(.;u) - (b - chi mu) U) U,
    U(0, .) = U1+,

is monotone decreasing in t because U1+ is a supersolution, so its limit
U*(.;u) exists; iterating u_{n+1} = U*(.;u_n) from u_0 = U1+ drives the
sequence toward a fixed point u*, a stationary profile of the coupled
system on the truncated domain (a forced-wave candidate).  The frozen
chemical field v(.;u) is the same boundary-closed tridiagonal solve the
coupled stepper uses: the zero-extended whole-line kernel would halve the
chemical mass seen at the zero-flux boundary and inflate the plateau from
r*/b to r*/(b - chi mu / 2), so the fixed point would not be stationary
for the coupled scheme.  Every inner evolution is checked for pointwise
monotone decay, and every outer iterate must stay inside the envelope
sandwich U1- <= u <= U1+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chemical import ChemicalSolver
from .envelopes import (Envelope, build_lower_envelope_case1,
                        build_upper_envelope_case1)
from .ignition import ignition_wave
from .model import BoundaryCase, Grid, GrowthProfile, SimParams

__all__ = ["SandwichError", "FixedPointResult", "frozen_flow_fixed_point",
           "stationary_residual"]


class SandwichError(RuntimeError):
    """An outer iterate escaped the envelope sandwich, which signals an
    envelope or scheme bug rather than a modelling outcome."""


@dataclass(frozen=True)
class FixedPointResult:
    u_star: np.ndarray
    n_outer: int
    converged: bool
    outer_diffs: tuple[float, ...]
    monotone_slack: float      # worst pointwise increase seen in any inner flow
    upper: Envelope
    lower: Envelope


def _evolve_frozen(u_init, v, vx, r, params: SimParams, grid: Grid,
                   bc: BoundaryCase, tau: float, horizon: float,
                   window: float, tol: float, snapshot_dt: float):
    """Explicit march of the frozen flow until the sup change over the
    trailing window drops below tol (or the horizon is reached).  Returns
    the terminal profile and the worst pointwise increase between
    consecutive snapshots (monotone decay means it stays at round-off)."""
    h = grid.h
    lam = tau / (h * h)
    drift = params.c - params.chi * vx
    coef = tau / (2.0 * h) * drift[1:-1]
    growth = r - params.chi * params.nu * v
    gap = params.damping_gap

    n_steps = round(horizon / tau)
    lag = max(1, round(window / tau))
    cadence = math.gcd(max(1, lag // 10), lag)
    snap_every = max(1, round(snapshot_dt / tau))

    u = u_init.copy()
    buffer = {0: u.copy()}
    prev_snap = u.copy()
    worst_increase = -math.inf

    for j in range(1, n_steps + 1):
        un = np.empty_like(u)
        un[1:-1] = (
            (lam - coef) * u[:-2]
            + (1.0 - 2.0 * lam + tau * growth[1:-1]) * u[1:-1]
            - tau * gap * u[1:-1] * u[1:-1]
            + (lam + coef) * u[2:]
        )
        un[0] = 0.0
        if bc is BoundaryCase.CASE1:
            un[-1] = un[-2]
        else:
            un[-1] = 0.0
        np.maximum(un, 0.0, out=un)
        u = un
        if j % snap_every == 0:
            worst_increase = max(worst_increase, float(np.max(u - prev_snap)))
            prev_snap = u.copy()
        if j % cadence == 0:
            buffer[j] = u.copy()
            old = j - lag
            if old in buffer:
                if float(np.max(np.abs(u - buffer[old]))) < tol:
                    break
            for k in [k for k in buffer if k < j - lag]:
                del buffer[k]
    return u, worst_increase


def frozen_flow_fixed_point(params: SimParams, profile: GrowthProfile,
                            grid: Grid, bc: BoundaryCase = BoundaryCase.CASE1,
                            max_outer: int = 30, inner_T: float = 50.0,
                            outer_tol: float = 1e-4, inner_tol: float = 1e-4,
                            upper: Envelope | None = None,
                            lower: Envelope | None = None,
                            wave_epsilon: float = 0.05,
                            snapshot_dt: float = 0.5) -> FixedPointResult:
    """Iterate u_{n+1} = U*(.;u_n) from u_0 = U1+ until the outer sup change
    falls below outer_tol.  Aborts with SandwichError if an iterate leaves
    [U1- - 1e-8, U1+ + 1e-8]."""
    if upper is None:
        upper = build_upper_envelope_case1(params, profile, grid)
    if lower is None:
        wave = ignition_wave(params, profile.r_star, wave_epsilon)
        lower = build_lower_envelope_case1(params, profile, grid, wave,
                                           upper=upper)
    r = np.asarray(profile(grid.nodes), dtype=float)
    tau = 0.4 * grid.h * grid.h
    solver = ChemicalSolver(grid, params.nu, params.mu, bc)

    u = upper.values.copy()
    diffs = []
    worst_slack = -math.inf
    converged = False
    n_outer = 0
    for n_outer in range(1, max_outer + 1):
        chem = solver.solve(u)
        u_next, slack = _evolve_frozen(
            upper.values, chem.v, chem.vx, r, params, grid, bc, tau,
            horizon=inner_T, window=1.0, tol=inner_tol,
            snapshot_dt=snapshot_dt)
        worst_slack = max(worst_slack, slack)
        low_viol = float(np.max(lower.values - u_next))
        high_viol = float(np.max(u_next - upper.values))
        if low_viol > 1e-8 or high_viol > 1e-8:
            k = int(np.argmax(np.maximum(lower.values - u_next,
                                         u_next - upper.values)))
            raise SandwichError(
                f"iterate {n_outer} leaves the envelope sandwich at "
                f"x = {grid.nodes[k]:.3f} (below by {low_viol:.3e}, "
                f"above by {high_viol:.3e})")
        diff = float(np.max(np.abs(u_next - u)))
        diffs.append(diff)
        u = u_next
        if diff < outer_tol:
            converged = True
            break
    return FixedPointResult(u_star=u, n_outer=n_outer, converged=converged,
                            outer_diffs=tuple(diffs),
                            monotone_slack=worst_slack,
                            upper=upper, lower=lower)


def stationary_residual(u_star: np.ndarray, params: SimParams,
                        profile: GrowthProfile, grid: Grid,
                        bc: BoundaryCase = BoundaryCase.CASE1) -> float:
    """Sup-norm residual of the stationary equation at the interior nodes,
    with the chemical field recomputed from u_star itself through the same
    boundary-closed solve the flow used."""
    chem = ChemicalSolver(grid, params.nu, params.mu, bc).solve(u_star)
    r = np.asarray(profile(grid.nodes), dtype=float)
    h = grid.h
    u = np.asarray(u_star, dtype=float)
    ux = (u[2:] - u[:-2]) / (2.0 * h)
    uxx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    drift = params.c - params.chi * chem.vx[1:-1]
    growth = r[1:-1] - params.chi * params.nu * chem.v[1:-1] \
        - params.damping_gap * u[1:-1]
    res = uxx + drift * ux + growth * u[1:-1]
    return float(np.max(np.abs(res)))
