"""Ignition traveling wave used to anchor the CASE1 lower envelope.

For a cutoff parameter eps in (0, alpha) the reaction

    f(u) = u (alpha - beta u)   for u >= 0,      f(u) = 0 for -eps <= u < 0,
    alpha = r* - eps - chi mu r* / (b - chi mu),  beta = b - chi mu,

admits a unique increasing front psi with speed ct > 0,

    ct psi' = psi'' + f(psi),   psi(-inf) = -eps,  psi(+inf) = Q = alpha/beta,

whose speed tends to 2 sqrt(r* (b - 2 chi mu)/(b - chi mu)) as eps -> 0.

The speed is found by phase-plane shooting: with p = psi' > 0 the orbit from
the saddle (Q, 0) satisfies dp/dpsi = ct - f(psi)/p, integrated from
psi = Q - delta down to psi = 0 with fixed-step RK4.  The correct speed makes
p(0) = ct*eps, the unique slope from which the f = 0 zone carries the orbit
exactly to (-eps, 0); p(0) - ct*eps changes sign across the front speed and
is bisected to tolerance.  The left tail is then the explicit exponential
psi(x) = eps (exp(ct x) - 1) for x <= 0, the middle is rebuilt by a stable
backward x-integration off the saddle, and the far right tail uses the
saddle asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SimParams

__all__ = ["BracketError", "IgnitionWave", "ignition_wave", "speed_limit",
           "profile_residual", "richardson_speed"]

SADDLE_OFFSET = 1e-6


class BracketError(RuntimeError):
    """No sign change in the speed bracket: eps too large or b <= 2 chi mu."""


def speed_limit(params: SimParams, r_star: float) -> float:
    """2 sqrt(r* (b - 2 chi mu)/(b - chi mu)), the eps -> 0 speed."""
    chimu = params.chi * params.mu
    if params.b <= 2.0 * chimu:
        raise ValueError("requires b > 2 chi mu")
    return 2.0 * math.sqrt(r_star * (params.b - 2.0 * chimu) / (params.b - chimu))


@dataclass(frozen=True)
class IgnitionWave:
    """Front profile on a private fine grid, normalized so psi(0) = 0."""

    epsilon: float
    speed: float
    left_level: float
    right_level: float
    speed_bound: float
    alpha: float
    beta: float
    lam_minus: float
    x: np.ndarray          # ascending, x[0] = 0 (the normalization point)
    psi: np.ndarray
    p: np.ndarray

    def evaluate(self, xq) -> np.ndarray:
        """psi at arbitrary abscissae: exact exponential tail for x <= 0,
        interpolation of the integrated orbit in the middle, saddle
        asymptotics beyond the stored range."""
        xq = np.asarray(xq, dtype=float)
        left = self.epsilon * (np.exp(self.speed * np.minimum(xq, 0.0)) - 1.0)
        mid = np.interp(xq, self.x, self.psi)
        x_end = self.x[-1]
        gap = self.right_level - self.psi[-1]
        right = self.right_level - gap * np.exp(
            self.lam_minus * np.maximum(xq - x_end, 0.0))
        return np.where(xq <= 0.0, left, np.where(xq >= x_end, right, mid))


def _reaction(psi, alpha, beta):
    return np.where(psi >= 0.0, psi * (alpha - beta * psi), 0.0)


def _lam_minus(ct: float, alpha: float) -> float:
    """Stable eigenvalue of the saddle (Q, 0): (ct - sqrt(ct^2+4 alpha))/2."""
    return 0.5 * (ct - math.sqrt(ct * ct + 4.0 * alpha))


def _shoot(ct: float, alpha: float, beta: float, step: float):
    """Integrate dp/dpsi = ct - f/p from psi = Q - delta down to psi = 0.
    Returns p(0), or -inf when p collapses before reaching 0 (undershoot)."""
    Q = alpha / beta
    delta = SADDLE_OFFSET
    lamm = _lam_minus(ct, alpha)
    psi = Q - delta
    p = -lamm * delta
    floor = 1e-12

    def rhs(ps, pv):
        if pv <= floor:
            return -math.inf
        f = ps * (alpha - beta * ps) if ps >= 0.0 else 0.0
        return ct - f / pv

    n_full = int(psi / step)
    ds = -step
    for k in range(n_full + 1):
        if k == n_full:
            ds = -(psi - 0.0) if psi > 0.0 else 0.0
            if ds == 0.0:
                break
        k1 = rhs(psi, p)
        k2 = rhs(psi + 0.5 * ds, p + 0.5 * ds * k1)
        k3 = rhs(psi + 0.5 * ds, p + 0.5 * ds * k2)
        k4 = rhs(psi + ds, p + ds * k3)
        p = p + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        psi = psi + ds
        if not math.isfinite(p) or p < floor:
            return -math.inf
    return p


def ignition_wave(params: SimParams, r_star: float, epsilon: float,
                  truncation_radius: float = 60.0, step: float = 1e-3,
                  speed_tol: float = 1e-8) -> IgnitionWave:
    """Compute the front and its speed for one cutoff value."""
    chimu = params.chi * params.mu
    beta = params.damping_gap
    if params.b <= 2.0 * chimu:
        raise ValueError("ignition construction requires b > 2 chi mu")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    alpha = r_star - epsilon - chimu * r_star / beta
    if alpha <= 0.0:
        raise BracketError(f"epsilon = {epsilon!r} too large: no positive zero gap")
    bound = speed_limit(params, r_star)

    def overshoot(ct):
        return _shoot(ct, alpha, beta, step) - ct * epsilon

    lo, hi = 0.0, bound
    s_lo = overshoot(lo)
    s_hi = overshoot(hi)
    if not (s_lo > 0.0 and s_hi < 0.0):
        raise BracketError(
            f"speed bracket (0, {bound:.6g}) has no sign change "
            f"(s(0)={s_lo:.3g}, s(bound)={s_hi:.3g}): epsilon too large "
            "or hypothesis violated")
    while hi - lo > speed_tol:
        mid = 0.5 * (lo + hi)
        if overshoot(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    ct = 0.5 * (lo + hi)

    # rebuild psi(x): backward-in-x integration from the saddle is stable,
    # so integrate d(psi,p)/ds = -(p, ct p - f) with s = -x from the offset
    # start until psi crosses 0, then shift so the crossing sits at x = 0
    Q = alpha / beta
    lamm = _lam_minus(ct, alpha)
    delta = SADDLE_OFFSET
    ds = step
    max_steps = int(2.0 * truncation_radius / ds)
    psis = [Q - delta]
    ps = [-lamm * delta]

    def rhs2(state):
        psi_v, p_v = state
        f = psi_v * (alpha - beta * psi_v) if psi_v >= 0.0 else 0.0
        return np.array([-p_v, -(ct * p_v - f)])

    state = np.array([Q - delta, -lamm * delta])
    crossed = False
    for _ in range(max_steps):
        k1 = rhs2(state)
        k2 = rhs2(state + 0.5 * ds * k1)
        k3 = rhs2(state + 0.5 * ds * k2)
        k4 = rhs2(state + ds * k3)
        state = state + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        psis.append(float(state[0]))
        ps.append(float(state[1]))
        if state[0] <= 0.0:
            crossed = True
            break
    if not crossed:
        raise RuntimeError("front did not reach its zero within the truncation")

    psis = np.array(psis)
    ps = np.array(ps)
    s = ds * np.arange(psis.size)
    # linear interpolation of the crossing abscissa
    f0, f1 = psis[-2], psis[-1]
    s_cross = s[-2] + ds * f0 / (f0 - f1)
    x_all = s_cross - s          # descending; x = 0 at the crossing
    keep = x_all > 0.0
    x_nodes = np.concatenate(([0.0], x_all[keep][::-1]))
    psi_nodes = np.concatenate(([0.0], psis[keep][::-1]))
    p_nodes = np.concatenate(([ct * epsilon], ps[keep][::-1]))

    right_level = Q
    wave = IgnitionWave(
        epsilon=epsilon, speed=ct, left_level=-epsilon,
        right_level=right_level, speed_bound=bound, alpha=alpha, beta=beta,
        lam_minus=lamm, x=x_nodes, psi=psi_nodes, p=p_nodes)
    if not np.all(np.diff(psi_nodes) > 0.0):
        raise RuntimeError("computed front is not strictly increasing")
    return wave


def profile_residual(wave: IgnitionWave) -> float:
    """Sup residual of ct p - p' - f(psi) on the uniform part of the stored
    grid, with p' from a fourth-order central difference.  An independent
    check that the integrated orbit solves the front equation."""
    x, psi, p = wave.x[1:], wave.psi[1:], wave.p[1:]
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=0, atol=1e-12):
        raise RuntimeError("stored grid is not uniform past the crossing")
    dp = (p[:-4] - 8.0 * p[1:-3] + 8.0 * p[3:-1] - p[4:]) / (12.0 * h)
    core = slice(2, -2)
    res = wave.speed * p[core] - dp - _reaction(psi[core], wave.alpha, wave.beta)
    return float(np.max(np.abs(res)))


def richardson_speed(params: SimParams, r_star: float,
                     epsilons=(0.1, 0.05, 0.025), **kwargs):
    """Speeds over the eps grid plus the order-estimating Richardson limit.
    Assumes a single-power model c(eps) = c_inf - A eps^q over a halving
    eps grid; returns (speeds, extrapolated_limit, estimated_order)."""
    eps = tuple(epsilons)
    if len(eps) != 3 or not (eps[0] > eps[1] > eps[2] > 0.0):
        raise ValueError("need three decreasing epsilon values")
    if not (math.isclose(eps[0] / eps[1], 2.0, rel_tol=1e-9)
            and math.isclose(eps[1] / eps[2], 2.0, rel_tol=1e-9)):
        raise ValueError("epsilon grid must halve")
    speeds = tuple(ignition_wave(params, r_star, e, **kwargs).speed for e in eps)
    d1 = speeds[1] - speeds[0]
    d2 = speeds[2] - speeds[1]
    if d1 <= 0.0 or d2 <= 0.0:
        raise RuntimeError("speeds are not increasing as epsilon decreases")
    if d1 <= d2:
        raise RuntimeError("speed increments show no geometric decay")
    order = math.log2(d1 / d2)
    limit = speeds[2] + d2 * d2 / (d1 - d2)
    return speeds, limit, order
