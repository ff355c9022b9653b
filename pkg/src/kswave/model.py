"""Parameters, habitat profiles, grids, and regime predicates.

The moving-frame system is

    u_t = u_xx + c u_x - chi (u v_x)_x + u (r(x) - b u)
    0   = v_xx - nu v + mu u

on a truncated interval [-L, L].  This module holds the plain data of the
problem: physical constants, the piecewise-linear growth rate r(x) with its
constant tails, the uniform grid, and the closed-form regime quantities
(c* = 2 sqrt(r*), the speed and damping conditions) that decide which
analytic constructions apply.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "SimParams",
    "GrowthProfile",
    "InitialCondition",
    "Grid",
    "BoundaryCase",
    "HabitatClass",
    "RegimeReport",
    "theta_root",
    "classify_profile",
    "check_regime",
    "sample",
]


@dataclass(frozen=True)
class SimParams:
    """Physical constants of the chemotaxis system.

    chi  chemotaxis sensitivity, >= 0
    mu   chemical production rate, > 0
    nu   chemical degradation rate, > 0
    b    logistic damping, > 0
    c    habitat shift speed (any sign)
    """

    chi: float
    mu: float
    nu: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.mu > 0.0 and self.nu > 0.0 and self.b > 0.0):
            raise ValueError("mu, nu and b must all be positive")
        if self.chi < 0.0:
            raise ValueError("chi must be nonnegative")

    @property
    def well_posed(self) -> bool:
        """Global-existence condition b > chi*mu."""
        return self.b > self.chi * self.mu

    @property
    def damping_gap(self) -> float:
        """b - chi*mu, the effective quadratic damping of the reduced equation."""
        return self.b - self.chi * self.mu


@dataclass(frozen=True)
class GrowthProfile:
    """Continuous piecewise-linear growth rate r(x) with constant tails.

    Left of the first breakpoint the profile equals ``left_limit``; right of
    the last it equals ``right_limit``.  The first and last breakpoint values
    must therefore coincide with the limits, which keeps sup/inf exactly
    computable from the breakpoint values alone.
    """

    breakpoints: tuple[tuple[float, float], ...]
    left_limit: float
    right_limit: float

    def __post_init__(self):
        if len(self.breakpoints) < 2:
            raise ValueError("a profile needs at least two breakpoints")
        xs = [p[0] for p in self.breakpoints]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        if self.breakpoints[0][1] != self.left_limit:
            raise ValueError("first breakpoint value must equal left_limit")
        if self.breakpoints[-1][1] != self.right_limit:
            raise ValueError("last breakpoint value must equal right_limit")
        if not (math.isfinite(self.left_limit) and math.isfinite(self.right_limit)):
            raise ValueError("limits must be finite")

    @classmethod
    def from_breakpoints(cls, points) -> "GrowthProfile":
        pts = tuple((float(x), float(r)) for x, r in points)
        return cls(pts, pts[0][1], pts[-1][1])

    def __call__(self, x):
        xs = np.array([p[0] for p in self.breakpoints])
        rs = np.array([p[1] for p in self.breakpoints])
        return np.interp(x, xs, rs)

    @property
    def r_star(self) -> float:
        """sup r, attained at a breakpoint (tails equal the end values)."""
        return max(p[1] for p in self.breakpoints)

    @property
    def r_lower(self) -> float:
        """inf r."""
        return min(p[1] for p in self.breakpoints)

    def is_monotone_case1(self) -> bool:
        """Whether r(-inf) <= r(x) <= r(+inf) pointwise (the classical
        separated-habitat shape)."""
        vals = [p[1] for p in self.breakpoints]
        return all(self.left_limit <= v <= self.right_limit for v in vals)


@dataclass(frozen=True)
class InitialCondition:
    """Initial species density: piecewise-linear breakpoints, or a quadratic
    bump (x - xl)(xr - x) clipped at zero.  Exactly one form is given."""

    breakpoints: tuple[tuple[float, float], ...] | None = None
    bump: tuple[float, float] | None = None

    def __post_init__(self):
        if (self.breakpoints is None) == (self.bump is None):
            raise ValueError("give exactly one of breakpoints or bump")
        if self.breakpoints is not None:
            xs = [p[0] for p in self.breakpoints]
            if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("need >= 2 strictly increasing breakpoints")
        if self.bump is not None and not self.bump[0] < self.bump[1]:
            raise ValueError("bump requires xl < xr")

    def __call__(self, x):
        if self.breakpoints is not None:
            xs = np.array([p[0] for p in self.breakpoints])
            vs = np.array([p[1] for p in self.breakpoints])
            return np.interp(x, xs, vs)
        xl, xr = self.bump
        x = np.asarray(x, dtype=float)
        return np.maximum((x - xl) * (xr - x), 0.0)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-L, L] with M = 2L/h cells and M+1 nodes.

    2L/h must be an integer to relative tolerance 1e-12; anything else is
    rejected rather than silently adjusted, so node counts reproduce exactly.
    """

    L: float
    h: float
    M: int = field(init=False)

    def __post_init__(self):
        if not (self.L > 0.0 and self.h > 0.0):
            raise ValueError("L and h must be positive")
        ratio = 2.0 * self.L / self.h
        m = round(ratio)
        if m < 2 or abs(ratio - m) > 1e-12 * max(1.0, ratio):
            raise ValueError(f"2L/h = {ratio!r} is not an integer >= 2")
        object.__setattr__(self, "M", int(m))

    @property
    def n_nodes(self) -> int:
        return self.M + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.M + 1)


class BoundaryCase(Enum):
    """Boundary closure of the truncated problem: CASE1 is Dirichlet at -L
    with zero flux at L, CASE2 is Dirichlet at both ends."""

    CASE1 = "case1"
    CASE2 = "case2"


class HabitatClass(Enum):
    CASE1 = "case1"
    CASE2 = "case2"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class RegimeReport:
    """Closed-form regime quantities for a (params, profile) pair.

    h1_threshold is chi*mu*r*/(2 sqrt(nu) (b-chi*mu)) - 2 sqrt(r*(b-2chi*mu)/(b-chi*mu)),
    defined only when b > 2 chi*mu.  h1_holds requires b > 2 chi*mu and
    c > h1_threshold.  h2_damping_holds is b >= 1.5 chi*mu.  c_star = 2 sqrt(r*).
    """

    h1_holds: bool
    h1_threshold: float | None
    h2_damping_holds: bool
    c_star: float
    lambda_inf: float | None = None


def theta_root(c: float, r: float, orientation: str = "forward") -> float:
    """Unique positive root of theta^2 + c theta + r = 0 (forward) or
    theta^2 - c theta + r = 0 (backward), for r < 0.

    Uses the cancellation-free form of the quadratic formula, so the
    residual stays at round-off scale for either sign of c.
    """
    if r >= 0.0:
        raise ValueError("theta_root requires r < 0")
    if orientation not in ("forward", "backward"):
        raise ValueError(f"unknown orientation {orientation!r}")
    sq = math.sqrt(c * c - 4.0 * r)
    if orientation == "forward":
        root = 0.5 * (-c + sq) if c <= 0.0 else -2.0 * r / (c + sq)
    else:
        root = 0.5 * (c + sq) if c >= 0.0 else -2.0 * r / (sq - c)
    return root


def classify_profile(profile: GrowthProfile) -> HabitatClass:
    """CASE1 when r(-inf) < 0 < r(+inf); CASE2 when both tails are negative
    but sup r > 0; anything else (including tails exactly zero) is
    UNCLASSIFIED."""
    lo, hi = profile.left_limit, profile.right_limit
    if lo < 0.0 < hi:
        if not profile.is_monotone_case1():
            warnings.warn(
                "profile is CASE1 by its limits but not monotone between them",
                stacklevel=2,
            )
        return HabitatClass.CASE1
    if lo < 0.0 and hi < 0.0 and profile.r_star > 0.0:
        return HabitatClass.CASE2
    return HabitatClass.UNCLASSIFIED


def check_regime(params: SimParams, profile: GrowthProfile) -> RegimeReport:
    """Evaluate the speed and damping predicates for this parameter set."""
    if not params.well_posed:
        raise ValueError("check_regime requires b > chi*mu")
    r_star = profile.r_star
    if r_star <= 0.0:
        raise ValueError("profile has no favorable region (sup r <= 0)")
    c_star = 2.0 * math.sqrt(r_star)
    chimu = params.chi * params.mu
    h2 = params.b >= 1.5 * chimu
    if params.b > 2.0 * chimu:
        gap = params.damping_gap
        threshold = chimu * r_star / (2.0 * math.sqrt(params.nu) * gap) - 2.0 * math.sqrt(
            r_star * (params.b - 2.0 * chimu) / gap
        )
        h1 = params.c > threshold
    else:
        threshold = None
        h1 = False
    return RegimeReport(
        h1_holds=h1,
        h1_threshold=threshold,
        h2_damping_holds=h2,
        c_star=c_star,
    )


def sample(obj, grid: Grid) -> np.ndarray:
    """Evaluate a growth profile or initial condition at the grid nodes."""
    if isinstance(obj, (GrowthProfile, InitialCondition)):
        return np.asarray(obj(grid.nodes), dtype=float)
    raise TypeError(f"cannot sample object of type {type(obj).__name__}")
