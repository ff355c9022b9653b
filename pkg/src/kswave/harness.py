"""Configuration parsing, experiment orchestration, sweeps, and file output.

Configs are flat ``key = value`` text: ``#`` starts a comment, breakpoint
lists are comma-separated ``x:r`` pairs, plain lists are comma-separated.
Unknown keys are rejected with their line number.  ``render_manifest``
writes back every effective value (defaults included) in the same format,
so ``parse_config(render_manifest(spec)) == spec`` and a manifest alone
reproduces a run bitwise.  All CSV numbers use the shortest representation
that round-trips a double exactly.
"""

from __future__ import annotations

import datetime
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .envelopes import (build_lower_envelope_case2, build_upper_envelope_case1,
                        build_upper_envelope_case2, certify_supersolution)
from .ignition import BracketError, ignition_wave, speed_limit
from .model import (BoundaryCase, Grid, GrowthProfile, HabitatClass,
                    InitialCondition, RegimeReport, SimParams, check_regime,
                    classify_profile, sample)
from .spectral import lambda_infinity
from .stepper import BlowUpError, cfl_check, make_run_config, run

__all__ = ["ConfigError", "RunSpec", "SweepSpec", "parse_config",
           "render_manifest", "run_experiment", "sweep", "fmt"]

MODES = ("simulate", "eig", "regime", "verify", "sweep")


class ConfigError(ValueError):
    def __init__(self, message, line: int | None = None, key: str | None = None):
        loc = f"line {line}: " if line is not None else ""
        which = f"key {key!r}: " if key else ""
        super().__init__(f"{loc}{which}{message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class RunSpec:
    """Declarative description of one experiment (pure scalars and tuples,
    so equality and the manifest round-trip are exact)."""

    mode: str
    chi: float
    mu: float
    nu: float
    b: float
    c: float
    L: float
    h: float
    tau: float
    T: float
    bc: BoundaryCase
    profile: tuple[tuple[float, float], ...]
    u0: tuple[tuple[float, float], ...] | None = None
    u0_bump: tuple[float, float] | None = None
    snapshot_times: tuple[float, ...] = ()
    conv_window: float = 1.0
    conv_tol: float = 1e-3
    extinct_tol: float = 1e-3
    plateau_rel_tol: float = 0.02
    allow_unstable: bool = False
    eig_h: float = 0.01
    eig_tol: float = 1e-4
    verify_samples: int = 100
    verify_epsilons: tuple[float, ...] = (0.1, 0.05, 0.025)
    sweep_b: tuple[float, float, int] | None = None
    sweep_c: tuple[float, float, int] | None = None
    sweep_chi: tuple[float, float, int] | None = None
    horizon_scale: float = 1.0

    # derived builders -----------------------------------------------------
    def params(self) -> SimParams:
        return SimParams(chi=self.chi, mu=self.mu, nu=self.nu, b=self.b,
                         c=self.c)

    def growth_profile(self) -> GrowthProfile:
        return GrowthProfile.from_breakpoints(self.profile)

    def grid(self) -> Grid:
        return Grid(L=self.L, h=self.h)

    def initial_condition(self) -> InitialCondition:
        if self.u0_bump is not None:
            return InitialCondition(bump=self.u0_bump)
        return InitialCondition(breakpoints=self.u0)

    def run_config(self):
        return make_run_config(
            self.params(), self.growth_profile(), self.grid(), self.bc,
            self.tau, self.T, snapshot_times=self.snapshot_times,
            conv_window=self.conv_window, conv_tol=self.conv_tol,
            extinct_tol=self.extinct_tol,
            plateau_rel_tol=self.plateau_rel_tol,
            allow_unstable=self.allow_unstable)


@dataclass(frozen=True)
class SweepSpec:
    base: RunSpec
    axes: tuple[tuple[str, tuple[float, float, int]], ...]
    horizon_scale: float = 1.0


def fmt(x) -> str:
    """Shortest round-trip representation of a double (repr of float)."""
    return repr(float(x))


# --------------------------------------------------------------------------
# parsing

_FLOAT_KEYS = {"chi", "mu", "nu", "b", "c", "L", "h", "tau", "T",
               "conv_window", "conv_tol", "extinct_tol", "plateau_rel_tol",
               "eig_h", "eig_tol", "horizon_scale"}
_BOOL_KEYS = {"allow_unstable"}
_INT_KEYS = {"verify_samples"}
_PAIRLIST_KEYS = {"profile", "u0"}
_FLOATLIST_KEYS = {"snapshot_times", "verify_epsilons", "u0_bump"}
_AXIS_KEYS = {"sweep_b", "sweep_c", "sweep_chi"}
_ALL_KEYS = ({"mode", "bc"} | _FLOAT_KEYS | _BOOL_KEYS | _INT_KEYS
             | _PAIRLIST_KEYS | _FLOATLIST_KEYS | _AXIS_KEYS)

_REQUIRED = {"chi", "mu", "nu", "b", "c", "L", "h", "tau", "T", "bc",
             "profile"}


def _parse_float(raw, line, key) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}", line, key) from None


def _parse_pairs(raw, line, key):
    pairs = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 2:
            raise ConfigError(f"expected x:value pairs, got {item!r}", line, key)
        pairs.append((_parse_float(parts[0], line, key),
                      _parse_float(parts[1], line, key)))
    return tuple(pairs)


def _parse_floats(raw, line, key):
    vals = [v.strip() for v in raw.split(",") if v.strip()]
    return tuple(_parse_float(v, line, key) for v in vals)


def parse_config(text: str, mode: str | None = None,
                 allow_unstable: bool = False) -> RunSpec:
    """Parse flat key = value text into a validated RunSpec.  ``mode``
    overrides any mode key in the text (the CLI subcommand wins), and
    ``allow_unstable=True`` forces the override as if the key were set."""
    values: dict = {}
    lines: dict = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("expected key = value", lineno)
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _ALL_KEYS:
            raise ConfigError("unknown key", lineno, key)
        if key in values:
            raise ConfigError("duplicate key", lineno, key)
        lines[key] = lineno
        if key == "mode":
            if raw not in MODES:
                raise ConfigError(f"mode must be one of {MODES}", lineno, key)
            values[key] = raw
        elif key == "bc":
            try:
                values[key] = BoundaryCase(raw)
            except ValueError:
                raise ConfigError("bc must be case1 or case2", lineno, key) from None
        elif key in _FLOAT_KEYS:
            values[key] = _parse_float(raw, lineno, key)
        elif key in _BOOL_KEYS:
            if raw not in ("true", "false"):
                raise ConfigError("expected true or false", lineno, key)
            values[key] = raw == "true"
        elif key in _INT_KEYS:
            try:
                values[key] = int(raw)
            except ValueError:
                raise ConfigError(f"expected an integer, got {raw!r}",
                                  lineno, key) from None
        elif key in _PAIRLIST_KEYS:
            values[key] = _parse_pairs(raw, lineno, key)
        elif key in _FLOATLIST_KEYS:
            vals = _parse_floats(raw, lineno, key)
            if key == "u0_bump":
                if len(vals) != 2:
                    raise ConfigError("u0_bump needs exactly xl,xr", lineno, key)
                vals = (vals[0], vals[1])
            values[key] = vals
        elif key in _AXIS_KEYS:
            vals = _parse_floats(raw, lineno, key)
            if len(vals) != 3 or vals[2] < 1 or vals[2] != int(vals[2]):
                raise ConfigError("axis needs min,max,count with count >= 1",
                                  lineno, key)
            values[key] = (vals[0], vals[1], int(vals[2]))

    if mode is not None:
        values["mode"] = mode
    values.setdefault("mode", "simulate")
    if allow_unstable:
        values["allow_unstable"] = True

    missing = _REQUIRED - values.keys()
    if missing:
        raise ConfigError(f"missing required keys: {sorted(missing)}")

    spec = RunSpec(**values)
    _validate(spec, lines)
    return spec


def _validate(spec: RunSpec, lines: dict | None = None):
    lines = lines or {}

    def err(msg, key):
        raise ConfigError(msg, lines.get(key), key)

    if len(spec.profile) < 2:
        err("at least two breakpoints required", "profile")
    try:
        spec.growth_profile()
    except ValueError as exc:
        err(str(exc), "profile")
    try:
        spec.grid()
    except ValueError as exc:
        err(str(exc), "h")
    try:
        spec.params()
    except ValueError as exc:
        err(str(exc), "b")
    if spec.tau <= 0.0 or spec.T < spec.tau:
        err("need tau > 0 and T >= tau", "tau")
    if not spec.allow_unstable and not cfl_check(spec.h, spec.tau):
        err(f"CFL violated: tau/h^2 = {spec.tau / spec.h ** 2:g} > 0.5 "
            "(set allow_unstable = true to override)", "tau")
    for t in spec.snapshot_times:
        if not 0.0 <= t <= spec.T + 1e-9:
            err(f"snapshot time {t} outside [0, T]", "snapshot_times")
    if spec.mode in ("simulate", "sweep"):
        if (spec.u0 is None) == (spec.u0_bump is None):
            err("give exactly one of u0 or u0_bump", "u0")
        try:
            spec.initial_condition()
        except ValueError as exc:
            err(str(exc), "u0" if spec.u0 is not None else "u0_bump")
    if spec.mode == "sweep":
        if not any((spec.sweep_b, spec.sweep_c, spec.sweep_chi)):
            err("sweep mode needs at least one sweep axis", "sweep_c")
    if min(spec.conv_window, spec.conv_tol, spec.extinct_tol,
           spec.plateau_rel_tol, spec.eig_tol, spec.eig_h,
           spec.horizon_scale) <= 0.0:
        err("tolerances must be positive", "conv_tol")
    if spec.verify_samples < 1:
        err("verify_samples must be >= 1", "verify_samples")
    params = spec.params()
    if not params.well_posed:
        print(f"warning: b = {spec.b:g} <= chi*mu = {spec.chi * spec.mu:g}, "
              "solutions may blow up", file=sys.stderr)


# --------------------------------------------------------------------------
# manifest rendering

def render_manifest(spec: RunSpec) -> str:
    out = ["# manifest: every effective input, parse_config-compatible"]

    def emit(key, raw):
        out.append(f"{key} = {raw}")

    emit("mode", spec.mode)
    for key in ("chi", "mu", "nu", "b", "c", "L", "h", "tau", "T"):
        emit(key, fmt(getattr(spec, key)))
    emit("bc", spec.bc.value)
    emit("profile", ", ".join(f"{fmt(x)}:{fmt(r)}" for x, r in spec.profile))
    if spec.u0 is not None:
        emit("u0", ", ".join(f"{fmt(x)}:{fmt(v)}" for x, v in spec.u0))
    if spec.u0_bump is not None:
        emit("u0_bump", ", ".join(fmt(v) for v in spec.u0_bump))
    if spec.snapshot_times:
        emit("snapshot_times", ", ".join(fmt(t) for t in spec.snapshot_times))
    for key in ("conv_window", "conv_tol", "extinct_tol", "plateau_rel_tol"):
        emit(key, fmt(getattr(spec, key)))
    emit("allow_unstable", "true" if spec.allow_unstable else "false")
    emit("eig_h", fmt(spec.eig_h))
    emit("eig_tol", fmt(spec.eig_tol))
    emit("verify_samples", str(spec.verify_samples))
    emit("verify_epsilons", ", ".join(fmt(e) for e in spec.verify_epsilons))
    for key in ("sweep_b", "sweep_c", "sweep_chi"):
        axis = getattr(spec, key)
        if axis is not None:
            emit(key, f"{fmt(axis[0])}, {fmt(axis[1])}, {axis[2]}")
    emit("horizon_scale", fmt(spec.horizon_scale))
    out.append("# deterministic: no seeds; reruns are bitwise identical")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# experiment execution

def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_snapshot_csv(path: Path, nodes, snapshots):
    rows = ["t,x,u,v"]
    for t, u, v in snapshots:
        for xi, ui, vi in zip(nodes, u, v):
            rows.append(f"{fmt(t)},{fmt(xi)},{fmt(ui)},{fmt(vi)}")
    _write(path, "\n".join(rows) + "\n")


def _write_convergence_csv(path: Path, traj):
    rows = ["t,sup_diff,sup_u,u_at_L"]
    for t, d, s, ur in zip(traj.times, traj.sup_diff, traj.sup_u,
                           traj.u_at_right):
        rows.append(f"{fmt(t)},{fmt(d)},{fmt(s)},{fmt(ur)}")
    _write(path, "\n".join(rows) + "\n")


def _outcome_lines(outcome):
    lines = [f"outcome = {outcome.tag.value}",
             f"final_sup_diff = {fmt(outcome.final_sup_diff)}"]
    if outcome.plateau is not None:
        lines.append(f"plateau = {fmt(outcome.plateau)}")
    if outcome.peak is not None:
        lines.append(f"peak = {fmt(outcome.peak[0])}")
        lines.append(f"peak_x = {fmt(outcome.peak[1])}")
    return lines


def run_experiment(spec: RunSpec, out_dir: str | Path):
    """Execute the spec's mode, writing the artifact bundle into out_dir.
    Returns the mode's principal result object."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "manifest.cfg", render_manifest(spec))
    # wall-clock stamp lives in its own file so every other artifact is
    # byte-identical across reruns
    _write(out / "timestamp.txt",
           datetime.datetime.now().isoformat() + "\n")

    if spec.mode == "simulate":
        cfg = spec.run_config()
        u0 = sample(spec.initial_condition(), cfg.grid)
        traj, outcome = run(cfg, u0)
        _write_snapshot_csv(out / "snapshots.csv", cfg.grid.nodes,
                            traj.snapshots)
        _write_convergence_csv(out / "convergence.csv", traj)
        _write(out / "outcome.txt", "\n".join(_outcome_lines(outcome)) + "\n")
        return outcome

    if spec.mode == "eig":
        profile = spec.growth_profile()
        res = lambda_infinity(profile, spec.c, tol=spec.eig_tol, h=spec.eig_h)
        rows = ["L,h,lambda"]
        for L, h, lam in res.table:
            rows.append(f"{fmt(L)},{fmt(h)},{fmt(lam)}")
        _write(out / "eigenvalues.csv", "\n".join(rows) + "\n")
        cert = [
            f"lambda_inf_estimate = {fmt(res.estimate)}",
            f"lower_bound = {fmt(res.estimate)}",
            f"upper_bound = {fmt(res.upper_bound)}",
            f"converged = {'true' if res.converged else 'false'}",
            f"positive = {'true' if res.positive else 'false'}",
        ]
        _write(out / "lambda_infinity.txt", "\n".join(cert) + "\n")
        return res

    if spec.mode == "regime":
        params = spec.params()
        profile = spec.growth_profile()
        report = check_regime(params, profile)
        res = lambda_infinity(profile, spec.c, tol=spec.eig_tol, h=spec.eig_h)
        report = RegimeReport(h1_holds=report.h1_holds,
                              h1_threshold=report.h1_threshold,
                              h2_damping_holds=report.h2_damping_holds,
                              c_star=report.c_star, lambda_inf=res.estimate)
        thr = "undefined" if report.h1_threshold is None \
            else fmt(report.h1_threshold)
        lines = [
            f"h1_holds = {'true' if report.h1_holds else 'false'}",
            f"h1_threshold = {thr}",
            f"h2_damping_holds = {'true' if report.h2_damping_holds else 'false'}",
            f"c_star = {fmt(report.c_star)}",
            f"lambda_inf = {fmt(report.lambda_inf)}",
        ]
        _write(out / "regime.txt", "\n".join(lines) + "\n")
        return report

    if spec.mode == "verify":
        return _run_verify(spec, out)

    if spec.mode == "sweep":
        axes = tuple((name[len("sweep_"):], getattr(spec, name))
                     for name in ("sweep_b", "sweep_c", "sweep_chi")
                     if getattr(spec, name) is not None)
        sw = SweepSpec(base=spec, axes=axes, horizon_scale=spec.horizon_scale)
        return sweep(sw, out / "regime_map.csv")

    raise ConfigError(f"unknown mode {spec.mode!r}")


def _run_verify(spec: RunSpec, out: Path):
    params = spec.params()
    profile = spec.growth_profile()
    grid = spec.grid()
    habitat = classify_profile(profile)
    if habitat is HabitatClass.CASE1:
        envelope = build_upper_envelope_case1(params, profile, grid)
    elif habitat is HabitatClass.CASE2:
        envelope = build_upper_envelope_case2(params, profile, grid)
    else:
        raise ConfigError("verify mode needs a CASE1 or CASE2 profile")
    report = certify_supersolution(envelope, params, profile,
                                   n_samples=spec.verify_samples)
    rows = ["branch,region_nodes,worst_residual,worst_x,worst_sample,pass"]
    for b in report.branches:
        rows.append(
            f"{b.branch},{b.n_nodes},{fmt(b.worst_residual)},{fmt(b.worst_x)},"
            f"{b.worst_sample},{'pass' if b.worst_residual <= report.tol else 'fail'}")
    _write(out / "certification.csv", "\n".join(rows) + "\n")

    ign_rows = ["epsilon,speed,bound"]
    waves = []
    if params.b > 2.0 * params.chi * params.mu:
        bound = speed_limit(params, profile.r_star)
        for eps in spec.verify_epsilons:
            try:
                w = ignition_wave(params, profile.r_star, eps)
            except BracketError as exc:
                print(f"warning: ignition eps={eps:g}: {exc}", file=sys.stderr)
                continue
            waves.append(w)
            ign_rows.append(f"{fmt(eps)},{fmt(w.speed)},{fmt(bound)}")
    else:
        print("warning: b <= 2 chi mu, ignition wave construction skipped",
              file=sys.stderr)
    _write(out / "ignition.csv", "\n".join(ign_rows) + "\n")

    if habitat is HabitatClass.CASE2:
        build_lower_envelope_case2(params, profile, grid, upper=envelope)
    return report, waves


# --------------------------------------------------------------------------
# sweeps

def _axis_values(axis):
    lo, hi, count = axis
    if count == 1:
        return [lo]
    return list(np.linspace(lo, hi, count))


def _sweep_point(args):
    spec, b, c, chi = args
    point = replace(spec, mode="simulate", b=b, c=c, chi=chi,
                    T=spec.T * spec.horizon_scale,
                    snapshot_times=())
    row = {"b": b, "c": c, "chi": chi, "outcome": "error",
           "plateau": math.nan, "final_sup_u": math.nan}
    if b <= chi * point.mu:
        row["outcome"] = "skipped"
        return row
    try:
        cfg = point.run_config()
        u0 = sample(point.initial_condition(), cfg.grid)
        traj, outcome = run(cfg, u0)
    except (BlowUpError, ValueError, RuntimeError):
        return row
    row["outcome"] = outcome.tag.value
    if outcome.plateau is not None:
        row["plateau"] = outcome.plateau
    row["final_sup_u"] = float(traj.u_final.max())
    return row


def sweep(sw: SweepSpec, out_path: str | Path, workers: int = 1):
    """Run the cartesian grid of the sweep axes, classify each point, and
    stream rows to the CSV in deterministic sorted order."""
    base = sw.base
    axis_map = dict(sw.axes)
    bs = _axis_values(axis_map["b"]) if "b" in axis_map else [base.b]
    cs = _axis_values(axis_map["c"]) if "c" in axis_map else [base.c]
    chis = _axis_values(axis_map["chi"]) if "chi" in axis_map else [base.chi]
    points = sorted((b, c, chi) for b in bs for c in cs for chi in chis)
    jobs = [(base, b, c, chi) for b, c, chi in points]

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    rows = []
    with open(out_path, "w") as fh:
        fh.write("b,c,chi,outcome,plateau,final_sup_u\n")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_sweep_point, jobs)
                for row in results:
                    rows.append(row)
                    fh.write(_sweep_row_text(row))
                    fh.flush()
        else:
            for job in jobs:
                row = _sweep_point(job)
                rows.append(row)
                fh.write(_sweep_row_text(row))
                fh.flush()
    return rows


def _sweep_row_text(row) -> str:
    return (f"{fmt(row['b'])},{fmt(row['c'])},{fmt(row['chi'])},"
            f"{row['outcome']},{fmt(row['plateau'])},"
            f"{fmt(row['final_sup_u'])}\n")
