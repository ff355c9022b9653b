"""Forced traveling waves of a 1-D parabolic-elliptic chemotaxis system in a
shifting habitat: a deterministic explicit-scheme simulator plus the
analytic verification toolkit (Green's-kernel chemical fields, principal
eigenvalues, super/sub-solution envelopes, and the frozen-chemotaxis
fixed-point iteration)."""

from .chemical import (ChemicalField, ChemicalSolver, greens_psi,
                       greens_psi_x, solve_chemical)
from .envelopes import (CertificationReport, Envelope, EnvelopeKind,
                        ResidualField, build_lower_envelope_case1,
                        build_lower_envelope_case2,
                        build_upper_envelope_case1,
                        build_upper_envelope_case2, certify_supersolution,
                        envelope_branch_residual, residual_A)
from .fixedpoint import (FixedPointResult, SandwichError,
                         frozen_flow_fixed_point, stationary_residual)
from .harness import (ConfigError, RunSpec, SweepSpec, parse_config,
                      render_manifest, run_experiment, sweep)
from .ignition import (BracketError, IgnitionWave, ignition_wave,
                       profile_residual, richardson_speed, speed_limit)
from .model import (BoundaryCase, Grid, GrowthProfile, HabitatClass,
                    InitialCondition, RegimeReport, SimParams, check_regime,
                    classify_profile, sample, theta_root)
from .spectral import (EigenResult, LambdaInfinityResult, lambda_infinity,
                       principal_eigenvalue)
from .stepper import (BlowUpError, Outcome, OutcomeTag, RunConfig, State,
                      Trajectory, cfl_check, detect_outcome, initial_state,
                      make_run_config, run, step)

__version__ = "0.1.0"
