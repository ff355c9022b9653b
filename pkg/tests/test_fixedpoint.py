import numpy as np
import pytest

from kswave import (BoundaryCase, Grid, SimParams, frozen_flow_fixed_point,
                    stationary_residual)


@pytest.fixture(scope="module")
def fp(exp1_params, case1_profile):
    grid = Grid(L=20.0, h=0.1)
    return grid, frozen_flow_fixed_point(exp1_params, case1_profile, grid)


def test_outer_iteration_converges(fp):
    _, res = fp
    assert res.converged
    assert res.n_outer <= 30
    assert res.outer_diffs[-1] < 1e-4
    # contraction: the outer differences decrease
    assert all(b < a for a, b in zip(res.outer_diffs, res.outer_diffs[1:]))


def test_inner_flows_pointwise_nonincreasing(fp):
    _, res = fp
    assert res.monotone_slack <= 1e-10


def test_fixed_point_in_sandwich(fp):
    _, res = fp
    assert np.all(res.u_star <= res.upper.values + 1e-8)
    assert np.all(res.u_star >= res.lower.values - 1e-8)


def test_fixed_point_plateau(fp):
    _, res = fp
    assert abs(res.u_star[-1] / 10.0 - 1.0) < 0.02


def test_stationary_residual_small(fp, exp1_params, case1_profile):
    grid, res = fp
    resid = stationary_residual(res.u_star, exp1_params, case1_profile, grid)
    assert resid <= 1e-3 * float(res.u_star.max())


def test_decoupled_limit_chi_zero(case1_profile):
    # with chi = 0 the frozen field drops out: the second outer iterate
    # repeats the first bitwise
    params = SimParams(chi=0.0, mu=1.0, nu=0.05, b=1.0, c=1.0)
    grid = Grid(L=20.0, h=0.1)
    res = frozen_flow_fixed_point(params, case1_profile, grid)
    assert res.converged
    assert res.n_outer == 2
    assert res.outer_diffs[1] == 0.0


def test_rejects_case2_profiles(exp1_params, case2_profile):
    grid = Grid(L=20.0, h=0.1)
    with pytest.raises(ValueError):
        frozen_flow_fixed_point(exp1_params, case2_profile, grid,
                                bc=BoundaryCase.CASE2)
