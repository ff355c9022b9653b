import math

import numpy as np
import pytest

from kswave import (BoundaryCase, Grid, greens_psi, greens_psi_x,
                    solve_chemical)

BOTH_CASES = (BoundaryCase.CASE1, BoundaryCase.CASE2)


# ---------------------------------------------------------------------------
# tridiagonal solve

@pytest.mark.parametrize("bc", BOTH_CASES)
def test_zero_input_gives_zero_field(bc):
    g = Grid(L=5.0, h=0.1)
    field = solve_chemical(np.zeros(g.M + 1), g, 1.0, 1.0, bc)
    assert np.all(field.v == 0.0)
    assert np.all(field.vx == 0.0)


def test_three_node_elimination_oracle():
    # M = 2, h = 1, nu = mu = 1, CASE2, u = (0,1,0):
    # (v1 - 2 v2 + v3) - v2 + 1 = 0 with v1 = v3 = 0  =>  v2 = 1/3
    g = Grid(L=1.0, h=1.0)
    field = solve_chemical(np.array([0.0, 1.0, 0.0]), g, 1.0, 1.0,
                           BoundaryCase.CASE2)
    np.testing.assert_allclose(field.v, [0.0, 1.0 / 3.0, 0.0], atol=1e-15)


def test_constant_input_interior_level():
    # u = r*/(b - chi mu) on a long domain: interior v ~ mu r*/(nu (b - chi mu))
    nu, mu = 0.05, 1.0
    cap = 10.0 / 0.9
    g = Grid(L=40.0, h=0.1)
    field = solve_chemical(np.full(g.M + 1, cap), g, nu, mu,
                           BoundaryCase.CASE1)
    center = g.M // 2
    assert field.v[center] == pytest.approx(mu * cap / nu, rel=1e-3)


@pytest.mark.parametrize("bc", BOTH_CASES)
def test_discrete_maximum_principle(bc, rng):
    g = Grid(L=5.0, h=0.05)
    for _ in range(20):
        u = rng.random(g.M + 1) * rng.uniform(0.1, 30.0)
        assert solve_chemical(u, g, 0.7, 1.3, bc).v.min() >= 0.0


@pytest.mark.parametrize("bc", BOTH_CASES)
def test_linearity(bc, rng):
    g = Grid(L=5.0, h=0.1)
    u1, u2 = rng.random(g.M + 1), rng.random(g.M + 1)
    a, b = 1.7, -0.4
    lhs = solve_chemical(a * u1 + b * u2, g, 0.7, 1.3, bc).v
    rhs = a * solve_chemical(u1, g, 0.7, 1.3, bc).v \
        + b * solve_chemical(u2, g, 0.7, 1.3, bc).v
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


@pytest.mark.parametrize("bc", BOTH_CASES)
def test_interior_residual_bound(bc, rng):
    g = Grid(L=5.0, h=0.1)
    nu, mu = 0.7, 1.3
    u = rng.random(g.M + 1) * 3.0
    v = solve_chemical(u, g, nu, mu, bc).v
    res = (v[:-2] - 2 * v[1:-1] + v[2:]) / g.h ** 2 - nu * v[1:-1] \
        + mu * u[1:-1]
    bound = 1e-10 * (np.abs(v).max() * (2 / g.h ** 2 + nu)
                     + mu * np.abs(u).max())
    assert np.abs(res).max() <= bound


def test_boundary_closures(rng):
    g = Grid(L=5.0, h=0.1)
    u = rng.random(g.M + 1)
    f1 = solve_chemical(u, g, 1.0, 1.0, BoundaryCase.CASE1)
    assert f1.v[0] == 0.0
    assert f1.v[-1] == f1.v[-2]          # first-order zero-flux closure
    assert f1.vx[-1] == 0.0              # the scheme's backward difference
    f2 = solve_chemical(u, g, 1.0, 1.0, BoundaryCase.CASE2)
    assert f2.v[0] == 0.0 and f2.v[-1] == 0.0


def test_vx_interior_is_central_difference(rng):
    g = Grid(L=5.0, h=0.1)
    u = rng.random(g.M + 1)
    f = solve_chemical(u, g, 1.0, 1.0, BoundaryCase.CASE2)
    fd = (f.v[2:] - f.v[:-2]) / (2 * g.h)
    np.testing.assert_allclose(f.vx[1:-1], fd, atol=1e-14)


def test_ghost_node_closure_is_second_order():
    # manufactured solution v = cos(k (x - L)) with k = pi/(4L): satisfies
    # v(-L) = 0 and v'(L) = 0, with source u = (nu + k^2) v / mu
    nu, mu, L = 1.0, 1.0, 5.0
    k = math.pi / (4 * L)

    def boundary_error(h, order):
        g = Grid(L=L, h=h)
        v_exact = np.cos(k * (g.nodes - L))
        u = (nu + k * k) * v_exact / mu
        v = solve_chemical(u, g, nu, mu, BoundaryCase.CASE1,
                           neumann_order=order).v
        return np.abs(v - v_exact).max()

    for h in (0.1, 0.05):
        assert boundary_error(h, 2) < boundary_error(h, 1)
    # first-order closure converges at O(h), ghost closure at O(h^2)
    r1 = boundary_error(0.1, 1) / boundary_error(0.05, 1)
    r2 = boundary_error(0.1, 2) / boundary_error(0.05, 2)
    assert 1.5 < r1 < 2.5
    assert 3.0 < r2 < 5.0


def test_ghost_closure_rejected_for_case2():
    g = Grid(L=1.0, h=0.5)
    with pytest.raises(ValueError):
        solve_chemical(np.zeros(g.M + 1), g, 1.0, 1.0, BoundaryCase.CASE2,
                       neumann_order=2)


# ---------------------------------------------------------------------------
# kernel quadrature oracle

def test_greens_psi_zero():
    g = Grid(L=5.0, h=0.1)
    assert np.all(greens_psi(np.zeros(g.M + 1), g, 1.0, 1.0) == 0.0)
    assert np.all(greens_psi_x(np.zeros(g.M + 1), g, 1.0, 1.0) == 0.0)


def test_greens_psi_wide_constant_input():
    # kernel integrates to mu/nu over the whole line
    nu, mu, c0 = 1.0, 1.0, 3.0
    g = Grid(L=40.0, h=0.1)
    psi = greens_psi(np.full(g.M + 1, c0), g, nu, mu)
    assert psi[g.M // 2] == pytest.approx(mu * c0 / nu, rel=1e-2)


def test_greens_psi_x_vanishes_for_even_input():
    g = Grid(L=10.0, h=0.1)
    u = np.exp(-g.nodes ** 2)
    dpsi = greens_psi_x(u, g, 0.5, 1.0)
    assert abs(dpsi[g.M // 2]) <= 1e-8


def test_greens_psi_x_no_overflow_on_large_domain():
    g = Grid(L=500.0, h=1.0)
    u = np.zeros(g.M + 1)
    u[g.M // 2] = 1.0
    dpsi = greens_psi_x(u, g, 1.0, 1.0)
    assert np.all(np.isfinite(dpsi))


def test_finite_difference_consistency_second_order():
    def fd_gap(h):
        g = Grid(L=10.0, h=h)
        u = 2.0 * np.exp(-((g.nodes - 1.2) / 2.0) ** 2)
        psi = greens_psi(u, g, 0.5, 1.0)
        dpsi = greens_psi_x(u, g, 0.5, 1.0)
        fd = (psi[2:] - psi[:-2]) / (2 * g.h)
        return np.abs(fd - dpsi[1:-1]).max()

    e1, e2 = fd_gap(0.1), fd_gap(0.05)
    assert 3.0 < e1 / e2 < 5.0


def test_kernel_bounds_random_envelope_members(rng):
    # Psi <= mu r*/(nu (b - chi mu)), |Psi_x| <= mu r*/(2 sqrt(nu)(b - chi mu))
    nu, mu, cap = 0.05, 1.0, 10.0 / 0.9
    bound_psi = mu * 10.0 / (nu * 0.9)
    bound_dpsi = mu * 10.0 / (2 * math.sqrt(nu) * 0.9)
    g = Grid(L=20.0, h=0.1)
    for i in range(50):
        u = np.full(g.M + 1, cap) if i == 0 \
            else np.minimum(rng.random(g.M + 1) * cap, cap)
        assert greens_psi(u, g, nu, mu).max() <= bound_psi + 1e-8
        assert np.abs(greens_psi_x(u, g, nu, mu)).max() <= bound_dpsi + 1e-8


def test_oracle_equivalence_with_frozen_constant(rng):
    # || solve_chemical - greens_psi || on the middle half is bounded by
    # C h^2 + exp(-sqrt(nu) dist(support, boundary)); C fit once and frozen
    C = 0.3
    nu, mu, L = 1.0, 1.0, 20.0
    for h in (0.1, 0.05):
        g = Grid(L=L, h=h)
        x = g.nodes
        worst = 0.0
        for _ in range(5):
            x0 = rng.uniform(-4, 4)
            w = rng.uniform(0.5, 2.0)
            amp = rng.uniform(0.2, 2.0)
            u = np.where(np.abs(x - x0) < w,
                         amp * (1 + np.cos(np.pi * (x - x0) / w)) / 2, 0.0)
            v = solve_chemical(u, g, nu, mu, BoundaryCase.CASE2).v
            psi = greens_psi(u, g, nu, mu)
            mid = np.abs(x) <= L / 2
            worst = max(worst, float(np.abs(v - psi)[mid].max()))
        dist = L - 6.0
        assert worst <= C * h * h + math.exp(-math.sqrt(nu) * dist)
