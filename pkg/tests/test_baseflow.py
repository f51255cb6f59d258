import dataclasses

import numpy as np
import pytest

from polystab.baseflow import (RESIDUAL_NAMES, base_flow_residuals, closure_residual,
                               closure_solve, relaxation_time_terms, solve_base_flow)
from polystab.config import Grid
from polystab.errors import BranchLoss, DomainError, NoConvergence

from conftest import flow_for, main_params, rest_params

# independent oracle: a22 from its quadratic at fixed a11, then bisection of the
# a11 equation on a 1e-3 scan bracket (W=1, beta=0.5, k_bar=0.1, g=0.36)
CLOSURE_KBAR_01 = (0.5625072872253868, -0.19700536161912238)


def test_relaxation_terms():
    J, tau, chi = relaxation_time_terms(1.0, 7.3)
    assert (J, tau, chi) == (1.0, 1.0, 1.0)
    J, tau, chi = relaxation_time_terms(2.0, 1.0)
    assert J == pytest.approx(np.exp(0.5), rel=1e-15)
    assert chi == pytest.approx(2.0 * np.exp(0.5), rel=1e-15)
    assert tau * chi == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("Z", [0.0, -1.0, np.array([1.0, 0.0])])
def test_relaxation_domain(Z):
    with pytest.raises(DomainError):
        relaxation_time_terms(Z, 1.0)


def test_closure_origin():
    assert closure_solve(0.0, main_params()) == (0.0, 0.0)


def test_closure_quadratic_branch():
    a11, a22 = closure_solve(0.36, main_params())
    assert a22 == pytest.approx(-0.2, abs=1e-12)
    assert a11 == pytest.approx(-1.0 + np.sqrt(2.44), abs=1e-12)


def test_closure_against_scan_oracle():
    p = main_params(k_phen=0.6)
    a11, a22 = closure_solve(0.36, p)
    assert a11 == pytest.approx(CLOSURE_KBAR_01[0], abs=1e-12)
    assert a22 == pytest.approx(CLOSURE_KBAR_01[1], abs=1e-12)
    r11, r22 = closure_residual(a11, a22, 0.36, p)
    assert abs(r11) < 1e-12 and abs(r22) < 1e-12


def test_closure_branch_loss():
    # with k_bar = 0 the a22 quadratic has no real root once g > 1 / (4 beta^2)
    with pytest.raises(BranchLoss):
        closure_solve(1.5, main_params())


def test_rest_state_exact():
    p = rest_params(J_plus=1.5, J_minus=1.5)
    f = solve_base_flow(p, Grid(257))
    for arr in (f.u_hat, f.a11_hat, f.a12_hat, f.a22_hat):
        assert np.max(np.abs(arr)) < 1e-10
    assert np.max(np.abs(f.Z_hat - 1.0)) < 1e-10
    assert np.max(np.abs(f.L_hat + 1.5)) < 1e-10
    assert abs(f.C_bar) < 1e-10
    assert all(v < 1e-10 for v in base_flow_residuals(f).values())


def test_decoupled_temperature_is_linear():
    f = solve_base_flow(rest_params(theta_bar=0.5), Grid(257))
    y = f.y
    assert np.max(np.abs(f.u_hat)) < 1e-10
    assert np.max(np.abs(f.Z_hat - (1.0 + 0.5 * (0.5 - y)))) < 1e-10


def test_main_case_invariants():
    p = main_params()
    f = flow_for(p, 257)
    assert f.Z_hat[-1] == 1.0 and f.Z_hat[0] == 1.0 + p.theta_bar
    assert f.L_hat[-1] == -p.J_plus and f.L_hat[0] == -p.J_minus
    assert abs(f.u_hat[0]) < 1e-10 and abs(f.u_hat[-1]) < 1e-10
    assert np.all(f.Z_hat > 0)
    assert f.P_hat[f.grid.mid] == 0.0
    assert set(f.residuals) == set(RESIDUAL_NAMES)
    assert all(v < 1e-10 for v in f.residuals.values())
    # shear identity Z a12 = R(y, C)
    lam1 = 1.0 + p.lambda_hat
    R = (-lam1 * p.sigma_m * p.Re * (f.L_hat + p.J_plus) + p.D_hat * (0.5 - f.y) + f.C_bar)
    assert np.max(np.abs(f.Z_hat * f.a12_hat - R)) < 1e-10


def test_main_case_profile_is_asymmetric():
    f = flow_for(main_params(), 257)
    u = np.asarray(f.u_hat, dtype=float)
    assert np.max(np.abs(u - u[::-1])) > 0.02 * np.max(np.abs(u))


def test_residuals_converge_on_coarse_grids():
    p = main_params()
    r1 = base_flow_residuals(flow_for(p, 129))
    r2 = base_flow_residuals(flow_for(p, 257))
    for name in ("velocity", "energy", "induction"):
        assert r1[name] / r2[name] > 4.0, name


def test_residual_detects_bump():
    f = flow_for(main_params(), 257)
    y = f.y
    bump = 1e-3 * np.exp(-((y - 0.1) / 0.05) ** 2)
    bad = dataclasses.replace(f, u_hat=f.u_hat + bump)
    assert base_flow_residuals(bad)["velocity"] > 1e-4


def test_outer_budget_exhausted():
    with pytest.raises(NoConvergence) as info:
        solve_base_flow(main_params(), Grid(129), max_outer=1)
    assert "C_bar" in info.value.residuals


def test_branch_loss_propagates():
    with pytest.raises(BranchLoss):
        solve_base_flow(main_params(theta_bar=-0.95), Grid(129))


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        solve_base_flow(main_params(), Grid(129), tol=0.0)
