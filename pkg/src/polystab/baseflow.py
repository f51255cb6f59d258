"""Stationary Poiseuille-type flow in the heated, magnetised channel.

The stationary system reduces to one algebraic identity for the shear stress,

    Z * a12 = R(y, C) = -(1 + lam) Re sigma_m (L + J+) + D (1/2 - y) + C,

a pointwise 2x2 closure for the normal stresses, a first-order equation for
the velocity and two Dirichlet problems (temperature, induced field).  The
free constant ``C = a12(1/2)`` is fixed by the remaining no-slip condition
``u(1/2) = 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import numerics
from .config import Grid, ModelParams
from .errors import BracketFailure, BranchLoss, DomainError, NoConvergence

log = logging.getLogger(__name__)

RESIDUAL_NAMES = (
    "shear_balance",
    "normal_balance",
    "velocity",
    "closure_22",
    "closure_11",
    "energy",
    "induction",
)


def relaxation_time_terms(Z, E_A_bar):
    """Return ``(J(Z), tau0_bar(Z), chi0_star(Z))`` for the Arrhenius law.

    ``J = exp(E (Z - 1) / Z)``, ``tau0_bar = 1 / (Z J)`` and the inverse
    relaxation time ``chi0_star = Z J``.
    """
    Z = _real_array(Z)
    if np.any(~(Z > 0.0)):
        raise DomainError("temperature Z must be positive")
    J = np.exp(E_A_bar * (Z - 1.0) / Z)
    chi = Z * J
    if Z.ndim == 0:
        return float(J), float(1.0 / chi), float(chi)
    return J, 1.0 / chi, chi


def dchi_dZ(Z, E_A_bar):
    """Derivative of ``chi0_star = Z J(Z)`` with respect to Z."""
    Z = _real_array(Z)
    return np.exp(E_A_bar * (Z - 1.0) / Z) * (1.0 + E_A_bar / Z)


def _real_array(x):
    x = np.asarray(x)
    return x if x.dtype.kind == "f" else x.astype(float)


def ld_grid(grid: Grid):
    """Nodes and spacing of ``grid`` in extended precision."""
    h = np.longdouble(1) / (grid.n_nodes - 1)
    return np.longdouble(-0.5) + np.arange(grid.n_nodes, dtype=np.longdouble) * h, h


def closure_residual(a11, a22, g, params: ModelParams):
    inv_w = 1.0 / params.W
    K = inv_w + params.k_bar / 3.0 * (a11 + a22)
    A2 = inv_w + a22
    r22 = K * a22 + params.beta * (g + a22 * a22)
    r11 = K * a11 + params.beta * (g + a11 * a11) - 2.0 * g * K / A2
    return r11, r22


def _newton_closure(g, a11, a22, params: ModelParams, max_iter=50, tol=1e-13):
    """Vectorised Newton on the closure; raises BranchLoss on failure."""
    g = _real_array(g)
    a11 = np.array(a11, dtype=g.dtype, copy=True) * np.ones_like(g)
    a22 = np.array(a22, dtype=g.dtype, copy=True) * np.ones_like(g)
    inv_w = 1.0 / params.W
    kb3 = params.k_bar / 3.0
    beta = params.beta
    scale = 1.0 + np.abs(g)
    for _ in range(max_iter + 1):
        K = inv_w + kb3 * (a11 + a22)
        A2 = inv_w + a22
        if np.any(A2 <= 0.0):
            raise BranchLoss("W^-1 + a22 crossed zero in the closure")
        r11 = K * a11 + beta * (g + a11 * a11) - 2.0 * g * K / A2
        r22 = K * a22 + beta * (g + a22 * a22)
        if np.all(np.abs(r11) <= tol * scale) and np.all(np.abs(r22) <= tol * scale):
            return a11, a22
        j11 = kb3 * a11 + K + 2.0 * beta * a11 - 2.0 * g * kb3 / A2
        j12 = kb3 * a11 - 2.0 * g * kb3 / A2 + 2.0 * g * K / (A2 * A2)
        j21 = kb3 * a22
        j22 = kb3 * a22 + K + 2.0 * beta * a22
        det = j11 * j22 - j12 * j21
        if np.any(det == 0.0) or not np.all(np.isfinite(det)):
            raise BranchLoss("singular closure Jacobian")
        d11 = (j22 * r11 - j12 * r22) / det
        d22 = (j11 * r22 - j21 * r11) / det
        step = np.ones_like(g)
        # keep W^-1 + a22 positive along the step
        for _ in range(30):
            trial = A2 - step * d22
            bad = trial <= 0.0
            if not np.any(bad):
                break
            step = np.where(bad, 0.5 * step, step)
        a11 = a11 - step * d11
        a22 = a22 - step * d22
    raise BranchLoss("closure Newton did not converge in %d iterations" % max_iter)


def closure_solve(g, params: ModelParams, seed=(0.0, 0.0)):
    """Normal stresses ``(a11, a22)`` for a given squared shear stress g.

    Newton from ``seed``; the root returned is the one reached from the
    continuation value, i.e. the branch through the origin when g -> 0.
    """
    if g < 0.0:
        raise DomainError("g = a12^2 must be non-negative")
    a11, a22 = _newton_closure(np.array([g]), seed[0], seed[1], params)
    return float(a11[0]), float(a22[0])


def _closure_sweep(g, params: ModelParams):
    """Closure at every node by continuation in y from the bottom wall."""
    a11 = np.empty_like(g)
    a22 = np.empty_like(g)
    seed = (0.0, 0.0)
    for j, gj in enumerate(g):
        try:
            seed = closure_solve(gj, params, seed)
        except BranchLoss:
            # homotopy in g from the origin branch
            s = (0.0, 0.0)
            for t in np.linspace(0.0, 1.0, 21)[1:]:
                s = closure_solve(t * gj, params, s)
            seed = s
        a11[j], a22[j] = seed
    return a11, a22


@dataclass
class BaseFlow:
    """Converged stationary profiles on a grid.

    Profiles are held in extended precision so that finite-difference checks
    of the second-order equations resolve the discretization error rather
    than double-precision roundoff.
    """

    grid: Grid
    params: ModelParams
    u_hat: np.ndarray
    a11_hat: np.ndarray
    a12_hat: np.ndarray
    a22_hat: np.ndarray
    Z_hat: np.ndarray
    L_hat: np.ndarray
    P_hat: np.ndarray
    M_hat: float
    C_bar: float
    residuals: dict = field(default_factory=dict)
    iterations: dict = field(default_factory=dict)

    @property
    def y(self) -> np.ndarray:
        return self.grid.nodes


class _Picard:
    """Inner fixed-point loop for a given value of the constant C."""

    def __init__(self, params: ModelParams, grid: Grid, tol: float, max_inner: int):
        self.p = params
        self.grid = grid
        self.y, self.h = ld_grid(grid)
        self.tol = tol
        self.max_inner = max_inner
        p = params
        self.Z0 = 1.0 + p.theta_bar * (0.5 - self.y)
        self.L0 = -p.J_minus + (p.J_minus - p.J_plus) * (self.y + 0.5)
        self.Z0[[0, -1]] = 1.0 + p.theta_bar, 1.0
        self.L0[[0, -1]] = -p.J_minus, -p.J_plus
        self.Z, self.L = self.Z0, self.L0
        self.a11 = None
        self.a22 = None
        self.inner_steps = 0

    def shear_target(self, C, L):
        p = self.p
        return (-(1.0 + p.lambda_hat) * p.Re * p.sigma_m * (L + p.J_plus)
                + p.D_hat * (0.5 - self.y) + C)

    def fields(self, C, Z, L):
        """All profiles implied by (C, Z, L)."""
        p = self.p
        if np.any(~(Z > 0.0)):
            raise BranchLoss("temperature profile lost positivity")
        a12 = self.shear_target(C, L) / Z
        g = a12 * a12
        if self.a11 is None:
            a11, a22 = _closure_sweep(g, p)
        else:
            try:
                a11, a22 = _newton_closure(g, self.a11, self.a22, p)
            except BranchLoss:
                a11, a22 = _closure_sweep(g, p)
        self.a11, self.a22 = a11, a22
        _, _, chi = relaxation_time_terms(Z, p.E_A_bar)
        k_tilde = 1.0 / p.W + (p.k_bar / 3.0 + p.beta) * (a11 + a22)
        up = chi * k_tilde * a12 / (1.0 / p.W + a22)
        return a12, a11, a22, up

    def update_maps(self, Z, L, a12, up):
        p = self.p
        lam1 = 1.0 + p.lambda_hat
        heat = (p.A_r * Z * a12 + p.A_m * p.sigma_m * lam1 * L) * up
        Z_new = numerics.solve_dirichlet(-heat, self.h, 1.0 + p.theta_bar, 1.0)
        L_new = numerics.solve_dirichlet(-lam1 * up / p.b_m, self.h, -p.J_minus, -p.J_plus)
        return Z_new, L_new

    def run(self, C):
        # every call starts from the same state, so the outer mismatch is a
        # function of C alone and Brent's bracket stays valid
        Z, L = self.Z0.copy(), self.L0.copy()
        self.a11 = self.a22 = None
        gamma = 0.5
        history = []
        for it in range(1, self.max_inner + 1):
            a12, a11, a22, up = self.fields(C, Z, L)
            Z_new, L_new = self.update_maps(Z, L, a12, up)
            change = max(np.max(np.abs(Z_new - Z)), np.max(np.abs(L_new - L)))
            if not np.isfinite(change) or change > 1e8:
                raise NoConvergence("inner iteration diverged", {"change": float(change)})
            Z = Z + gamma * (Z_new - Z)
            L = L + gamma * (L_new - L)
            self.inner_steps += 1
            if change < self.tol:
                break
            history.append(change)
            if gamma < 1.0 and len(history) >= 6 and all(
                history[i + 1] < history[i] for i in range(-6, -1)
            ):
                gamma = 1.0
            elif gamma == 1.0 and len(history) >= 2 and history[-1] > history[-2]:
                gamma = 0.5
        else:
            raise NoConvergence(
                "inner iteration budget exhausted", {"change": float(change), "C_bar": float(C)}
            )
        self.Z, self.L = Z, L
        a12, a11, a22, up = self.fields(C, Z, L)
        u = numerics.cumulative(up, self.h)
        return u, a12, a11, a22, up


def _mismatch_scale(p: ModelParams) -> float:
    return max(1.0, abs(p.D_hat),
               p.sigma_m * p.Re * (1.0 + p.lambda_hat) * (abs(p.J_plus) + abs(p.J_minus)))


def solve_base_flow(params: ModelParams, grid: Grid, tol: float = 1e-11,
                    max_outer: int = 100, max_inner: int = 2000) -> BaseFlow:
    """Solve the stationary boundary value problem for the Poiseuille-type flow.

    Raises:
        NoConvergence: outer or inner iteration budget exhausted.
        BranchLoss: no physical closure root somewhere in the channel.
        BracketFailure: no sign change of ``u(1/2)`` found in C.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    picard = _Picard(params, grid, tol, max_inner)
    calls = {"n": 0}

    def mismatch(C):
        calls["n"] += 1
        if calls["n"] > max_outer:
            raise _BudgetExhausted("outer iteration budget exhausted", {"C_bar": float(C)})
        return float(picard.run(C)[0][-1])

    # centre the search where the shear target has zero mean for the start profiles
    C0 = -float(np.mean(picard.shear_target(0.0, picard.L)))
    f0 = mismatch(C0)
    if f0 == 0.0:
        C_bar = C0
    else:
        C_bar = _bracket_and_solve(mismatch, C0, f0, _mismatch_scale(params), tol)

    u, a12, a11, a22, up = picard.run(C_bar)
    Z, L = picard.Z, picard.L
    p = params
    Z_new, L_new = picard.update_maps(Z, L, a12, up)
    r11, r22 = closure_residual(a11, a22, a12 * a12, p)
    P = _pressure(p, grid, Z, L, a22)
    residuals = {
        "shear_balance": float(np.max(np.abs(Z * a12 - picard.shear_target(C_bar, L)))),
        "normal_balance": 0.0,
        "velocity": float(abs(u[-1])),
        "closure_22": float(np.max(np.abs(r22))),
        "closure_11": float(np.max(np.abs(r11))),
        "energy": float(np.max(np.abs(Z_new - Z))),
        "induction": float(np.max(np.abs(L_new - L))),
    }
    bad = {k: v for k, v in residuals.items() if not v < tol * 10.0}
    if bad:
        raise NoConvergence("stationary residuals above tolerance", residuals)
    log.debug("base flow: C=%r outer=%d inner=%d", C_bar, calls["n"], picard.inner_steps)
    return BaseFlow(
        grid=grid, params=p, u_hat=u, a11_hat=a11, a12_hat=a12, a22_hat=a22,
        Z_hat=Z.copy(), L_hat=L.copy(), P_hat=P, M_hat=p.lambda_hat, C_bar=float(C_bar),
        residuals=residuals,
        iterations={"outer": calls["n"], "inner": picard.inner_steps},
    )


def _pressure(p: ModelParams, grid: Grid, Z, L, a22):
    _, h = ld_grid(grid)
    mid = grid.mid
    buoy = numerics.cumulative(p.Gr * (Z - 1.0), h)
    P = (buoy - buoy[mid]
         - 0.5 * p.sigma_m * (L * L - L[mid] ** 2)
         + (Z * a22 - Z[mid] * a22[mid]) / p.Re)
    return P


class _BudgetExhausted(NoConvergence):
    """Outer budget used up; must not be mistaken for an inadmissible C."""


def _bracket_and_solve(mismatch, C0, f0, scale, tol):
    """Expand a bracket around C0, then Brent's method (secant + bisection)."""
    lo_valid = hi_valid = C0
    f_lo = f_hi = f0
    bracket = None
    width = 0.0625 * scale
    lo_open = hi_open = True
    for _ in range(12):
        for side in (-1, 1):
            if (side < 0 and not lo_open) or (side > 0 and not hi_open):
                continue
            C = C0 + side * width
            try:
                f = mismatch(C)
            except _BudgetExhausted:
                raise
            except (BranchLoss, NoConvergence):
                # pull back toward the last admissible point a few times
                inner = lo_valid if side < 0 else hi_valid
                found = False
                for _ in range(6):
                    C = 0.5 * (C + inner)
                    try:
                        f = mismatch(C)
                        found = True
                        break
                    except _BudgetExhausted:
                        raise
                    except (BranchLoss, NoConvergence):
                        continue
                if side < 0:
                    lo_open = False
                else:
                    hi_open = False
                if not found:
                    continue
            if side < 0:
                lo_valid, f_lo = C, f
                if np.sign(f) != np.sign(f0):
                    bracket = (C, f, C0, f0) if bracket is None else bracket
            else:
                hi_valid, f_hi = C, f
                if np.sign(f) != np.sign(f0):
                    bracket = (C0, f0, C, f) if bracket is None else bracket
            if bracket is not None:
                break
        if bracket is not None or not (lo_open or hi_open):
            break
        width *= 2.0
    if bracket is None:
        raise BracketFailure("no sign change of u(1/2) in the admissible range of C")
    a, fa, b, fb = bracket
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    return brentq(mismatch, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)


def base_flow_residuals(flow: BaseFlow, params: ModelParams = None) -> dict:
    """Sup-norm residual of every stationary equation by direct substitution.

    Derivatives use fourth-order centered differences on nodes 2 .. n-3, so
    the check is independent of the solver's quadrature.
    """
    p = params or flow.params
    _, h = ld_grid(flow.grid)
    Z, L, u = flow.Z_hat, flow.L_hat, flow.u_hat
    a11, a12, a22 = flow.a11_hat, flow.a12_hat, flow.a22_hat
    lam1 = 1.0 + p.lambda_hat
    inner = slice(2, -2)
    du = numerics.d1_interior(u, h)
    _, _, chi = relaxation_time_terms(Z, p.E_A_bar)
    k_tilde = 1.0 / p.W + (p.k_bar / 3.0 + p.beta) * (a11 + a22)
    r11, r22 = closure_residual(a11, a22, a12 * a12, p)
    res = {
        "shear_balance": numerics.d1_interior(Z * a12 + lam1 * p.sigma_m * p.Re * L, h) + p.D_hat,
        "normal_balance": numerics.d1_interior(
            flow.P_hat + 0.5 * p.sigma_m * L * L - Z * a22 / p.Re, h) - p.Gr * (Z[inner] - 1.0),
        "velocity": du - (chi * k_tilde * a12 / (1.0 / p.W + a22))[inner],
        "closure_22": r22,
        "closure_11": r11,
        "energy": numerics.d2_interior(Z, h)
        + ((p.A_r * Z * a12 + p.A_m * p.sigma_m * lam1 * L))[inner] * du,
        "induction": p.b_m * numerics.d2_interior(L, h) + lam1 * du,
    }
    return {k: float(np.max(np.abs(v))) for k, v in res.items()}
