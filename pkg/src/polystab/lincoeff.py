"""Coefficient profiles of the problem linearised about a base flow.

Perturbation stresses are carried in Reynolds-scaled form
(alpha_ij = a_ij / Re), matching the momentum equations.  Base-flow
derivatives come from fourth-order finite differences so that this module
does not depend on how the base flow was obtained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .baseflow import BaseFlow, dchi_dZ, ld_grid, relaxation_time_terms
from .config import ModelParams
from .errors import SingularTransform

PROFILE_NAMES = (
    "u_hat", "u_hat_prime", "Z_hat", "Z_hat_prime", "L_hat", "L_hat_prime",
    "a11_hat", "a12_hat", "a22_hat",
    "alpha11", "alpha12", "alpha22", "alpha11_prime", "alpha12_prime", "alpha22_prime",
    "alpha1", "alpha2", "chi0_star", "dchi_dZ", "K_I_hat", "K_tilde_I_hat",
    "R33", "R34", "R35", "R43", "R44", "R45", "R53", "R54", "R55",
    "r11", "r12", "r22", "wave_speed", "d11_real_part", "d22_real_part",
)


@dataclass(frozen=True)
class LinearCoefficients:
    y: np.ndarray
    h: float
    params: ModelParams
    u_hat: np.ndarray
    u_hat_prime: np.ndarray
    Z_hat: np.ndarray
    Z_hat_prime: np.ndarray
    L_hat: np.ndarray
    L_hat_prime: np.ndarray
    a11_hat: np.ndarray
    a12_hat: np.ndarray
    a22_hat: np.ndarray
    alpha11: np.ndarray
    alpha12: np.ndarray
    alpha22: np.ndarray
    alpha11_prime: np.ndarray
    alpha12_prime: np.ndarray
    alpha22_prime: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    chi0_star: np.ndarray
    dchi_dZ: np.ndarray
    K_I_hat: np.ndarray
    K_tilde_I_hat: np.ndarray
    R33: np.ndarray
    R34: np.ndarray
    R35: np.ndarray
    R43: np.ndarray
    R44: np.ndarray
    R45: np.ndarray
    R53: np.ndarray
    R54: np.ndarray
    R55: np.ndarray
    r11: np.ndarray
    r12: np.ndarray
    r22: np.ndarray
    wave_speed: np.ndarray
    sqrt_ratio_prime: np.ndarray
    d11_real_part: np.ndarray
    d22_real_part: np.ndarray

    @property
    def n(self) -> int:
        return self.y.size

    def d_diagonals(self, omega: float):
        """Diagonal entries d11(y), d22(y) of the reduced first-order system."""
        return _d_diagonals(self, omega)

    def profiles(self) -> dict:
        return {name: getattr(self, name) for name in PROFILE_NAMES}


def _d_diagonals(c: LinearCoefficients, omega: float):
    p = c.params
    speed = c.wave_speed
    sqrt_ratio = np.sqrt(c.Z_hat / c.alpha2)
    lam1 = 1.0 + p.lambda_hat
    alpha0 = (c.a12_hat * p.A_r * c.Z_hat / p.Pr
              + p.A_m * p.sigma_m * c.L_hat * lam1 / p.Pr) / c.alpha2
    drift = 1j * omega * (c.u_hat + c.alpha12 * sqrt_ratio)
    common = 0.5 * c.Z_hat_prime / sqrt_ratio + 0.5 * c.alpha2 * c.sqrt_ratio_prime
    relax = c.R43 * c.alpha12 / c.alpha2 + 0.5 * c.R44
    tail = (0.5 * c.alpha12 * p.Pr * alpha0 / sqrt_ratio
            + p.sigma_m / (2.0 * p.b_m) * lam1 ** 2 / speed)
    d11 = -(drift + common + relax) / speed - tail
    d22 = -(drift + common - relax) / speed - tail
    return d11, d22


def build_coefficients(flow: BaseFlow, params: ModelParams = None) -> LinearCoefficients:
    """Evaluate every coefficient of the linearised problem on the flow grid.

    Raises:
        SingularTransform: if ``alpha2 = (a22 + 1/W) / Re`` is not positive.
    """
    p = params or flow.params
    y_ld, h_ld = ld_grid(flow.grid)

    def der(f):
        return numerics.d1(f, h_ld)

    Re, W, beta, kb3 = p.Re, p.W, p.beta, p.k_bar / 3.0
    u, Z, L = flow.u_hat, flow.Z_hat, flow.L_hat
    a11, a12, a22 = flow.a11_hat, flow.a12_hat, flow.a22_hat

    alpha11, alpha12, alpha22 = a11 / Re, a12 / Re, a22 / Re
    alpha1 = alpha11 + p.kappa_sq
    alpha2 = alpha22 + p.kappa_sq
    if np.any(~(alpha2 > 0.0)):
        raise SingularTransform("alpha2 = (a22 + 1/W)/Re must be positive everywhere")

    _, _, chi = relaxation_time_terms(Z, p.E_A_bar)
    chi_z = dchi_dZ(Z, p.E_A_bar)
    K = 1.0 / W + kb3 * (a11 + a22)
    K_t = K + beta * (a11 + a22)
    up = der(u)

    R33 = chi * (K + a11 * (kb3 + 2.0 * beta))
    R34 = -2.0 * up + 2.0 * beta * a12 * chi
    R35 = kb3 * a11 * chi
    R43 = a12 * chi * (kb3 + beta)
    R44 = chi * K_t
    R45 = -up + a12 * chi * (kb3 + beta)
    R53 = chi * a22 * kb3
    R54 = 2.0 * beta * a12 * chi
    R55 = chi * (K + a22 * (kb3 + 2.0 * beta))
    # derivative of the relaxation source with respect to temperature
    r11 = chi_z * (K * a11 + beta * (a11 * a11 + a12 * a12)) / Re
    r12 = chi_z * K_t * alpha12
    r22 = chi_z * (K * a22 + beta * (a22 * a22 + a12 * a12)) / Re

    speed = np.sqrt(Z * alpha2)
    sqrt_ratio = np.sqrt(Z / alpha2)
    relax = R43 * alpha12 / alpha2 + 0.5 * R44

    f64 = lambda a: np.asarray(a, dtype=float)  # noqa: E731
    coeffs = LinearCoefficients(
        y=f64(y_ld), h=float(h_ld), params=p,
        u_hat=f64(u), u_hat_prime=f64(up), Z_hat=f64(Z), Z_hat_prime=f64(der(Z)),
        L_hat=f64(L), L_hat_prime=f64(der(L)),
        a11_hat=f64(a11), a12_hat=f64(a12), a22_hat=f64(a22),
        alpha11=f64(alpha11), alpha12=f64(alpha12), alpha22=f64(alpha22),
        alpha11_prime=f64(der(alpha11)), alpha12_prime=f64(der(alpha12)),
        alpha22_prime=f64(der(alpha22)),
        alpha1=f64(alpha1), alpha2=f64(alpha2), chi0_star=f64(chi), dchi_dZ=f64(chi_z),
        K_I_hat=f64(K), K_tilde_I_hat=f64(K_t),
        R33=f64(R33), R34=f64(R34), R35=f64(R35), R43=f64(R43), R44=f64(R44),
        R45=f64(R45), R53=f64(R53), R54=f64(R54), R55=f64(R55),
        r11=f64(r11), r12=f64(r12), r22=f64(r22),
        wave_speed=f64(speed), sqrt_ratio_prime=f64(der(sqrt_ratio)),
        d11_real_part=f64(-relax / speed), d22_real_part=f64(relax / speed),
    )
    _check_identities(coeffs)
    # real parts carry the omega-free terms as well
    d11, d22 = coeffs.d_diagonals(0.0)
    object.__setattr__(coeffs, "d11_real_part", d11.real)
    object.__setattr__(coeffs, "d22_real_part", d22.real)
    return coeffs


def _check_identities(c: LinearCoefficients, rtol=1e-12):
    """Recompute the definitional identities along a second path."""
    p = c.params
    kb3 = p.k_bar / 3.0
    first_invariant = c.a11_hat + c.a22_hat
    checks = {
        "R44": (c.R44, c.chi0_star * (1.0 / p.W + (kb3 + p.beta) * first_invariant)),
        "R43": (c.R43, c.a12_hat * c.chi0_star * (kb3 + p.beta)),
        "alpha1": (c.alpha1, (c.a11_hat + 1.0 / p.W) / p.Re),
        "alpha2": (c.alpha2, (c.a22_hat + 1.0 / p.W) / p.Re),
    }
    for name, (a, b) in checks.items():
        scale = max(1.0, float(np.max(np.abs(b))))
        if np.max(np.abs(a - b)) > rtol * scale:
            raise ArithmeticError(f"definitional identity for {name} violated")


def d_diagonals(coeffs: LinearCoefficients, omega: float):
    return coeffs.d_diagonals(omega)
