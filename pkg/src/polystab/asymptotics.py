"""Large-|k| eigenvalue asymptotics, stability margin and dispersion relation.

All channel integrals use composite Simpson on the coefficient grid.  The
local elastic wave speed is ``c(y) = sqrt(Z * alpha2)``; the phase integral
``A = int dy / c`` sets the imaginary spacing ``pi / A`` of the branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lincoeff import LinearCoefficients
from .numerics import simpson

CONVENTIONS = ("direct", "conjugate", "negated")


@dataclass(frozen=True)
class EigenFamily:
    omega: float
    k_list: np.ndarray
    lambdas: np.ndarray
    A_phase: float
    B_drift: complex

    def seeds(self, convention: str = "direct") -> np.ndarray:
        """Branch values under one of the candidate sign conventions.

        ``direct``    (B + k pi i) / A
        ``conjugate`` conj of the direct value
        ``negated``   (-B + k pi i) / A, i.e. minus the direct value at -k
        """
        if convention == "direct":
            return self.lambdas
        if convention == "conjugate":
            return np.conj(self.lambdas)
        if convention == "negated":
            return -self.lambdas.real + 1j * (
                -self.B_drift.imag / self.A_phase + self.k_list * (np.pi / self.A_phase))
        raise ValueError(f"unknown convention {convention!r}")


@dataclass(frozen=True)
class StabilityReport:
    margin_form_A: float
    margin_form_B: float
    classification: str
    classification_form_A: str
    discrepancy: float
    A_phase: float
    notes: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "margin_form_A": self.margin_form_A,
            "margin_form_B": self.margin_form_B,
            "classification": self.classification,
            "classification_form_A": self.classification_form_A,
            "discrepancy": self.discrepancy,
            "A_phase": self.A_phase,
            "notes": list(self.notes),
        }


def _inv_speed(c: LinearCoefficients) -> np.ndarray:
    return 1.0 / c.wave_speed


def _relaxation_drift(c: LinearCoefficients) -> np.ndarray:
    return c.R43 * c.alpha12 / c.alpha2 + 0.5 * c.R44


def phase_integral(coeffs: LinearCoefficients) -> float:
    return float(simpson(_inv_speed(coeffs), coeffs.h))


def drift_integral(coeffs: LinearCoefficients, omega: float) -> complex:
    w = _inv_speed(coeffs)
    real = simpson(w * _relaxation_drift(coeffs), coeffs.h)
    imag = omega * simpson(w * coeffs.u_hat, coeffs.h)
    return complex(real, imag)


def asymptotic_eigenvalues(coeffs: LinearCoefficients, omega: float, k_range) -> EigenFamily:
    """Leading-order branch ``lambda_k = (B + k pi i) / A``.

    ``k_range`` is any iterable of integers (negative k give the mirrored
    branch).  The real part is computed once, so it is identical for every k
    and every omega.
    """
    k = np.asarray(list(k_range), dtype=int)
    if k.size == 0:
        raise ValueError("k_range must not be empty")
    A = phase_integral(coeffs)
    B = drift_integral(coeffs, omega)
    step = np.pi / A
    re = B.real / A
    im = B.imag / A + k * step
    lambdas = re + 1j * im
    return EigenFamily(omega=float(omega), k_list=k, lambdas=lambdas, A_phase=A, B_drift=B)


def _classify(margin: float) -> str:
    return "necessary-condition-met" if margin < 0.0 else "violated"


def stability_margin(coeffs: LinearCoefficients) -> StabilityReport:
    """Evaluate the stability integral in two forms.

    Form A is the real part of the branch, ``A^-1 int (R43 alpha12/alpha2 +
    R44/2) / c``.  Form B is ``int chi (a11 (k_bar/3 + beta) + 1/(2W)) / c``;
    its sign decides the classification.  The two agree exactly only when
    the closure identity a11 - a22 = 2 g / A2 holds, so the normalised gap is
    reported.
    """
    p = coeffs.params
    w = _inv_speed(coeffs)
    A = phase_integral(coeffs)
    form_a = float(simpson(w * _relaxation_drift(coeffs), coeffs.h)) / A
    integrand_b = coeffs.chi0_star * w * (
        coeffs.a11_hat * (p.k_bar / 3.0 + p.beta) + 1.0 / (2.0 * p.W))
    form_b = float(simpson(integrand_b, coeffs.h))
    return StabilityReport(
        margin_form_A=form_a,
        margin_form_B=form_b,
        classification=_classify(form_b),
        classification_form_A=_classify(form_a),
        discrepancy=abs(form_a - form_b / A),
        A_phase=A,
    )


def dispersion_residual(coeffs: LinearCoefficients, omega: float, lam) -> complex:
    """Normalised ``exp(lam A + int d11) - exp(-lam A + int d22)``.

    Both exponentials are divided by the larger one, so the value stays
    representable for large ``|Re lam| A``.
    """
    d11, d22 = coeffs.d_diagonals(omega)
    A = phase_integral(coeffs)
    i11 = simpson(d11, coeffs.h)
    i22 = simpson(d22, coeffs.h)
    lam = np.asarray(lam, dtype=complex)
    e1 = lam * A + i11
    e2 = -lam * A + i22
    top = np.maximum(e1.real, e2.real)
    out = np.exp(e1 - top) - np.exp(e2 - top)
    return complex(out) if out.ndim == 0 else out


def dispersion_roots(coeffs: LinearCoefficients, omega: float, k_range) -> np.ndarray:
    """Closed-form roots of :func:`dispersion_residual`."""
    d11, d22 = coeffs.d_diagonals(omega)
    A = phase_integral(coeffs)
    half_gap = 0.5 * (simpson(d22, coeffs.h) - simpson(d11, coeffs.h))
    k = np.asarray(list(k_range), dtype=int)
    return (half_gap + 1j * np.pi * k) / A
