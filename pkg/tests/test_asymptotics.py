import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polystab.asymptotics import (CONVENTIONS, asymptotic_eigenvalues, dispersion_residual,
                                  dispersion_roots, phase_integral, stability_margin)

from conftest import coeffs_for, main_params, rest_params


def test_rest_phase_integral_unit():
    assert phase_integral(coeffs_for(rest_params(), 129)) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("W,Re", [(2.0, 1.0), (0.5, 3.0), (4.0, 4.0)])
def test_rest_phase_integral_general(W, Re):
    A = phase_integral(coeffs_for(rest_params(W=W, Re=Re), 129))
    assert A == pytest.approx(np.sqrt(W * Re), rel=1e-13)


def test_main_phase_integral_grid_converged():
    p = main_params()
    A1 = phase_integral(coeffs_for(p, 1025))
    A2 = phase_integral(coeffs_for(p, 2049))
    assert A1 > 0 and abs(A1 - A2) < 1e-8


def test_rest_branch_values():
    fam = asymptotic_eigenvalues(coeffs_for(rest_params(), 129), 0.0, range(0, 3))
    expected = 0.5 + 1j * np.pi * np.arange(3)
    assert np.max(np.abs(fam.lambdas - expected)) < 1e-13


def test_branch_structure_main_case():
    c = coeffs_for(main_params(), 257)
    fam = asymptotic_eigenvalues(c, 1.0, range(-5, 40))
    step = np.pi / fam.A_phase
    assert np.all(fam.lambdas.real == fam.lambdas.real[0])
    im = fam.lambdas.imag
    ulp = np.spacing(np.max(np.abs(im)))
    assert np.max(np.abs(np.diff(im) - step)) <= 2 * ulp


def test_real_part_independent_of_omega():
    c = coeffs_for(main_params(), 257)
    re = {asymptotic_eigenvalues(c, w, [3]).lambdas.real[0] for w in (0.0, 1.0, 5.0, -2.5)}
    assert len(re) == 1


def test_empty_k_range():
    with pytest.raises(ValueError):
        asymptotic_eigenvalues(coeffs_for(rest_params(), 129), 1.0, [])


def test_seed_conventions():
    fam = asymptotic_eigenvalues(coeffs_for(main_params(), 129), 1.0, range(1, 4))
    A, B = fam.A_phase, fam.B_drift
    k = fam.k_list
    assert np.allclose(fam.seeds("direct"), (B + 1j * np.pi * k) / A, rtol=1e-14)
    assert np.allclose(fam.seeds("conjugate"), np.conj((B + 1j * np.pi * k) / A), rtol=1e-14)
    assert np.allclose(fam.seeds("negated"), (-B + 1j * np.pi * k) / A, rtol=1e-14)
    assert set(CONVENTIONS) == {"direct", "conjugate", "negated"}
    with pytest.raises(ValueError):
        fam.seeds("other")


def test_rest_margin_closed_form():
    rep = stability_margin(coeffs_for(rest_params(), 129))
    assert rep.margin_form_B == pytest.approx(0.5, abs=1e-13)
    assert rep.margin_form_A * rep.A_phase == pytest.approx(0.5, abs=1e-13)
    assert rep.classification == "violated"
    assert rep.classification_form_A == "violated"


@given(beta=st.floats(0.05, 0.95), W=st.floats(0.2, 5.0), Re=st.floats(0.2, 5.0))
@settings(max_examples=15, deadline=None)
def test_rest_margins_positive_for_any_beta(beta, W, Re):
    rep = stability_margin(coeffs_for(rest_params(beta=beta, W=W, Re=Re), 65))
    assert rep.margin_form_B == pytest.approx(0.5 * np.sqrt(Re / W), rel=1e-12)
    assert rep.margin_form_A > 0 and rep.margin_form_B > 0


def test_margin_report_dict():
    rep = stability_margin(coeffs_for(main_params(), 129))
    d = rep.to_dict()
    assert d["classification"] in ("violated", "necessary-condition-met")
    assert d["discrepancy"] == pytest.approx(abs(rep.margin_form_A - rep.margin_form_B / rep.A_phase))


def test_rest_dispersion_roots():
    c = coeffs_for(rest_params(sigma_m=0.0), 129)
    k = np.arange(-3, 4)
    roots = dispersion_roots(c, 0.0, k)
    assert np.allclose(roots, 0.5 + 1j * np.pi * k, atol=1e-13)
    assert np.max(np.abs(dispersion_residual(c, 0.0, roots))) < 1e-12


def test_dispersion_periodicity_and_separation():
    c = coeffs_for(main_params(), 257)
    A = phase_integral(c)
    root = dispersion_roots(c, 1.0, [2])[0]
    for m in (1, 3, 10):
        assert abs(dispersion_residual(c, 1.0, root + 2j * np.pi * m / A)) < 1e-12
    # half-way between roots the two exponentials add instead of cancelling
    assert abs(dispersion_residual(c, 1.0, root + 0.5j * np.pi / A)) > 0.5


def test_dispersion_no_overflow():
    c = coeffs_for(main_params(), 129)
    val = dispersion_residual(c, 1.0, np.array([2000.0 + 3j, -2000.0]))
    assert np.all(np.isfinite(val))


def test_dispersion_roots_share_branch_spacing():
    c = coeffs_for(main_params(), 257)
    fam = asymptotic_eigenvalues(c, 1.0, range(5, 9))
    roots = dispersion_roots(c, 1.0, range(5, 9))
    assert np.allclose(np.diff(roots.imag), np.diff(fam.lambdas.imag), rtol=1e-12)
