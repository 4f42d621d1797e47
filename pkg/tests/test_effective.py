import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from phononqnd.effective import (
    coefficients_for,
    coefficients_from_integrals,
    effective_coefficients,
    gamma_ratio_sweep,
    gamma_zero,
    integrated_dB,
    qnd_figure_of_merit,
)
from phononqnd.fluctuations import build_model, operator_correlators
from phononqnd.params import AncillaParams, CouplingParams
from phononqnd.steady_state import UnstableBranchError, operating_branch, solve_steady_state

from conftest import draw_ancilla, stable_draws

C = CouplingParams(0.03)


def test_zero_detuning_limit(rng):
    for _ in range(200):
        p = draw_ancilla(rng, kerr=False).replace(delta_omega=0.0)
        c = CouplingParams(rng.uniform(-0.1, 0.1))
        co = coefficients_for(p, c)
        k, e, N1, l = p.kappa, p.epsilon, p.N1, c.lambda01
        assert co.delta == pytest.approx(l * (N1 + (e / k) ** 2), rel=1e-12)
        assert co.gamma == pytest.approx(l * l * e * e * (2 * N1 + 1) / k**3, rel=1e-12)
        assert co.theta == 0


def test_gamma_forms_agree(rng):
    for p, br in stable_draws(rng, 500):
        co = effective_coefficients(br, None, p, C)
        assert co.gamma_bracketed == pytest.approx(co.gamma, rel=1e-12)


def test_integrals_rebuild_closed_forms(rng):
    for p, br in stable_draws(rng, 20):
        f = build_model(br, p)
        co = effective_coefficients(br, f, p, C)
        for method in ("analytic", "quadrature"):
            ic = coefficients_from_integrals(f, br, p, C, method=method)
            assert ic.gamma == pytest.approx(co.gamma, rel=1e-6)
            assert ic.delta == pytest.approx(co.delta, rel=1e-6)
            assert ic.theta_minus_lambda00 == pytest.approx(co.theta, rel=1e-6, abs=1e-15)


def test_integral_against_trapezoid(rng):
    # brute-force oracle: dense trapezoid on the operator correlators
    taus = np.linspace(0, 40, 400_001)
    for p, br in stable_draws(rng, 3):
        f = build_model(br, p)
        ch = operator_correlators(f, taus)
        b0 = br.beta0
        dB = b0.conjugate() ** 2 * ch["bb"] + abs(b0) ** 2 * (ch["b_bdag"] + ch["bdag_b"]) + b0**2 * ch["bdag_bdag"]
        ref = trapezoid(dB, taus)
        assert integrated_dB(f) == pytest.approx(ref, rel=1e-6, abs=1e-9)


def test_finite_window_integral_converges(rng):
    p, br = stable_draws(rng, 1)[0]
    f = build_model(br, p)
    full = integrated_dB(f)
    assert integrated_dB(f, t_max=60.0) == pytest.approx(full, rel=1e-9)
    assert abs(integrated_dB(f, t_max=0.0)) == 0


def test_theta_conventions():
    p = AncillaParams.from_kappa(1.0, delta_omega=0.7, lambda11=0.2, epsilon=0.9, N1=0.1)
    br = operating_branch(p)
    derived = effective_coefficients(br, None, p, C, lambda00=0.5).theta
    real = effective_coefficients(br, None, p, C, lambda00=0.5, theta_convention="printed_real").theta
    lit = effective_coefficients(br, None, p, C, lambda00=0.5, theta_convention="printed_literal").theta
    assert derived - 0.5 == pytest.approx(-(real - 0.5), rel=1e-14)
    assert isinstance(lit, complex) and lit.imag != 0
    with pytest.raises(ValueError):
        effective_coefficients(br, None, p, C, theta_convention="nope")


def test_theta_sign_follows_correlator_integral():
    p = AncillaParams.from_kappa(1.0, delta_omega=1.2, lambda11=0.1, epsilon=1.0)
    br = operating_branch(p)
    f = build_model(br, p)
    ic = coefficients_from_integrals(f, br, p, C)
    co = effective_coefficients(br, f, p, C)
    assert co.theta < 0 and ic.theta_minus_lambda00 == pytest.approx(co.theta, rel=1e-8)


def test_ratio_linear_lorentzian_squared():
    grid = np.linspace(-3, 3, 61)
    rows = gamma_ratio_sweep(AncillaParams(), grid, [(1.0, 0.0)])
    got = np.array([r.ratio for r in rows])
    np.testing.assert_allclose(got, (1 + grid**2) ** -2, rtol=1e-12)
    at = {round(r.delta_omega, 9): r.ratio for r in rows}
    assert at[1.0] == pytest.approx(0.25, rel=1e-12)
    assert at[-1.0] == pytest.approx(0.25, rel=1e-12)
    assert at[0.0] == 1.0


@settings(max_examples=50, deadline=None)
@given(
    dw=st.floats(-3, 3),
    lam=st.floats(0, 0.5),
    eps=st.floats(0.05, 2.0),
)
def test_ratio_is_kappa4_over_lambda4(dw, lam, eps):
    p = AncillaParams.from_kappa(1.0, delta_omega=dw, lambda11=lam, epsilon=eps)
    try:
        co = coefficients_for(p, C)
    except UnstableBranchError:
        return
    br = operating_branch(p)
    assert co.ratio == pytest.approx(1.0 / br.Lambda_sq**2, rel=1e-10)
    assert co.gamma == pytest.approx(co.ratio * gamma_zero(p, C), rel=1e-10)


def test_gamma_scales_with_coupling_squared(rng):
    for p, br in stable_draws(rng, 20):
        g1 = effective_coefficients(br, None, p, CouplingParams(0.01)).gamma
        g3 = effective_coefficients(br, None, p, CouplingParams(-0.03)).gamma
        assert g3 == pytest.approx(9 * g1, rel=1e-12)


def test_unstable_branch_rejected():
    p = AncillaParams.from_kappa(1.0, delta_omega=-3.0, lambda11=0.5, epsilon=1.7)
    middle = solve_steady_state(p)[1]
    with pytest.raises(UnstableBranchError):
        effective_coefficients(middle, None, p, C)


def test_figure_of_merit():
    rep = qnd_figure_of_merit(1.5e4, 1.2e6)
    assert rep.gamma_over_nu == 0.0125
    assert round(rep.gamma_over_nu, 3) == 0.013
    assert not rep.verdict
    assert qnd_figure_of_merit(2.0, 1.0).verdict
    with pytest.raises(ValueError):
        qnd_figure_of_merit(1.0, 0.0)
    assert math.isfinite(qnd_figure_of_merit(0.0, 1.0).gamma_over_nu)
