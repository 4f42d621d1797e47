import math

import numpy as np
import pytest

from phononqnd.effective import coefficients_for
from phononqnd.measurement import (
    distinguishability_time,
    fluctuation_response,
    locked_quadrature_phase,
    mean_current,
    signal_gain,
)
from phononqnd.params import AncillaParams, CouplingParams, SystemParams
from phononqnd.steady_state import UnstableBranchError, operating_branch, solve_steady_state

from conftest import stable_draws


def test_gain_equals_root_gamma_identity(rng):
    for p, br in stable_draws(rng, 1000):
        c = CouplingParams(rng.uniform(1e-4, 0.1))
        s = signal_gain(br, p, c)
        assert s.gain == pytest.approx(s.sqrt_gamma_factor * math.sqrt(s.gamma), rel=1e-12)


def test_negative_coupling_flips_gain_not_gamma(rng):
    for p, br in stable_draws(rng, 200):
        up = signal_gain(br, p, CouplingParams(0.02))
        down = signal_gain(br, p, CouplingParams(-0.02))
        assert down.gain == pytest.approx(-up.gain, rel=1e-12)
        assert down.gamma == pytest.approx(up.gamma, rel=1e-12)
        assert down.gain**2 == pytest.approx(8 * p.mu / (p.kappa * (2 * p.N1 + 1)) * down.gamma, rel=1e-12)


def test_response_matches_finite_difference_of_mean_field(rng):
    # a frozen system number n shifts the ancilla detuning by lambda01 n
    c = CouplingParams(0.02)
    h = 1e-5
    checked = 0
    for p, br in stable_draws(rng, 60, max_lambda=0.1):
        if len(solve_steady_state(p)) != 1:
            continue
        plus = operating_branch(p.replace(delta_omega=p.delta_omega + c.lambda01 * h))
        minus = operating_branch(p.replace(delta_omega=p.delta_omega - c.lambda01 * h))
        fd = (plus.beta0 - minus.beta0) / (2 * h)
        x = fluctuation_response(br, p, c)
        assert x[0] == pytest.approx(fd, rel=1e-6, abs=1e-12)
        assert x[1] == pytest.approx(np.conj(fd), rel=1e-6, abs=1e-12)
        checked += 1
    assert checked > 20


def test_resonant_linear_gain():
    p = AncillaParams.from_kappa(1.0, epsilon=0.9, N1=0.2)
    c = CouplingParams(0.03)
    s = signal_gain(operating_branch(p), p, c)
    assert s.gain == pytest.approx(-math.sqrt(2 * p.mu) * 2 * 0.9 * 0.03, rel=1e-14)
    assert s.gain_fixed_quadrature == pytest.approx(s.gain, rel=1e-12)


def test_fixed_quadrature_reduction(rng):
    for p, br in stable_draws(rng, 200):
        s = signal_gain(br, p, CouplingParams(0.01))
        shift = p.delta_omega + p.lambda11 + 2 * p.lambda11 * br.n0
        k2 = p.kappa**2
        assert s.gain_fixed_quadrature == pytest.approx(s.gain * (k2 - shift**2) / (k2 + shift**2), rel=1e-9, abs=1e-15)


def test_locked_phase_puts_response_on_the_real_axis(rng):
    for p, br in stable_draws(rng, 100):
        ph = locked_quadrature_phase(br)
        x = fluctuation_response(br, p, CouplingParams(0.02))
        assert abs(ph) == pytest.approx(1.0, rel=1e-14)
        assert abs((ph * x[0]).imag) <= 1e-12 * abs(x[0])
        assert (ph * x[0]).real <= 0
    p = AncillaParams.from_kappa(1.0, delta_omega=0.6, lambda11=0.1, epsilon=1.0)
    assert locked_quadrature_phase(operating_branch(p.replace(epsilon=0.0))) == 1


def test_uncoupled_readout_has_no_signal():
    p = AncillaParams.from_kappa(1.0, delta_omega=0.4, epsilon=1.0)
    s = signal_gain(operating_branch(p), p, CouplingParams(0.0))
    assert s.gain == 0 and s.gamma == 0
    with pytest.raises(ValueError):
        distinguishability_time(s, 1e-3)


def test_mean_current_separates_adjacent_numbers():
    p = AncillaParams.from_kappa(1.0, delta_omega=0.5, lambda11=0.005, epsilon=2.0, N1=0.1)
    s = signal_gain(operating_branch(p), p, CouplingParams(0.02))
    for n in range(4):
        bg, sig = mean_current(s, n)
        bg1, sig1 = mean_current(s, n + 1)
        assert bg == bg1 and (sig1 - sig) == pytest.approx(s.gain, rel=1e-14)
    assert mean_current(s, 2, fixed_quadrature=True)[1] == pytest.approx(2 * s.gain_fixed_quadrature)
    with pytest.raises(ValueError):
        mean_current(s, -1)


def test_gamma_quadratic_in_drive():
    base = AncillaParams.from_kappa(1.0, delta_omega=0.3, epsilon=0.5, N1=0.4)
    c = CouplingParams(0.02)
    g1 = coefficients_for(base, c).gamma
    g2 = coefficients_for(base.replace(epsilon=1.0), c).gamma
    assert g2 == pytest.approx(4 * g1, rel=1e-12)


def test_distinguishability_example():
    d = distinguishability_time(1.5e4, SystemParams(nu=1.2e6))
    assert d.localization_time == pytest.approx(1 / 1.5e4)
    assert d.localization_time == pytest.approx(6.7e-5, rel=0.01)
    assert d.gamma_over_nu == 0.0125
    with pytest.raises(ValueError):
        distinguishability_time(1.0, 0.0)


def test_guards():
    p = AncillaParams.from_kappa(1.0, delta_omega=-3.0, lambda11=0.5, epsilon=1.7)
    with pytest.raises(UnstableBranchError):
        signal_gain(solve_steady_state(p)[1], p, CouplingParams(0.01))
    q = AncillaParams.from_kappa(1.0, epsilon=1.0).replace(damping_thermal=1.0, damping_measurement=0.0)
    with pytest.raises(ValueError):
        signal_gain(operating_branch(q), q, CouplingParams(0.01))
