"""Steady-state homodyne readout of the ancilla.

With the system's phonon number n treated as frozen, the coupling
lambda01 n b^dag b shifts the ancilla detuning.  To first order the
fluctuation amplitudes settle at (b1, b1^dag) = A^{-1} s n with source
s = (-i lambda01 beta0, +i lambda01 alpha0), and the readout quadrature
sqrt(2 mu) <e^{-i theta} b + e^{i theta} b^dag> moves linearly with n.

The reported ``gain`` uses the quadrature locked to the mean field,
e^{-i theta} = -beta0^* / beta0, for which the response is real and equals
-sqrt(2 mu) 2 eps lambda01 / Lambda^2.  The fixed quadrature b + b^dag sees
the same response reduced by (kappa^2 - s^2)/(kappa^2 + s^2), with
s = dw + l11 + 2 l11 n0; both agree at zero effective detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .effective import effective_coefficients
from .params import AncillaParams, CouplingParams, SystemParams
from .steady_state import SteadyStateBranch, UnstableBranchError, drift_matrix

_CHECK_RTOL = 1e-10


@dataclass(frozen=True)
class SignalModel:
    gain: float
    sqrt_gamma_factor: float
    gamma: float
    gain_fixed_quadrature: float
    background: float
    background_fixed_quadrature: float
    quadrature_phase: complex


@dataclass(frozen=True)
class Distinguishability:
    localization_time: float
    dwell_time: float
    gamma_over_nu: float


def locked_quadrature_phase(branch: SteadyStateBranch) -> complex:
    """e^{-i theta} = -beta0^*/beta0 (1 when the mean field vanishes)."""
    b0 = branch.beta0
    if b0 == 0:
        return 1.0 + 0j
    return complex(-b0.conjugate() / b0)


def fluctuation_response(branch: SteadyStateBranch, p: AncillaParams, c: CouplingParams) -> np.ndarray:
    """(<b1>, <b1^dag>) per system phonon, from A x = s."""
    A = drift_matrix(branch, p)
    if abs(branch.Lambda_sq) < 1e-300 or not branch.stable:
        raise UnstableBranchError("drift matrix is singular or the branch is unstable")
    src = np.array([-1j * c.lambda01 * branch.beta0, 1j * c.lambda01 * branch.alpha0])
    return np.linalg.solve(A, src)


def gain_closed_form(branch: SteadyStateBranch, p: AncillaParams, c: CouplingParams) -> float:
    return -math.sqrt(2 * p.mu) * 2 * p.epsilon * c.lambda01 / branch.Lambda_sq


def sqrt_gamma_factor(p: AncillaParams) -> float:
    return -math.sqrt(8 * p.mu / (p.kappa * (2 * p.N1 + 1)))


def signal_gain(branch: SteadyStateBranch, p: AncillaParams, c: CouplingParams) -> SignalModel:
    """Readout gain by explicit inversion of the drift matrix.

    The inversion result is checked against the closed form; a mismatch
    beyond 1e-10 relative raises ``ArithmeticError``.
    """
    if not p.mu > 0:
        raise ValueError("the measurement damping must be positive")
    x = fluctuation_response(branch, p, c)
    phase = locked_quadrature_phase(branch)
    root = math.sqrt(2 * p.mu)
    gain = root * 2 * (phase * x[0]).real
    fixed = root * (x[0] + x[1]).real
    closed = gain_closed_form(branch, p, c)
    if abs(gain - closed) > _CHECK_RTOL * max(abs(closed), 1e-300):
        raise ArithmeticError(f"inverse-drift gain {gain!r} disagrees with closed form {closed!r}")
    coeffs = effective_coefficients(branch, None, p, c)
    b0 = branch.beta0
    return SignalModel(
        gain=float(gain),
        sqrt_gamma_factor=sqrt_gamma_factor(p),
        gamma=coeffs.gamma,
        gain_fixed_quadrature=float(fixed),
        background=float(root * 2 * (phase * b0).real),
        background_fixed_quadrature=float(root * 2 * b0.real),
        quadrature_phase=phase,
    )


def mean_current(signal: SignalModel, n_phonons: float, fixed_quadrature: bool = False) -> tuple[float, float]:
    """(background, signal) parts of the mean readout quadrature."""
    if n_phonons < 0:
        raise ValueError("n_phonons must be non-negative")
    if fixed_quadrature:
        return signal.background_fixed_quadrature, signal.gain_fixed_quadrature * n_phonons
    return signal.background, signal.gain * n_phonons


def distinguishability_time(signal: SignalModel | float, nu: float | SystemParams) -> Distinguishability:
    """Localization time 1/Gamma next to the dwell time 1/nu."""
    gamma = signal.gamma if isinstance(signal, SignalModel) else float(signal)
    nu = nu.nu if isinstance(nu, SystemParams) else float(nu)
    if not gamma > 0:
        raise ValueError("Gamma is zero: the readout carries no number information")
    if not nu > 0:
        raise ValueError("nu must be positive")
    return Distinguishability(localization_time=1 / gamma, dwell_time=1 / nu, gamma_over_nu=gamma / nu)
