"""Reduced master-equation coefficients for the measured oscillator.

Adiabatically eliminating the ancilla leaves

    d rho/dt = -i (omega0 + Delta) [n, rho] - i Theta [n^2, rho]
               - Gamma [n, [n, rho]] + thermal damping,      n = a^dag a

Delta comes from the first-order term lambda01 <b^dag b>.  Gamma and
Theta - lambda00 are the real and imaginary parts of
lambda01^2 * integral_0^inf <dB(t + tau) dB(t)> dtau with
dB = beta0^* b1 + beta0 b1^dag.  :func:`effective_coefficients` evaluates
the closed forms; :func:`coefficients_from_integrals` rebuilds the same
numbers from the two-time correlators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .fluctuations import FluctuationModel, build_model, operator_correlators
from .params import AncillaParams, CouplingParams, SystemParams
from .steady_state import SteadyStateBranch, UnstableBranchError, solve_steady_state

THETA_CONVENTIONS = ("derived", "printed_real", "printed_literal")


@dataclass(frozen=True)
class EffectiveCoefficients:
    delta: float
    theta: complex | float
    gamma: float
    gamma0: float
    ratio: float
    gamma_bracketed: float


@dataclass(frozen=True)
class MeasurabilityReport:
    gamma_over_nu: float
    threshold: float
    verdict: bool


def gamma_zero(p: AncillaParams, c: CouplingParams) -> float:
    """Gamma at zero detuning and zero self-Kerr for the same drive and bath."""
    return c.lambda01**2 * p.epsilon**2 * (2 * p.N1 + 1) / p.kappa**3


def effective_coefficients(
    branch: SteadyStateBranch,
    fluct: FluctuationModel | None,
    p: AncillaParams,
    c: CouplingParams,
    lambda00: float = 0.0,
    theta_convention: str = "derived",
) -> EffectiveCoefficients:
    """Closed-form Delta, Theta, Gamma on a stable branch.

    ``theta_convention="derived"`` gives
    Theta = lambda00 - lambda01^2 n0 (dw + l11 + 2 l11 n0) / Lambda^2, whose sign
    agrees with the correlator integral.  ``"printed_real"`` flips that sign
    and ``"printed_literal"`` additionally replaces l11 by i*l11 in the
    bracket; both exist only for comparison with the published expression.
    """
    if not branch.stable:
        raise UnstableBranchError("effective coefficients need a stable branch")
    if theta_convention not in THETA_CONVENTIONS:
        raise ValueError(f"theta_convention must be one of {THETA_CONVENTIONS}")
    kappa, lam, N1, l01 = p.kappa, p.lambda11, p.N1, c.lambda01
    n0, Lsq = branch.n0, branch.Lambda_sq
    dw = p.delta_omega
    cc = dw + lam + 4 * lam * n0
    zsq = kappa**2 + cc**2

    delta = l01 * (n0 + (N1 * zsq + 2 * (lam * n0) ** 2) / Lsq)

    shift = dw + lam + 2 * lam * n0
    if theta_convention == "derived":
        theta = lambda00 - l01**2 * n0 * shift / Lsq
    elif theta_convention == "printed_real":
        theta = lambda00 + l01**2 * n0 * shift / Lsq
    else:
        theta = lambda00 + l01**2 * n0 * (dw + 1j * lam + 2 * lam * n0) / Lsq

    gamma = l01**2 * kappa * p.epsilon**2 * (2 * N1 + 1) / Lsq**2
    bracket = zsq - 4 * lam * n0 * (dw + lam + 3 * lam * n0)
    gamma_bracketed = l01**2 / Lsq**2 * kappa * n0 * (2 * N1 + 1) * bracket

    g0 = gamma_zero(p, c)
    ratio = gamma / g0 if g0 != 0 else kappa**4 / Lsq**2
    return EffectiveCoefficients(
        delta=float(delta),
        theta=theta,
        gamma=float(gamma),
        gamma0=float(g0),
        ratio=float(ratio),
        gamma_bracketed=float(gamma_bracketed),
    )


def coefficients_for(
    p: AncillaParams,
    c: CouplingParams,
    lambda00: float = 0.0,
    branch: str | int = "operating",
    theta_convention: str = "derived",
) -> EffectiveCoefficients:
    """Convenience wrapper: solve the steady state and evaluate the closed forms."""
    br = solve_steady_state(p).branch(branch)
    return effective_coefficients(br, None, p, c, lambda00, theta_convention)


@dataclass(frozen=True)
class GammaRatioRow:
    delta_omega: float
    epsilon: float
    lambda11: float
    n0: float
    Lambda_sq: float
    ratio: float
    stable: bool
    n_branches: int


def gamma_ratio_sweep(
    p_base: AncillaParams,
    detuning_grid: Sequence[float],
    variants: Iterable[tuple[float, float]],
    branch: str | int = "operating",
) -> list[GammaRatioRow]:
    """Gamma/Gamma0 = kappa^4/Lambda^4 over detuning for several (epsilon, lambda11).

    Rows are ordered variant-major, detuning-minor.  Points without a stable
    branch are kept with ``stable=False``.
    """
    rows = []
    kappa = p_base.kappa
    for eps, lam in variants:
        for dw in detuning_grid:
            p = p_base.replace(delta_omega=float(dw), epsilon=float(eps), lambda11=float(lam))
            sol = solve_steady_state(p)
            try:
                br = sol.branch(branch)
            except UnstableBranchError:
                br = sol.branches[0]
            rows.append(
                GammaRatioRow(
                    delta_omega=float(dw),
                    epsilon=float(eps),
                    lambda11=float(lam),
                    n0=br.n0,
                    Lambda_sq=br.Lambda_sq,
                    ratio=kappa**4 / br.Lambda_sq**2 if br.Lambda_sq != 0 else math.inf,
                    stable=br.stable,
                    n_branches=len(sol),
                )
            )
    return rows


def _dB_correlator(fluct: FluctuationModel, tau) -> np.ndarray:
    """<dB(t + tau) dB(t)> with dB = beta0^* b1 + beta0 b1^dag."""
    b0 = fluct.branch.beta0
    n0 = abs(b0) ** 2
    ch = operator_correlators(fluct, tau, "later_left")
    return b0.conjugate() ** 2 * ch["bb"] + n0 * (ch["b_bdag"] + ch["bdag_b"]) + b0**2 * ch["bdag_bdag"]


def _exponential_weights(fluct: FluctuationModel) -> tuple[complex, complex]:
    """Weights (g+, g-) with <dB(t+tau) dB(t)> = g+ e^{-lambda+ tau} + g- e^{-lambda- tau}."""
    p, br = fluct.params, fluct.branch
    lam, c, L1 = p.lambda11, fluct.c, fluct.Lambda1
    b0, a0 = br.beta0, br.alpha0
    C0 = fluct.one_time
    bb, ba, aa = C0[0, 0], C0[0, 1], C0[1, 1]
    # per-entry (coef of e+, coef of e-) for M11, M12, M21, M22
    M11 = ((L1 + c) / (2 * L1), (L1 - c) / (2 * L1))
    M22 = ((L1 - c) / (2 * L1), (L1 + c) / (2 * L1))
    M12 = (lam * b0 * b0 / L1, -lam * b0 * b0 / L1)
    M21 = (-lam * a0 * a0 / L1, lam * a0 * a0 / L1)
    weights = []
    for k in range(2):
        c_bb = M11[k] * bb + M12[k] * ba
        c_ba = M11[k] * ba + M12[k] * aa
        c_ab = M21[k] * bb + M22[k] * ba
        c_aa = M21[k] * ba + M22[k] * aa
        op_bb = c_bb
        op_b_bdag = c_ba + M11[k]
        op_bdag_b = c_ab
        op_bdag_bdag = c_aa + M21[k]
        weights.append(
            b0.conjugate() ** 2 * op_bb + abs(b0) ** 2 * (op_b_bdag + op_bdag_b) + b0**2 * op_bdag_bdag
        )
    return weights[0], weights[1]


def integrated_dB(fluct: FluctuationModel, t_max: float | None = None, method: str = "analytic") -> complex:
    """integral_0^t_max <dB(t + tau) dB(t)> dtau (t_max=None means infinity).

    ``method="analytic"`` integrates the two exponentials term by term and
    falls back to adaptive quadrature when the eigenvalues coincide;
    ``method="quadrature"`` always uses adaptive quadrature.
    """
    if not fluct.stable:
        raise UnstableBranchError("the correlator integral diverges on an unstable branch")
    kappa = fluct.kappa
    confluent = abs(fluct.Lambda1) < 1e-6 * kappa
    if method == "analytic" and not confluent:
        gp, gm = _exponential_weights(fluct)
        total = 0j
        for g, lam in ((gp, fluct.lambda_plus), (gm, fluct.lambda_minus)):
            tail = 0.0 if t_max is None else np.exp(-lam * t_max)
            total += g * (1 - tail) / lam
        return complex(total)
    if method not in ("analytic", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    upper = t_max if t_max is not None else 60.0 / min(fluct.lambda_plus.real, fluct.lambda_minus.real)

    def part(tau, fn):
        return fn(complex(_dB_correlator(fluct, tau)))

    # absolute floor on the scale of the integral; a vanishing part cannot meet epsrel
    floor = 1e-14 * abs(complex(_dB_correlator(fluct, 0.0))) / kappa
    opts = dict(epsabs=floor, epsrel=1e-12, limit=400)
    re, _ = integrate.quad(part, 0.0, upper, args=(lambda z: z.real,), **opts)
    im, _ = integrate.quad(part, 0.0, upper, args=(lambda z: z.imag,), **opts)
    return complex(re, im)


@dataclass(frozen=True)
class IntegralCoefficients:
    delta: float
    theta_minus_lambda00: float
    gamma: float


def coefficients_from_integrals(
    fluct: FluctuationModel,
    branch: SteadyStateBranch,
    p: AncillaParams,
    c: CouplingParams,
    t_max: float | None = None,
    method: str = "analytic",
) -> IntegralCoefficients:
    """Rebuild Delta, Theta - lambda00 and Gamma from the two-time correlators."""
    if not branch.stable:
        raise UnstableBranchError("the correlator integral diverges on an unstable branch")
    I = integrated_dB(fluct, t_max, method)
    nb = operator_correlators(fluct, 0.0)["bdag_b"]
    l01 = c.lambda01
    return IntegralCoefficients(
        delta=float(l01 * (branch.n0 + complex(nb).real)),
        theta_minus_lambda00=float(l01**2 * I.imag),
        gamma=float(l01**2 * I.real),
    )


def qnd_figure_of_merit(
    gamma: float | EffectiveCoefficients,
    sys: float | SystemParams,
    threshold: float = 1.0,
) -> MeasurabilityReport:
    """Gamma/nu and whether number states are resolved before a thermal jump."""
    g = gamma.gamma if isinstance(gamma, EffectiveCoefficients) else float(gamma)
    nu = sys.nu if isinstance(sys, SystemParams) else float(sys)
    if not nu > 0:
        raise ValueError("nu must be positive")
    ratio = g / nu
    return MeasurabilityReport(gamma_over_nu=ratio, threshold=threshold, verdict=ratio > threshold)


def model_for(p: AncillaParams, branch: str | int = "operating") -> tuple[SteadyStateBranch, FluctuationModel]:
    br = solve_steady_state(p).branch(branch)
    return br, build_model(br, p)
