"""Linearized fluctuations of the ancilla about a mean-field branch.

In the positive-P picture the fluctuation amplitudes x = (beta1, alpha1)
obey dx = -A x dt + D^(1/2) dW.  Everything here follows from A, D and the
stationary covariance C(t, t):

* the propagator M(tau) = exp(-A tau), evaluated in closed form;
* c-number two-time correlators C(t + tau, t) = M(tau) C(t, t);
* operator two-time correlators, obtained from the normally ordered
  c-number ones by adding the commutator carried by M.

Two independent routes to the two-time correlators are exposed on purpose:
:func:`c_number_correlators` (matrix product) and
:func:`appendix_correlators` (explicit sums of exponentials).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .params import AncillaParams
from .steady_state import SteadyStateBranch, UnstableBranchError, drift_matrix

CHANNELS = ("bb", "b_bdag", "bdag_b", "bdag_bdag")
ORDERS = ("later_left", "later_right")

# |Lambda1 tau| below this switches sin(x)/x and the confluent forms to series
_SERIES_CUTOFF = 1e-3


@dataclass(frozen=True, eq=False)
class FluctuationModel:
    branch: SteadyStateBranch
    params: AncillaParams
    A: np.ndarray
    D: np.ndarray
    c: float
    Lambda1: complex
    lambda_plus: complex
    lambda_minus: complex
    one_time: np.ndarray

    @property
    def kappa(self) -> float:
        return self.params.kappa

    @property
    def stable(self) -> bool:
        return self.branch.stable


def diffusion_matrix(branch: SteadyStateBranch, p: AncillaParams) -> np.ndarray:
    lam = p.lambda11
    b0, a0 = branch.beta0, branch.alpha0
    off = 2.0 * p.kappa * p.N1
    return np.array([[-2j * lam * b0 * b0, off], [off, 2j * lam * a0 * a0]])


def one_time_correlations(branch: SteadyStateBranch, p: AncillaParams) -> np.ndarray:
    """Stationary c-number covariance [[<b1^2>, <b1 a1>], [<a1 b1>, <a1^2>]]."""
    lam, kappa, N1 = p.lambda11, p.kappa, p.N1
    n0 = branch.n0
    b0, a0 = branch.beta0, branch.alpha0
    c = p.delta_omega + lam + 4.0 * lam * n0
    z = complex(kappa, c)
    off = (N1 * abs(z) ** 2 + 2.0 * (lam * n0) ** 2) / branch.Lambda_sq
    bb = -1j * lam * b0 * b0 * z.conjugate() * (2 * N1 + 1) / branch.Lambda_sq
    aa = 1j * lam * a0 * a0 * z * (2 * N1 + 1) / branch.Lambda_sq
    return np.array([[bb, off], [off, aa]])


def build_model(branch: SteadyStateBranch, p: AncillaParams) -> FluctuationModel:
    A = drift_matrix(branch, p)
    D = diffusion_matrix(branch, p)
    c = p.delta_omega + p.lambda11 + 4.0 * p.lambda11 * branch.n0
    Lambda1 = cmath.sqrt(branch.Lambda1_sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        one_time = one_time_correlations(branch, p)
    return FluctuationModel(
        branch=branch,
        params=p,
        A=A,
        D=D,
        c=c,
        Lambda1=Lambda1,
        lambda_plus=p.kappa + 1j * Lambda1,
        lambda_minus=p.kappa - 1j * Lambda1,
        one_time=one_time,
    )


def _check_tau(tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative; use the reversed-order correlators for t < t'")
    return tau


def _cos_and_sinc(Lambda1: complex, tau: np.ndarray):
    """cos(Lambda1 tau) and sin(Lambda1 tau)/Lambda1, stable as Lambda1 -> 0."""
    x = Lambda1 * tau
    x2 = x * x
    small = np.abs(x) < _SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(small, 1 - x2 / 2 + x2 * x2 / 24, np.cos(x))
        sinc = np.where(
            small,
            tau * (1 - x2 / 6 + x2 * x2 / 120),
            np.sin(x) / np.where(Lambda1 == 0, 1.0, Lambda1),
        )
    return cos, sinc


def propagator(model: FluctuationModel, tau) -> np.ndarray:
    """M(tau) = exp(-A tau) for tau >= 0; shape (..., 2, 2).

    (A - kappa I)^2 = -Lambda1^2 I, so the exponential reduces to
    exp(-kappa tau) [cos(Lambda1 tau) I - sin(Lambda1 tau)/Lambda1 (A - kappa I)].
    This is the eigen-decomposition form written without dividing by
    Lambda1, which also covers the confluent case Lambda1 = 0.
    """
    tau = _check_tau(tau)
    cos, sinc = _cos_and_sinc(model.Lambda1, tau)
    env = np.exp(-model.kappa * tau)
    N = model.A - model.kappa * np.eye(2)
    M = np.empty(tau.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = env * (cos - sinc * N[0, 0])
    M[..., 0, 1] = env * (-sinc * N[0, 1])
    M[..., 1, 0] = env * (-sinc * N[1, 0])
    M[..., 1, 1] = env * (cos - sinc * N[1, 1])
    return M


def _require_stable(model: FluctuationModel) -> None:
    if not model.stable:
        raise UnstableBranchError(
            "steady-state correlators are undefined on an unstable branch "
            f"(Lambda^2 = {model.branch.Lambda_sq:.6g})"
        )


def c_number_correlators(model: FluctuationModel, tau) -> np.ndarray:
    """C(t + tau, t) = M(tau) C(t, t): [[<b1 b1>, <b1 a1>], [<a1 b1>, <a1 a1>]].

    The first factor of each entry is taken at the later time t + tau.
    """
    _require_stable(model)
    return propagator(model, tau) @ model.one_time


def c_number_correlators_reversed(model: FluctuationModel, tau) -> np.ndarray:
    """C(t, t + tau) = C(t, t) M(tau)^T, the first factor at the earlier time."""
    _require_stable(model)
    M = propagator(model, tau)
    return model.one_time @ np.swapaxes(M, -1, -2)


def appendix_correlators(model: FluctuationModel, tau) -> np.ndarray:
    """Two-time c-number correlators written out as sums of exponentials.

    Independent of :func:`c_number_correlators`: uses exp(-lambda_pm tau)
    directly, with the explicit confluent limit when Lambda1 is tiny.
    """
    _require_stable(model)
    tau = _check_tau(tau)
    p, br = model.params, model.branch
    lam, c, Lam1 = p.lambda11, model.c, model.Lambda1
    b0, a0 = br.beta0, br.alpha0
    C0 = model.one_time
    bb, ba, aa = C0[0, 0], C0[0, 1], C0[1, 1]

    if abs(Lam1) * max(float(np.max(tau, initial=0.0)), 1.0 / model.kappa) < 1e-9:
        env = np.exp(-model.kappa * tau)
        same_p = env * (1 - 1j * c * tau)  # coefficient pair (Lambda1 + c, Lambda1 - c)
        same_m = env * (1 + 1j * c * tau)
        diff = env * (-2j) * tau  # (e+ - e-) / Lambda1
    else:
        ep = np.exp(-model.lambda_plus * tau)
        em = np.exp(-model.lambda_minus * tau)
        same_p = ((Lam1 + c) * ep + (Lam1 - c) * em) / (2 * Lam1)
        same_m = ((Lam1 - c) * ep + (Lam1 + c) * em) / (2 * Lam1)
        diff = (ep - em) / Lam1

    out = np.empty(np.shape(tau) + (2, 2), dtype=complex)
    out[..., 0, 0] = same_p * bb + lam * b0 * b0 * diff * ba  # <b1(t) b1(t')>
    out[..., 0, 1] = same_p * ba + lam * b0 * b0 * diff * aa  # <b1(t) a1(t')>
    out[..., 1, 0] = -lam * a0 * a0 * diff * bb + same_m * ba  # <a1(t) b1(t')>
    out[..., 1, 1] = -lam * a0 * a0 * diff * ba + same_m * aa  # <a1(t) a1(t')>
    return out


def operator_correlators(model: FluctuationModel, tau, order: str = "later_left") -> dict:
    """Operator two-time correlators of the fluctuations b1, b1^dagger.

    Channel ``"b_bdag"`` with ``order="later_left"`` is <b1(t+tau) b1^dag(t)>;
    with ``order="later_right"`` it is <b1(t) b1^dag(t+tau)>.  Normally ordered
    products equal the c-number correlators; the others pick up an element
    of M from the commutator [b1(t+tau), b1^dag(t)] = M11(tau).
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    C = c_number_correlators(model, tau)
    M = propagator(model, tau)
    if order == "later_left":
        return {
            "bb": C[..., 0, 0],
            "b_bdag": C[..., 0, 1] + M[..., 0, 0],
            "bdag_b": C[..., 1, 0],
            "bdag_bdag": C[..., 1, 1] + M[..., 1, 0],
        }
    return {
        "bb": C[..., 0, 0] + M[..., 0, 1],
        "b_bdag": C[..., 1, 0] + M[..., 1, 1],
        "bdag_b": C[..., 0, 1],
        "bdag_bdag": C[..., 1, 1],
    }
