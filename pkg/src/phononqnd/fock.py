"""Brute-force Lindblad oracle in a truncated Fock space.

Dissipators use the convention D[O] rho = 2 O rho O^dag - {O^dag O, rho},
so a rate kappa in front of D[b] damps the amplitude at kappa and the
population at 2 kappa.  Density matrices are vectorized column-major
(vec(X) stacks columns), which gives vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .params import AncillaParams, ModelParams
from .steady_state import solve_steady_state


class TruncationError(RuntimeError):
    """The state leaks into the top of the truncated Fock space."""


class IntegrationError(RuntimeError):
    """The adaptive integrator failed (typically step-size underflow)."""


class ConvergenceError(RuntimeError):
    """The steady state was not reached within the allotted time."""


def destroy(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, shape=(dim, dim), format="csr").astype(complex)


def number(dim: int) -> sp.csr_matrix:
    return sp.diags(np.arange(dim, dtype=float), 0, format="csr").astype(complex)


def thermal_state(dim: int, N: float) -> np.ndarray:
    if N == 0:
        pops = np.zeros(dim)
        pops[0] = 1.0
    else:
        pops = (N / (N + 1.0)) ** np.arange(dim) / (N + 1.0)
    return np.diag(pops / pops.sum()).astype(complex)


def coherent_state(dim: int, beta: complex) -> np.ndarray:
    n = np.arange(dim)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    amp = np.exp(-abs(beta) ** 2 / 2 - 0.5 * logfact) * np.power(complex(beta), n)
    amp /= np.linalg.norm(amp)
    return np.outer(amp, amp.conj())


def fock_state(dim: int, n: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def recommended_dim(n0: float, N1: float) -> int:
    """Truncation that covers a displaced thermal state with a wide margin."""
    return int(math.ceil(n0 + 8.0 * math.sqrt(n0 + N1 + 1.0))) + 4


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expect(self, op) -> complex:
        return complex(np.sum(op.T.multiply(self.entries)) if sp.issparse(op) else np.trace(op @ self.entries))

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def tail_population(self, fraction: float = 0.1) -> float:
        k = max(1, int(math.ceil(fraction * self.dim)))
        return float(np.sum(np.real(np.diag(self.entries))[-k:]))


@dataclass(eq=False)
class LindbladGenerator:
    """d rho/dt = -i[H, rho] + sum_k rate_k D[O_k] rho."""

    H: sp.spmatrix
    dissipators: list[tuple[float, sp.spmatrix]]
    _L: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def superoperator(self) -> sp.csr_matrix:
        if self._L is None:
            d = self.dim
            eye = sp.identity(d, dtype=complex, format="csr")
            H = sp.csr_matrix(self.H)
            L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
            for rate, O in self.dissipators:
                if rate == 0:
                    continue
                O = sp.csr_matrix(O)
                OdO = (O.conj().T @ O).tocsr()
                L = L + rate * (
                    2 * sp.kron(O.conj(), O) - sp.kron(eye, OdO) - sp.kron(OdO.T, eye)
                )
            self._L = sp.csr_matrix(L)
        return self._L

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.superoperator() @ rho.reshape(-1, order="F")).reshape(d, d, order="F")


def ancilla_generator(p: AncillaParams, dim: int) -> LindbladGenerator:
    b = destroy(dim)
    n = number(dim)
    H = p.delta_omega * n + p.epsilon * (b + b.conj().T) + p.lambda11 * (n @ n)
    N1 = p.N1
    return LindbladGenerator(H=H, dissipators=[(p.kappa * (N1 + 1), b), (p.kappa * N1, b.conj().T)])


def joint_generator(params: ModelParams, sys_dim: int, anc_dim: int) -> LindbladGenerator:
    """Full two-oscillator generator on H_sys (x) H_anc (system index slow)."""
    s, p, c = params.system, params.ancilla, params.coupling
    Is = sp.identity(sys_dim, dtype=complex, format="csr")
    Ia = sp.identity(anc_dim, dtype=complex, format="csr")
    a, na = destroy(sys_dim), number(sys_dim)
    b, nb = destroy(anc_dim), number(anc_dim)
    H = (
        sp.kron(s.omega0 * na + s.lambda00 * (na @ na), Ia)
        + sp.kron(Is, p.delta_omega * nb + p.epsilon * (b + b.conj().T) + p.lambda11 * (nb @ nb))
        + c.lambda01 * sp.kron(na, nb)
    )
    N1 = p.N1
    diss = [
        (s.nu * (s.N0 + 1), sp.kron(a, Ia)),
        (s.nu * s.N0, sp.kron(a.conj().T, Ia)),
        (p.kappa * (N1 + 1), sp.kron(Is, b)),
        (p.kappa * N1, sp.kron(Is, b.conj().T)),
    ]
    return LindbladGenerator(H=sp.csr_matrix(H), dissipators=diss)


def sector_generator(params: ModelParams, n: int, m: int, anc_dim: int) -> LindbladGenerator:
    """Generator for the ancilla block <n| R |m> of the joint state when nu = 0.

    Without system damping the joint generator never mixes system number
    sectors, and block (n, m) evolves as
    dX/dt = -i(H_n X - X H_m) + kappa-dissipators, H_k the ancilla Hamiltonian
    seen with k system phonons.  Returned as a generator whose ``superoperator``
    implements that (non-Hermitian) map.
    """
    s, p, c = params.system, params.ancilla, params.coupling
    if s.nu != 0:
        raise ValueError("sector decomposition requires nu = 0")
    b, nb = destroy(anc_dim), number(anc_dim)
    base = p.delta_omega * nb + p.epsilon * (b + b.conj().T) + p.lambda11 * (nb @ nb)
    Ia = sp.identity(anc_dim, dtype=complex, format="csr")

    def h(k):
        return base + (s.omega0 * k + s.lambda00 * k * k) * Ia + c.lambda01 * k * nb

    gen = ancilla_generator(p, anc_dim)
    Hn, Hm = sp.csr_matrix(h(n)), sp.csr_matrix(h(m))
    L = -1j * (sp.kron(Ia, Hn) - sp.kron(Hm.T, Ia))
    N1 = p.N1
    for rate, O in ((p.kappa * (N1 + 1), b), (p.kappa * N1, b.conj().T)):
        if rate == 0:
            continue
        OdO = (O.conj().T @ O).tocsr()
        L = L + rate * (2 * sp.kron(O.conj(), O) - sp.kron(Ia, OdO) - sp.kron(OdO.T, Ia))
    gen._L = sp.csr_matrix(L)
    return gen


def _integrate(L: sp.csr_matrix, y0: np.ndarray, t_final: float, t_eval, rtol: float, atol: float):
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if t_final == 0:
        return np.array([0.0]), y0[:, None]
    sol = solve_ivp(
        lambda t, y: L @ y,
        (0.0, t_final),
        y0,
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}")
    return sol.t, sol.y


def _check_tail(rho: np.ndarray, tail_tol: float, label: str = "") -> None:
    dm = DensityMatrix(rho)
    tail = dm.tail_population()
    if tail > tail_tol:
        raise TruncationError(
            f"{label}population {tail:.3g} in the top 10% of Fock levels exceeds {tail_tol:.3g}; "
            f"increase the truncation (dim={dm.dim})"
        )


def evolve(
    rho0: np.ndarray | DensityMatrix,
    generator: LindbladGenerator,
    t_final: float,
    tol: float = 1e-10,
    tail_tol: float = 1e-8,
) -> DensityMatrix:
    """Integrate the master equation to ``t_final`` with an adaptive embedded pair.

    The trace is not renormalized; its drift is left visible for diagnostics.
    """
    rho0 = rho0.entries if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    d = generator.dim
    _, ys = _integrate(generator.superoperator(), rho0.reshape(-1, order="F"), t_final, None, tol, tol * 1e-3)
    rho = ys[:, -1].reshape(d, d, order="F")
    _check_tail(rho, tail_tol)
    return DensityMatrix(rho)


def evolve_series(
    rho0: np.ndarray,
    generator: LindbladGenerator,
    times: Sequence[float],
    tol: float = 1e-10,
) -> np.ndarray:
    """States at each of ``times`` (ascending, starting at or after 0); shape (T, d, d)."""
    times = np.asarray(times, dtype=float)
    d = generator.dim
    _, ys = _integrate(
        generator.superoperator(), np.asarray(rho0, dtype=complex).reshape(-1, order="F"),
        float(times[-1]), times, tol, tol * 1e-3,
    )
    return np.moveaxis(ys.reshape(d, d, -1, order="F"), -1, 0)


@dataclass(frozen=True)
class SteadyStateCertificate:
    residual: float
    time: float
    trace_error: float


def steady_state_oracle(
    generator: LindbladGenerator,
    tol: float = 1e-9,
    rho0: np.ndarray | None = None,
    chunk: float = 5.0,
    max_time: float = 400.0,
    tail_tol: float = 1e-8,
) -> tuple[DensityMatrix, SteadyStateCertificate]:
    """Integrate until max |d rho/dt| < tol and return the state with its certificate."""
    d = generator.dim
    L = generator.superoperator()
    rho = thermal_state(d, 0.0) if rho0 is None else np.asarray(rho0, dtype=complex)
    y = rho.reshape(-1, order="F")
    t = 0.0
    while True:
        resid = float(np.max(np.abs(L @ y)))
        if resid < tol:
            break
        if t >= max_time:
            raise ConvergenceError(f"steady state not reached by t={t:g} (residual {resid:.3g})")
        _, ys = _integrate(L, y, chunk, None, 1e-12, 1e-15)
        y = ys[:, -1]
        t += chunk
    rho = y.reshape(d, d, order="F")
    _check_tail(rho, tail_tol)
    cert = SteadyStateCertificate(residual=resid, time=t, trace_error=abs(np.trace(rho) - 1.0))
    return DensityMatrix(rho), cert


def ancilla_steady_state(p: AncillaParams, dim: int | None = None, tol: float = 1e-9, max_dim: int = 160, **kw):
    """Oracle steady state of the ancilla, started from the mean-field coherent state.

    Without an explicit ``dim`` the truncation starts at :func:`recommended_dim`
    and doubles whenever the tail check fails.
    """
    sol = solve_steady_state(p)
    br = sol.branches[sol.operating if sol.operating is not None else 0]
    auto = dim is None
    if auto:
        dim = recommended_dim(br.n0, p.N1)
    while True:
        gen = ancilla_generator(p, dim)
        rho0 = coherent_state(dim, br.beta0)
        try:
            ss, cert = steady_state_oracle(gen, tol=tol, rho0=rho0, **kw)
        except TruncationError:
            if not auto or dim >= max_dim:
                raise
            dim = min(2 * dim, max_dim)
            continue
        return ss, gen, cert


_CHANNEL_OPS = {
    "bb": ("b", "b"),
    "b_bdag": ("b", "bd"),
    "bdag_b": ("bd", "b"),
    "bdag_bdag": ("bd", "bd"),
}


def regression_correlator(
    ss: DensityMatrix,
    generator: LindbladGenerator,
    channel: str,
    tau_grid: Sequence[float],
    order: str = "later_left",
    connected: bool = True,
    tol: float = 1e-10,
) -> np.ndarray:
    """Two-time correlators by the quantum regression theorem.

    ``channel`` is one of ``bb, b_bdag, bdag_b, bdag_bdag`` (first letter pair
    is the left operator) or ``"n_n"`` for the number fluctuations
    <d(b^dag b)(t + tau) d(b^dag b)(t)>.  With ``order="later_left"`` the left
    operator carries time t + tau, with ``"later_right"`` the right one does.
    ``connected`` subtracts the product of stationary means, which turns
    <b b^dag> into the fluctuation correlator <b1 b1^dag>.
    """
    d = generator.dim
    b = destroy(d).toarray()
    ops = {"b": b, "bd": b.conj().T, "n": b.conj().T @ b}
    if channel == "n_n":
        X, Y = ops["n"], ops["n"]
    elif channel in _CHANNEL_OPS:
        X, Y = (ops[k] for k in _CHANNEL_OPS[channel])
    else:
        raise ValueError(f"unknown channel {channel!r}")
    rho = ss.entries
    tau_grid = np.asarray(tau_grid, dtype=float)
    if order == "later_left":
        seed, probe = Y @ rho, X
    elif order == "later_right":
        seed, probe = rho @ X, Y
    else:
        raise ValueError(f"unknown order {order!r}")
    states = evolve_series(seed, generator, tau_grid, tol=tol)
    vals = np.einsum("ij,tji->t", probe, states)
    if connected:
        vals = vals - np.trace(X @ rho) * np.trace(Y @ rho)
    return vals


@dataclass(frozen=True)
class JointSeries:
    times: np.ndarray
    rho_sys: np.ndarray  # (T, sys_dim, sys_dim) reduced system states
    n_sys: np.ndarray
    quadrature: np.ndarray  # <b e^{-i theta} + b^dag e^{i theta}>
    trace: np.ndarray
    populations: np.ndarray = field(init=False)
    coherence: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "populations", np.real(np.einsum("tii->ti", self.rho_sys)))
        object.__setattr__(self, "coherence", np.abs(self.rho_sys))


MAX_JOINT_DIM = 400


def joint_evolution(
    sys_dim: int,
    anc_dim: int,
    full_params: ModelParams,
    t_final: float,
    times: Sequence[float] | None = None,
    rho_sys0: np.ndarray | None = None,
    rho_anc0: np.ndarray | None = None,
    quadrature_phase: complex = 1.0,
    method: str = "auto",
    tol: float = 1e-10,
) -> JointSeries:
    """Evolve the joint two-oscillator master equation.

    ``method="full"`` integrates the whole joint density matrix.
    ``method="sectors"`` (only with nu = 0) integrates each block <n|R|m>
    separately, which is exact and much cheaper.  ``"auto"`` picks sectors
    when nu = 0.  ``quadrature_phase`` is e^{-i theta} of the reported
    ancilla quadrature.  The ancilla starts in the uncoupled oracle steady
    state unless ``rho_anc0`` is given; the system starts in ``rho_sys0``
    (default: (|0> + |1>)/sqrt 2).
    """
    if sys_dim * anc_dim > MAX_JOINT_DIM:
        raise ValueError(f"joint dimension {sys_dim}x{anc_dim} exceeds the limit {MAX_JOINT_DIM}")
    if method == "auto":
        method = "sectors" if full_params.system.nu == 0 else "full"
    if method not in ("full", "sectors"):
        raise ValueError(f"unknown method {method!r}")
    if rho_sys0 is None:
        psi = np.zeros(sys_dim, dtype=complex)
        psi[:2] = 1 / math.sqrt(2)
        rho_sys0 = np.outer(psi, psi.conj())
    if rho_anc0 is None:
        rho_anc0, _, _ = ancilla_steady_state(full_params.ancilla, anc_dim)
        rho_anc0 = rho_anc0.entries
    times = np.linspace(0.0, t_final, 201) if times is None else np.asarray(times, dtype=float)
    b = destroy(anc_dim).toarray()
    quad = quadrature_phase * b + np.conj(quadrature_phase) * b.conj().T

    T = len(times)
    rho_sys = np.zeros((T, sys_dim, sys_dim), dtype=complex)
    qsum = np.zeros(T, dtype=complex)
    if method == "full":
        gen = joint_generator(full_params, sys_dim, anc_dim)
        states = evolve_series(np.kron(rho_sys0, rho_anc0), gen, times, tol=tol)
        R = states.reshape(T, sys_dim, anc_dim, sys_dim, anc_dim)
        rho_sys = np.einsum("tiaja->tij", R)
        qsum = np.einsum("tiaib,ba->t", R, quad)
    else:
        # block (m, n) is the adjoint of block (n, m), so only n <= m is integrated
        for n in range(sys_dim):
            for m in range(n, sys_dim):
                if rho_sys0[n, m] == 0:
                    continue
                gen = sector_generator(full_params, n, m, anc_dim)
                blocks = evolve_series(rho_sys0[n, m] * rho_anc0, gen, times, tol=tol)
                rho_sys[:, n, m] = np.einsum("tii->t", blocks)
                rho_sys[:, m, n] = np.conj(rho_sys[:, n, m])
                if n == m:
                    qsum += np.einsum("tab,ba->t", blocks, quad)
    n_sys = np.real(np.einsum("tii,i->t", rho_sys, np.arange(sys_dim)))
    trace = np.real(np.einsum("tii->t", rho_sys))
    return JointSeries(times=times, rho_sys=rho_sys, n_sys=n_sys, quadrature=np.real(qsum), trace=trace)


def fit_decay_rate(times: np.ndarray, values: np.ndarray, t_start: float, t_stop: float) -> float:
    """Least-squares exponential decay rate of |values| over [t_start, t_stop]."""
    mask = (times >= t_start) & (times <= t_stop)
    if mask.sum() < 3:
        raise ValueError("fit window holds fewer than three samples")
    slope, _ = np.polyfit(times[mask], np.log(np.abs(values[mask])), 1)
    return float(-slope)
