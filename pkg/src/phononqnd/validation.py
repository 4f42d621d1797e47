"""Quick cross-checks between the analytic modules and the two oracles.

Each check returns a :class:`CheckResult`; :func:`run_all` runs the whole
set in a few seconds and backs the ``validate`` command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .effective import coefficients_from_integrals, effective_coefficients, qnd_figure_of_merit
from .fluctuations import appendix_correlators, build_model, c_number_correlators, propagator
from .fock import ancilla_steady_state, destroy
from .measurement import signal_gain
from .params import AncillaParams, CouplingParams
from .positivep import run_ensemble
from .steady_state import UnstableBranchError, operating_branch, solve_steady_state


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str = ""


def random_ancilla(rng: np.random.Generator, kerr: bool = True) -> AncillaParams:
    return AncillaParams(
        delta_omega=rng.uniform(-3, 3),
        lambda11=rng.uniform(0, 0.5) if kerr else 0.0,
        epsilon=rng.uniform(0.05, 3),
        damping_thermal=rng.uniform(0, 1),
        damping_measurement=rng.uniform(0.05, 1),
        N_bar1=rng.uniform(0, 2),
        N_m=rng.uniform(0, 2),
    )


def stable_draws(rng: np.random.Generator, count: int, kerr: bool = True):
    """Yield (params, operating branch) pairs, skipping draws without a stable branch."""
    made = 0
    while made < count:
        p = random_ancilla(rng, kerr)
        try:
            br = solve_steady_state(p).branch("operating")
        except UnstableBranchError:
            continue
        made += 1
        yield p, br


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def check_zero_detuning(rng, draws: int = 200) -> CheckResult:
    worst = 0.0
    for _ in range(draws):
        p = random_ancilla(rng, kerr=False).replace(delta_omega=0.0)
        c = CouplingParams(rng.uniform(-0.1, 0.1))
        br = operating_branch(p)
        co = effective_coefficients(br, None, p, c)
        k, e, N1, l = p.kappa, p.epsilon, p.N1, c.lambda01
        worst = max(
            worst,
            _rel(co.delta, l * (N1 + (e / k) ** 2)),
            _rel(co.gamma, l * l * e * e * (2 * N1 + 1) / k**3),
            abs(co.theta),
        )
    return CheckResult("zero-detuning limit", worst <= 1e-12, worst, 1e-12)


def check_gamma_forms(rng, draws: int = 1000) -> CheckResult:
    worst = 0.0
    for p, br in stable_draws(rng, draws):
        co = effective_coefficients(br, None, p, CouplingParams(0.05))
        worst = max(worst, _rel(co.gamma_bracketed, co.gamma))
    return CheckResult("Gamma bracketed vs compact", worst <= 1e-12, worst, 1e-12)


def check_lyapunov(rng, draws: int = 200) -> CheckResult:
    worst = 0.0
    for p, br in stable_draws(rng, draws):
        f = build_model(br, p)
        C = f.one_time
        res = f.A @ C + C @ f.A.T - f.D
        worst = max(worst, float(np.abs(res).max() / max(np.abs(f.D).max(), 1e-300)))
    return CheckResult("Lyapunov stationarity", worst <= 1e-10, worst, 1e-10)


def check_propagator(rng, draws: int = 20) -> CheckResult:
    worst = 0.0
    taus = np.linspace(0, 4, 9)
    for p, br in stable_draws(rng, draws):
        f = build_model(br, p)
        M = propagator(f, taus)
        for t, m in zip(taus, M):
            worst = max(worst, float(np.abs(m - expm(-f.A * t)).max()))
        worst = max(worst, float(np.abs(appendix_correlators(f, taus) - c_number_correlators(f, taus)).max()))
    return CheckResult("propagator and appendix forms", worst <= 1e-10, worst, 1e-10)


def check_integrals(rng, draws: int = 20) -> CheckResult:
    worst = 0.0
    c = CouplingParams(0.03)
    for p, br in stable_draws(rng, draws):
        f = build_model(br, p)
        co = effective_coefficients(br, f, p, c)
        ic = coefficients_from_integrals(f, br, p, c, method="quadrature")
        worst = max(
            worst,
            _rel(ic.gamma, co.gamma),
            _rel(ic.delta, co.delta),
            _rel(ic.theta_minus_lambda00, co.theta),
        )
    return CheckResult("correlator integrals vs closed forms", worst <= 1e-6, worst, 1e-6)


def check_fock_linear() -> CheckResult:
    p = AncillaParams.from_kappa(1.0, delta_omega=0.4, epsilon=1.0, N1=0.3)
    br = operating_branch(p)
    ss, gen, _ = ancilla_steady_state(p)
    err = abs(ss.expect(destroy(gen.dim)) - br.beta0) / abs(br.beta0)
    return CheckResult("Fock oracle, linear case", err <= 1e-8, err, 1e-8)


def check_fock_kerr() -> CheckResult:
    p = AncillaParams.from_kappa(1.0, delta_omega=0.3, lambda11=0.01, epsilon=0.8, N1=0.2)
    br = operating_branch(p)
    ss, gen, _ = ancilla_steady_state(p)
    err = abs(ss.expect(destroy(gen.dim)) - br.beta0) / abs(br.beta0)
    return CheckResult("Fock oracle, weak Kerr", err <= 0.02, err, 0.02)


def check_positive_p(seed: int = 0) -> CheckResult:
    p = AncillaParams.from_kappa(1.0, delta_omega=0.5, epsilon=1.0, N1=0.5)
    br = operating_branch(p)
    st = run_ensemble(p, n_traj=2000, dt=0.01, t_final=20.0, seed=seed)
    z = abs(st.mean_beta - br.beta0) / st.se_beta
    return CheckResult("positive-P mean, linear case", z <= 3, z, 3.0, "in standard errors")


def check_measurement(rng, draws: int = 1000) -> CheckResult:
    worst = 0.0
    for p, br in stable_draws(rng, draws):
        s = signal_gain(br, p, CouplingParams(rng.uniform(1e-3, 0.1)))
        worst = max(worst, _rel(s.gain, s.sqrt_gamma_factor * math.sqrt(s.gamma)))
    return CheckResult("readout gain vs sqrt(Gamma)", worst <= 1e-12, worst, 1e-12)


def check_figure_of_merit() -> CheckResult:
    rep = qnd_figure_of_merit(1.5e4, 1.2e6)
    err = abs(rep.gamma_over_nu - 0.0125)
    ok = err <= 1e-15 and round(rep.gamma_over_nu, 3) == 0.013 and not rep.verdict
    return CheckResult("Gamma0/nu device example", ok, err, 1e-15)


def run_all(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks: list[Callable[[], CheckResult]] = [
        lambda: check_zero_detuning(rng),
        lambda: check_gamma_forms(rng),
        lambda: check_lyapunov(rng),
        lambda: check_propagator(rng),
        lambda: check_integrals(rng),
        check_fock_linear,
        check_fock_kerr,
        lambda: check_positive_p(seed),
        lambda: check_measurement(rng),
        check_figure_of_merit,
    ]
    return [c() for c in checks]
