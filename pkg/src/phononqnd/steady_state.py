"""Mean-field steady states of the driven Kerr ancilla.

The steady-state photon number n0 = |beta0|^2 solves

    eps^2 = n0 [kappa^2 + (dw + l11 + 2 l11 n0)^2]

which is cubic in n0 and can have one or three non-negative roots.  Each
root is classified with the Hurwitz criterion on the linearized drift
matrix: Tr A = 2 kappa is always positive, so stability is decided by
Det A = Lambda^2 = kappa^2 + Lambda1^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .params import AncillaParams

# relative separation below which two real roots are reported as one double root
_MERGE_RTOL = 1e-7
_MAX_POLISH = 4


class UnstableBranchError(ValueError):
    """Raised when a quantity that only exists on a stable branch is requested."""


@dataclass(frozen=True)
class SteadyStateBranch:
    n0: float
    beta0: complex
    Lambda1_sq: float
    Lambda_sq: float
    stable: bool
    multiplicity: int = 1

    @property
    def alpha0(self) -> complex:
        return self.beta0.conjugate()


@dataclass(frozen=True)
class SteadyStateSolution:
    branches: tuple[SteadyStateBranch, ...]
    operating: int | None

    def __len__(self):
        return len(self.branches)

    def __getitem__(self, i):
        return self.branches[i]

    @property
    def bistable(self) -> bool:
        return sum(b.stable for b in self.branches) > 1

    def branch(self, which: str | int = "operating") -> SteadyStateBranch:
        """Select a branch by index or by name ('operating', 'lowest', 'highest')."""
        if isinstance(which, (int, np.integer)):
            return self.branches[int(which)]
        if which == "operating":
            if self.operating is None:
                raise UnstableBranchError("no stable steady-state branch")
            return self.branches[self.operating]
        if which == "lowest":
            return self.branches[0]
        if which == "highest":
            return self.branches[-1]
        raise ValueError(f"unknown branch selector {which!r}")


def lambda1_sq(n0: float, p: AncillaParams) -> float:
    d = p.delta_omega + p.lambda11
    L = p.lambda11 * n0
    return d * d + 8.0 * d * L + 12.0 * L * L


def steady_state_residual(n0: float, p: AncillaParams) -> float:
    """Left side minus right side of the steady-state relation, g(n0)."""
    shift = p.delta_omega + p.lambda11 + 2.0 * p.lambda11 * n0
    return n0 * (p.kappa**2 + shift * shift) - p.epsilon**2


def _cubic_real_roots(b: float, c: float, e: float) -> list[float]:
    """Real roots of y^3 + b y^2 + c y + e via the depressed-cubic closed form."""
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + e
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        s = math.sqrt(disc)
        u = -math.copysign(1.0, q) * float(np.cbrt(abs(q) / 2.0 + s))
        t = u - p / (3.0 * u) if u != 0 else 0.0
        return [t - shift]
    if p == 0:
        return [-shift] * 3
    r = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * r)
    phi = math.acos(max(-1.0, min(1.0, arg)))
    return [r * math.cos((phi - 2.0 * math.pi * k) / 3.0) - shift for k in range(3)]


def _polish(n: float, p: AncillaParams) -> float:
    # g'(n) = Lambda^2(n); skip where it vanishes (fold points).  Several steps
    # are needed when the closed form loses a tiny root to cancellation.
    for _ in range(_MAX_POLISH):
        g = steady_state_residual(n, p)
        dg = p.kappa**2 + lambda1_sq(n, p)
        if g == 0 or abs(dg) < 1e-12 * p.kappa**2:
            break
        step = g / dg
        n -= step
        if abs(step) <= 1e-15 * max(abs(n), 1e-300):
            break
    return n


def _make_branch(n0: float, p: AncillaParams, multiplicity: int = 1) -> SteadyStateBranch:
    n0 = max(n0, 0.0)
    shift = p.delta_omega + p.lambda11 + 2.0 * p.lambda11 * n0
    beta0 = -1j * p.epsilon / complex(p.kappa, shift)
    l1sq = lambda1_sq(n0, p)
    lsq = p.kappa**2 + l1sq
    return SteadyStateBranch(
        n0=float(n0),
        beta0=complex(beta0),
        Lambda1_sq=float(l1sq),
        Lambda_sq=float(lsq),
        stable=bool(lsq > 0 and multiplicity == 1),
        multiplicity=multiplicity,
    )


def _root_values(p: AncillaParams) -> list[tuple[float, int]]:
    """Non-negative real roots n0 with multiplicities, ascending."""
    kappa, lam, eps = p.kappa, p.lambda11, p.epsilon
    d = p.delta_omega + lam
    if eps == 0:
        return [(0.0, 1)]
    if lam == 0:
        return [(eps * eps / (kappa * kappa + d * d), 1)]
    # cubic in y = 2 lam n0: y^3 + 2d y^2 + (kappa^2 + d^2) y - 2 lam eps^2 = 0
    ys = _cubic_real_roots(2.0 * d, kappa * kappa + d * d, -2.0 * lam * eps * eps)
    ns = sorted(_polish(y / (2.0 * lam), p) for y in ys)
    merged: list[tuple[float, int]] = []
    for n in ns:
        if merged and abs(n - merged[-1][0]) <= _MERGE_RTOL * max(abs(n), 1.0):
            prev, m = merged[-1]
            merged[-1] = ((prev * m + n) / (m + 1), m + 1)
        else:
            merged.append((n, 1))
    return [(n, m) for n, m in merged if n >= -_MERGE_RTOL * max(1.0, abs(n))]


def solve_steady_state(p: AncillaParams) -> SteadyStateSolution:
    """All mean-field branches of the driven Kerr oscillator.

    Branches are sorted by n0.  The operating branch is the lowest-n0 stable
    one, i.e. the branch reached when the drive is ramped up from zero.
    """
    branches = tuple(_make_branch(n, p, m) for n, m in _root_values(p))
    operating = next((i for i, b in enumerate(branches) if b.stable), None)
    return SteadyStateSolution(branches=branches, operating=operating)


def operating_branch(p: AncillaParams) -> SteadyStateBranch:
    return solve_steady_state(p).branch("operating")


def drift_matrix(branch: SteadyStateBranch, p: AncillaParams) -> np.ndarray:
    """Linearized drift matrix A of the fluctuation amplitudes (beta1, alpha1)."""
    lam = p.lambda11
    c = p.delta_omega + lam + 4.0 * lam * branch.n0
    b0, a0 = branch.beta0, branch.alpha0
    return np.array(
        [
            [p.kappa + 1j * c, 2j * lam * b0 * b0],
            [-2j * lam * a0 * a0, p.kappa - 1j * c],
        ]
    )


def stability_matrix_checks(branch: SteadyStateBranch, p: AncillaParams) -> tuple[float, float]:
    """Trace and determinant of the explicit drift matrix."""
    A = drift_matrix(branch, p)
    trace = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    return float(trace.real), float(det.real)


def fold_drives(p: AncillaParams) -> list[float]:
    """Drive strengths at which two branches merge, at fixed detuning.

    Folds satisfy g(n0) = 0 and g'(n0) = Lambda^2 = 0; the second condition is
    a quadratic in n0.  Returns an empty list when the oscillator cannot be
    bistable at this detuning.
    """
    lam = p.lambda11
    d = p.delta_omega + lam
    if lam == 0:
        return []
    disc = 64 * lam**2 * d**2 - 48 * lam**2 * (p.kappa**2 + d**2)
    if disc <= 0:
        return []
    out = []
    for sign in (-1.0, 1.0):
        n = (-8 * lam * d + sign * math.sqrt(disc)) / (24 * lam**2)
        if n > 0:
            shift = d + 2 * lam * n
            out.append(math.sqrt(n * (p.kappa**2 + shift**2)))
    return sorted(out)


@dataclass(frozen=True)
class FoldPoint:
    delta_omega: float
    epsilon: float


def _is_multivalued(p: AncillaParams) -> bool:
    return len(_root_values(p)) > 1


def instability_boundary(
    p_base: AncillaParams,
    variable: str,
    grid: Sequence[float],
    rtol: float = 1e-9,
) -> list[FoldPoint]:
    """Locate fold points along a one-parameter sweep.

    ``variable`` is ``'epsilon'`` or ``'delta_omega'``.  Between neighbouring
    grid points where the number of branches changes (1 <-> 3) the crossing
    is bisected until the bracket is narrower than ``rtol`` relative.
    """
    if variable not in ("epsilon", "delta_omega"):
        raise ValueError(f"cannot sweep {variable!r}")
    grid = np.asarray(grid, dtype=float)

    def at(x):
        return p_base.replace(**{variable: float(x)})

    flags = [_is_multivalued(at(x)) for x in grid]
    folds = []
    for i in range(len(grid) - 1):
        if flags[i] == flags[i + 1]:
            continue
        lo, hi = grid[i], grid[i + 1]
        flo = flags[i]
        while abs(hi - lo) > rtol * max(abs(lo), abs(hi), 1e-300):
            mid = 0.5 * (lo + hi)
            if _is_multivalued(at(mid)) == flo:
                lo = mid
            else:
                hi = mid
        x = 0.5 * (lo + hi)
        q = at(x)
        folds.append(FoldPoint(delta_omega=q.delta_omega, epsilon=q.epsilon))
    return folds
