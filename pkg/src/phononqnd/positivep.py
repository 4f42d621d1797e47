"""Positive-P Monte Carlo for the driven Kerr ancilla.

Each trajectory carries two independent complex amplitudes (beta, alpha)
and obeys the Ito equations

    d beta  = [-i eps - beta (kappa + i dw + i l11 + 2 i l11 beta alpha)] dt + (B dW)_1
    d alpha = [+i eps - alpha (kappa - i dw - i l11 - 2 i l11 beta alpha)] dt + (B dW)_2

with real Wiener increments dW and B B^T = D(beta, alpha).  Ensemble and
time averages of (beta, alpha) estimate normally ordered moments of b, b^dag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import AncillaParams
from .steady_state import solve_steady_state

_CHUNK_STEPS = 512
_TRAJ_BLOCK = 10_000


@dataclass(frozen=True)
class PhasePoint:
    beta: complex
    alpha: complex


@dataclass(frozen=True)
class EnsembleStats:
    n_traj: int
    mean_beta: complex
    mean_alpha: complex
    se_beta: float
    se_alpha: float
    cov_bb: complex
    cov_ba: complex
    cov_aa: complex
    se_bb: float
    se_ba: float
    se_aa: float
    divergence_count: int
    n_batches: int
    samples: np.ndarray | None = None

    @property
    def divergence_fraction(self) -> float:
        return self.divergence_count / self.n_traj if self.n_traj else 0.0

    def __eq__(self, other):
        if not isinstance(other, EnsembleStats):
            return NotImplemented
        same_samples = (self.samples is None and other.samples is None) or (
            self.samples is not None
            and other.samples is not None
            and np.array_equal(self.samples, other.samples)
        )
        fields = ("n_traj", "mean_beta", "mean_alpha", "se_beta", "se_alpha", "cov_bb", "cov_ba",
                  "cov_aa", "se_bb", "se_ba", "se_aa", "divergence_count", "n_batches")
        return same_samples and all(getattr(self, f) == getattr(other, f) for f in fields)


def _drift_arrays(beta, alpha, p: AncillaParams):
    lam = p.lambda11
    rot = p.delta_omega + lam + 2.0 * lam * beta * alpha
    db = -1j * p.epsilon - beta * (p.kappa + 1j * rot)
    da = 1j * p.epsilon - alpha * (p.kappa - 1j * rot)
    return db, da


def drift(point: PhasePoint, p: AncillaParams) -> tuple[complex, complex]:
    db, da = _drift_arrays(complex(point.beta), complex(point.alpha), p)
    return complex(db), complex(da)


def diffusion(point: PhasePoint, p: AncillaParams) -> np.ndarray:
    lam, off = p.lambda11, 2.0 * p.kappa * p.N1
    b, a = complex(point.beta), complex(point.alpha)
    return np.array([[-2j * lam * b * b, off], [off, 2j * lam * a * a]])


def _noise_arrays(beta, alpha, p: AncillaParams):
    """Entries (B11, B12, B21, B22) of a factor with B B^T = D, elementwise.

    Uses the 2x2 square root (D + s I)/sqrt(tr + 2 s) with s = +-sqrt(det D).
    The sign satisfying Re(conj(tr) s) >= 0 maximizes |tr + 2 s|, which then
    vanishes only if tr = det = 0; there D has rank at most one and D = v v^T
    is used instead.  D is normalized first so that det cannot underflow.
    """
    lam, off = p.lambda11, 2.0 * p.kappa * p.N1
    d11 = -2j * lam * beta * beta
    d22 = 2j * lam * alpha * alpha
    scale = np.abs(d11) + np.abs(d22) + off
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        safe = np.where(scale > 0, scale, 1.0)
        root_scale = np.sqrt(scale)
        n11, n22, n12 = d11 / safe, d22 / safe, off / safe
        det = n11 * n22 - n12 * n12
        tr = n11 + n22
        s = np.sqrt(det)
        flip = (tr.real * s.real + tr.imag * s.imag) < 0
        s[flip] = -s[flip]
        inv = root_scale / np.sqrt(tr + 2 * s)
        B11 = (n11 + s) * inv
        B22 = (n22 + s) * inv
        B12 = n12 * inv
    bad = ~(np.abs(tr + 2 * s) > 1e-12)
    if bad.any():
        # rank-one branch, v built from the larger diagonal entry
        b11, b22, o = d11[bad], d22[bad], n12[bad] * scale[bad]
        use11 = np.abs(b11) >= np.abs(b22)
        r11, r22 = np.sqrt(b11), np.sqrt(b22)
        with np.errstate(divide="ignore", invalid="ignore"):
            v1 = np.where(use11, r11, np.where(r22 != 0, o / r22, 0))
            v2 = np.where(use11, np.where(r11 != 0, o / r11, 0), r22)
        B12 = np.array(B12, copy=True)
        B21 = B12.copy()
        B11[bad], B21[bad], B12[bad], B22[bad] = v1, v2, 0, 0
        return B11, B12, B21, B22
    return B11, B12, B12, B22


def noise_factor(point: PhasePoint, p: AncillaParams) -> np.ndarray:
    """A 2x2 complex B with B B^T = D(point)."""
    entries = _noise_arrays(np.array([complex(point.beta)]), np.array([complex(point.alpha)]), p)
    B11, B12, B21, B22 = (complex(e[0]) for e in entries)
    return np.array([[B11, B12], [B21, B22]])


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory, keyed on (seed, index)."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), int(index)]))


def divergence_cutoff(n0: float) -> float:
    return 1e3 * max(1.0, math.sqrt(n0))


def _block_sums(p, idx, dt, n_steps, n_skip, cutoff, beta0, dump_rows, dump_stride):
    """Integrate trajectories ``idx`` and return per-trajectory post-transient sums."""
    m = len(idx)
    rngs = [trajectory_rng(p_seed, i) for p_seed, i in idx]
    beta = np.full(m, beta0, dtype=complex)
    alpha = np.full(m, np.conj(beta0), dtype=complex)
    alive = np.ones(m, dtype=bool)
    sums = np.zeros((5, m), dtype=complex)
    sqdt = math.sqrt(dt)
    step = 0
    dump_mask = np.array([i < dump_rows for _, i in idx]) if dump_rows else None
    samples = []
    while step < n_steps:
        k = min(_CHUNK_STEPS, n_steps - step)
        dW = np.stack([g.standard_normal((k, 2)) for g in rngs], axis=1) * sqdt  # (k, m, 2)
        for j in range(k):
            db, da = _drift_arrays(beta, alpha, p)
            B11, B12, B21, B22 = _noise_arrays(beta, alpha, p)
            w1, w2 = dW[j, :, 0], dW[j, :, 1]
            beta = beta + db * dt + B11 * w1 + B12 * w2
            alpha = alpha + da * dt + B21 * w1 + B22 * w2
            step += 1
            bad = ~(np.maximum(np.abs(beta), np.abs(alpha)) <= cutoff)
            if bad.any():
                alive &= ~bad
                beta = np.where(alive, beta, 0)
                alpha = np.where(alive, alpha, 0)
            if step > n_skip:
                sums[0] += beta
                sums[1] += alpha
                sums[2] += beta * beta
                sums[3] += beta * alpha
                sums[4] += alpha * alpha
            if dump_mask is not None and step % dump_stride == 0:
                for r in np.flatnonzero(dump_mask):
                    samples.append((idx[r][1], step * dt, beta[r].real, beta[r].imag, alpha[r].real, alpha[r].imag))
    return sums, alive, samples


def run_ensemble(
    p: AncillaParams,
    n_traj: int = 10_000,
    dt: float | None = None,
    t_final: float | None = None,
    seed: int = 0,
    transient: float | None = None,
    n_batches: int = 20,
    dump_trajectories: int = 0,
    dump_stride: int = 100,
) -> EnsembleStats:
    """Euler-Maruyama ensemble with time averaging after a transient.

    Every trajectory starts at the operating mean-field point and draws
    its noise from :func:`trajectory_rng`, so results depend only on
    ``seed`` and the parameters.  Standard errors come from ``n_batches``
    contiguous groups of trajectories.  Trajectories whose amplitudes
    leave the divergence cutoff are dropped and counted.
    """
    kappa = p.kappa
    dt = 0.01 / kappa if dt is None else float(dt)
    transient = 10.0 / kappa if transient is None else float(transient)
    t_final = transient + 20.0 / kappa if t_final is None else float(t_final)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n_batches < 20:
        raise ValueError("at least 20 batches are needed for batch-means errors")
    if n_traj < n_batches:
        raise ValueError("n_traj must be at least n_batches")
    if t_final <= transient:
        raise ValueError("t_final must exceed the transient window")
    n_steps = int(round(t_final / dt))
    n_skip = int(round(transient / dt))
    n_avg = n_steps - n_skip

    sol = solve_steady_state(p)
    br = sol.branches[sol.operating if sol.operating is not None else 0]
    cutoff = divergence_cutoff(br.n0)

    per_traj = np.zeros((5, n_traj), dtype=complex)
    alive = np.zeros(n_traj, dtype=bool)
    samples = []
    for start in range(0, n_traj, _TRAJ_BLOCK):
        stop = min(start + _TRAJ_BLOCK, n_traj)
        idx = [(seed, i) for i in range(start, stop)]
        sums, ok, smp = _block_sums(p, idx, dt, n_steps, n_skip, cutoff, br.beta0, dump_trajectories, dump_stride)
        per_traj[:, start:stop] = sums / n_avg
        alive[start:stop] = ok
        samples.extend(smp)

    groups = np.array_split(np.arange(n_traj), n_batches)
    g_est = []
    g_w = []
    for g in groups:
        keep = g[alive[g]]
        if len(keep) == 0:
            continue
        m = per_traj[:, keep].mean(axis=1)
        g_est.append([m[0], m[1], m[2] - m[0] ** 2, m[3] - m[0] * m[1], m[4] - m[1] ** 2])
        g_w.append(len(keep))
    g_est = np.array(g_est)
    g_w = np.array(g_w, dtype=float)
    G = len(g_w)
    if G < 2:
        raise FloatingPointError("too many trajectories diverged to form batch statistics")

    total = per_traj[:, alive].mean(axis=1)
    point = [total[0], total[1], total[2] - total[0] ** 2, total[3] - total[0] * total[1], total[4] - total[1] ** 2]
    w = g_w / g_w.sum()
    se = []
    for k in range(5):
        dev = g_est[:, k] - point[k]
        # weighted batch-means variance of the mean
        var = np.sum(w * w * np.abs(dev) ** 2) * G / (G - 1)
        se.append(float(math.sqrt(var)))
    dump = None
    if dump_trajectories:
        dump = np.array(sorted(samples, key=lambda r: (r[0], r[1])), dtype=float).reshape(-1, 6)
    return EnsembleStats(
        n_traj=n_traj,
        mean_beta=complex(point[0]),
        mean_alpha=complex(point[1]),
        se_beta=se[0],
        se_alpha=se[1],
        cov_bb=complex(point[2]),
        cov_ba=complex(point[3]),
        cov_aa=complex(point[4]),
        se_bb=se[2],
        se_ba=se[3],
        se_aa=se[4],
        divergence_count=int(n_traj - alive.sum()),
        n_batches=G,
        samples=dump,
    )
