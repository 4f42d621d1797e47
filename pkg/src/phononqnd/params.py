"""Physical parameters and device-level formulas.

All rates and frequencies are expressed in units of the ancilla damping
rate kappa unless a caller explicitly converts with :func:`to_si_rate`.
Thermal occupations are the canonical temperature representation; use
:func:`bose_occupation` to turn an (omega, T) pair into one.

Damping weights of the ancilla are named by the bath they come from
(``damping_thermal`` for the mechanical bath, ``damping_measurement`` for the
electronic readout bath) instead of by Greek letter, because the two labels
are easy to swap.  ``eta`` and ``mu`` are provided as read-only aliases with
eta = thermal and mu = measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import constants

HBAR = constants.hbar
K_B = constants.k


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """The measured (system) oscillator.

    ``nu = 0`` is allowed and switches the system damping off, which is the
    setting used to test the QND property.
    """

    omega0: float = 0.0
    lambda00: float = 0.0
    nu: float = 1e-3
    N0: float = 0.0

    def __post_init__(self):
        _require_finite(omega0=self.omega0, lambda00=self.lambda00, nu=self.nu, N0=self.N0)
        if self.nu < 0:
            raise ValueError(f"nu must be non-negative, got {self.nu}")
        if self.N0 < 0:
            raise ValueError(f"N0 must be non-negative, got {self.N0}")


@dataclass(frozen=True)
class AncillaParams:
    """The driven, heavily damped readout oscillator.

    ``delta_omega`` is the detuning omega_1 - omega_d, ``lambda11`` the
    self-Kerr coefficient and ``epsilon`` the drive strength.  The total
    damping is ``kappa = damping_thermal + damping_measurement``.
    """

    delta_omega: float = 0.0
    lambda11: float = 0.0
    epsilon: float = 0.0
    damping_thermal: float = 0.0
    damping_measurement: float = 1.0
    N_bar1: float = 0.0
    N_m: float = 0.0

    def __post_init__(self):
        _require_finite(
            delta_omega=self.delta_omega,
            lambda11=self.lambda11,
            epsilon=self.epsilon,
            damping_thermal=self.damping_thermal,
            damping_measurement=self.damping_measurement,
            N_bar1=self.N_bar1,
            N_m=self.N_m,
        )
        if self.damping_thermal < 0 or self.damping_measurement < 0:
            raise ValueError("damping rates must be non-negative")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.N_bar1 < 0 or self.N_m < 0:
            raise ValueError("bath occupations must be non-negative")

    @classmethod
    def from_kappa(
        cls,
        kappa: float = 1.0,
        *,
        delta_omega: float = 0.0,
        lambda11: float = 0.0,
        epsilon: float = 0.0,
        N1: float = 0.0,
        measurement_fraction: float = 1.0,
    ) -> "AncillaParams":
        """Build parameters from the total damping and combined occupation.

        Both baths are given the same occupation ``N1``, so the combined
        occupation is ``N1`` whatever the split.
        """
        if not 0.0 <= measurement_fraction <= 1.0:
            raise ValueError("measurement_fraction must lie in [0, 1]")
        mu = kappa * measurement_fraction
        return cls(
            delta_omega=delta_omega,
            lambda11=lambda11,
            epsilon=epsilon,
            damping_thermal=kappa - mu,
            damping_measurement=mu,
            N_bar1=N1,
            N_m=N1,
        )

    @property
    def eta(self) -> float:
        return self.damping_thermal

    @property
    def mu(self) -> float:
        return self.damping_measurement

    @property
    def kappa(self) -> float:
        return self.damping_thermal + self.damping_measurement

    @property
    def N1(self) -> float:
        return combined_occupation(self)

    def replace(self, **changes) -> "AncillaParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class CouplingParams:
    lambda01: float = 0.0

    def __post_init__(self):
        _require_finite(lambda01=self.lambda01)


@dataclass(frozen=True)
class BeamGeometry:
    """Doubly clamped beam with rectangular cross-section (SI units)."""

    bulk_modulus: float
    rho: float
    length: float
    width: float
    thickness: float
    omega: float

    def __post_init__(self):
        for name in ("bulk_modulus", "rho", "length", "width", "thickness", "omega"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Everything needed for the joint two-oscillator problem."""

    system: SystemParams = field(default_factory=SystemParams)
    ancilla: AncillaParams = field(default_factory=AncillaParams)
    coupling: CouplingParams = field(default_factory=CouplingParams)


def bose_occupation(omega: float, T: float) -> float:
    """Bose-Einstein occupation 1/(exp(hbar omega / k_B T) - 1)."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if T < 0:
        raise ValueError(f"temperature must be non-negative, got {T}")
    if T == 0:
        return 0.0
    x = HBAR * omega / (K_B * T)
    if x > 700.0:  # expm1 would overflow; the occupation is e^{-x} to double precision
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def combined_occupation(p: AncillaParams) -> float:
    """Damping-weighted occupation seen by the ancilla."""
    return (p.damping_thermal * p.N_bar1 + p.damping_measurement * p.N_m) / p.kappa


def nu_from_quality(omega0: float, Q0: float) -> float:
    if not Q0 > 0:
        raise ValueError(f"Q0 must be positive, got {Q0}")
    return omega0 / (2.0 * Q0)


def beam_anharmonicity(g: BeamGeometry) -> float:
    """Self-Kerr coefficient (rad/s) of a beam's fundamental flexural mode.

    lambda = pi^4/128 * hbar B / (rho^2 omega^2 L^5 w t)
    """
    return (
        math.pi**4
        / 128.0
        * HBAR
        * g.bulk_modulus
        / (g.rho**2 * g.omega**2 * g.length**5 * g.width * g.thickness)
    )


def to_si_rate(value_in_kappa_units: float, kappa_si: float) -> float:
    """Convert a rate expressed in units of kappa to 1/s."""
    if not kappa_si > 0:
        raise ValueError(f"kappa must be positive, got {kappa_si}")
    return value_in_kappa_units * kappa_si
