"""Phonon-number QND measurement with a driven Kerr ancilla.

Analytic pieces (steady state, linearized fluctuations, reduced master
equation, readout gain) live next to two independent oracles: a truncated
Fock-space Lindblad integrator and a positive-P Monte Carlo engine.
"""

__version__ = "0.1.0"

from .params import (
    AncillaParams,
    BeamGeometry,
    CouplingParams,
    ModelParams,
    SystemParams,
    beam_anharmonicity,
    bose_occupation,
    combined_occupation,
    nu_from_quality,
    to_si_rate,
)
from .steady_state import (
    SteadyStateBranch,
    SteadyStateSolution,
    UnstableBranchError,
    fold_drives,
    instability_boundary,
    operating_branch,
    solve_steady_state,
)
from .fluctuations import FluctuationModel, build_model, operator_correlators, propagator
from .effective import (
    EffectiveCoefficients,
    coefficients_for,
    coefficients_from_integrals,
    effective_coefficients,
    gamma_ratio_sweep,
    qnd_figure_of_merit,
)
from .measurement import SignalModel, distinguishability_time, mean_current, signal_gain
from .positivep import EnsembleStats, PhasePoint, run_ensemble

__all__ = [
    "AncillaParams",
    "BeamGeometry",
    "CouplingParams",
    "ModelParams",
    "SystemParams",
    "beam_anharmonicity",
    "bose_occupation",
    "combined_occupation",
    "nu_from_quality",
    "to_si_rate",
    "SteadyStateBranch",
    "SteadyStateSolution",
    "UnstableBranchError",
    "fold_drives",
    "instability_boundary",
    "operating_branch",
    "solve_steady_state",
    "FluctuationModel",
    "build_model",
    "operator_correlators",
    "propagator",
    "EffectiveCoefficients",
    "coefficients_for",
    "coefficients_from_integrals",
    "effective_coefficients",
    "gamma_ratio_sweep",
    "qnd_figure_of_merit",
    "SignalModel",
    "distinguishability_time",
    "mean_current",
    "signal_gain",
    "EnsembleStats",
    "PhasePoint",
    "run_ensemble",
]
