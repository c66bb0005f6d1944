"""Scattering of damped wave equations with time-dependent propagation speed.

Solutions of ``u'' + c(t)^2 A u + b(t) u' = 0`` are simulated mode by mode
over a finite spectral model of ``A``; the package extracts their asymptotic
profiles and checks whether they approach a free wave.
"""

from .coefficients import (
    INF,
    CoefficientProfile,
    Constant,
    DriftClassification,
    DriftKind,
    ExpPerturbation,
    MollifiedProfile,
    PiecewiseLinear,
    PowerPerturbation,
    StepFunction,
    check_speed,
    classify_drift,
    profile_from_dict,
)
from .dynamics import (
    LONG_HORIZON,
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    closed_form_constant,
    energy,
    energy_lower_bound,
    evolve,
    evolve_mode,
    gronwall_tail_bound,
    k1_constant,
)
from .estimator import ScatteringTransformer, check_states
from .scattering import (
    DiagonalState,
    FreeSolution,
    NotAsymptoticallyFree,
    ProfileError,
    ScatteringProfile,
    best_free_fit,
    diagonalize,
    discrepancy,
    estimate_wave_speed,
    extract_profile,
    free_state,
    reconstruct_free,
    time_average_cross,
    undiagonalize,
)
from .spectrum import (
    SpectrumModel,
    StateVector,
    dirichlet_interval,
    spectral_project,
    unitary_shift,
    weighted_norm,
)

__all__ = [
    "best_free_fit",
    "check_speed",
    "check_states",
    "classify_drift",
    "closed_form_constant",
    "CoefficientProfile",
    "Constant",
    "diagonalize",
    "DiagonalState",
    "dirichlet_interval",
    "discrepancy",
    "DriftClassification",
    "DriftKind",
    "energy",
    "energy_lower_bound",
    "estimate_wave_speed",
    "evolve",
    "evolve_mode",
    "ExpPerturbation",
    "extract_profile",
    "free_state",
    "FreeSolution",
    "gronwall_tail_bound",
    "INF",
    "IntegrationError",
    "IntegratorConfig",
    "k1_constant",
    "LONG_HORIZON",
    "MollifiedProfile",
    "NotAsymptoticallyFree",
    "PiecewiseLinear",
    "PowerPerturbation",
    "profile_from_dict",
    "ProfileError",
    "reconstruct_free",
    "ScatteringProfile",
    "ScatteringTransformer",
    "spectral_project",
    "SpectrumModel",
    "StateVector",
    "StepFunction",
    "time_average_cross",
    "Trajectory",
    "undiagonalize",
    "unitary_shift",
    "weighted_norm",
]

__version__ = "0.1.0"
