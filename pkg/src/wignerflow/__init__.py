"""Wigner functions, Wigner currents and phase-space flow analysis on a shared grid."""
from .current import CurrentField, classical_current, current_integral, current_moyal, moyal_error_curve
from .errors import (
    BoundStateError,
    DecayError,
    DiscretizationError,
    EdgeDecayWarning,
    GridError,
    RealnessError,
    TruncationWarning,
)
from .flow import (
    DivergenceMap,
    Fieldline,
    StagnationPoint,
    divergence_sup,
    divergence_w,
    fieldlines,
    liouville_residual,
    stagnation_points,
    velocity_field,
)
from .grid import PhaseGrid, ScalarField, VectorField, make_grid, spectral_derivative
from .verify import CheckReport, check_continuity, check_ehrenfest, check_hudson, check_projections, run_suite
from .wigner import WignerField, overlap, project_momentum, project_position, wigner, wigner_from_rho

__version__ = "0.1.0"

__all__ = [
    "BoundStateError", "CheckReport", "CurrentField", "DecayError", "DiscretizationError", "DivergenceMap",
    "EdgeDecayWarning", "Fieldline", "GridError", "PhaseGrid", "RealnessError", "ScalarField",
    "StagnationPoint", "TruncationWarning", "VectorField", "WignerField", "check_continuity",
    "check_ehrenfest", "check_hudson", "check_projections", "classical_current", "current_integral",
    "current_moyal", "divergence_sup", "divergence_w", "fieldlines", "liouville_residual", "make_grid",
    "moyal_error_curve", "overlap", "project_momentum", "project_position", "run_suite",
    "spectral_derivative", "stagnation_points", "velocity_field", "wigner", "wigner_from_rho",
]
