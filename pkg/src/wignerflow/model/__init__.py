"""Potentials, eigenstates, states and density matrices."""
from .eigen import (
    Eigenpair,
    fd_eigensolve,
    harmonic_eigenstate,
    harmonic_eigenstates,
    morse_bound_count,
    morse_eigenstate,
    morse_energy,
    morse_lambda,
)
from .potentials import Morse, PiecewiseLinear, Polynomial, PotentialModel, eval_potential, harmonic
from .state import (
    Basis,
    DensityMatrix,
    MomentumDensityMatrix,
    QuantumState,
    auto_basis,
    coherent_state,
    density_matrix,
    fd_basis,
    harmonic_basis,
    momentum_amplitudes,
    momentum_density_matrix,
    morse_basis,
)

__all__ = [
    "Basis", "DensityMatrix", "Eigenpair", "MomentumDensityMatrix", "Morse", "PiecewiseLinear",
    "Polynomial", "PotentialModel", "QuantumState", "auto_basis", "coherent_state", "density_matrix",
    "eval_potential", "fd_basis", "fd_eigensolve", "harmonic", "harmonic_basis", "harmonic_eigenstate",
    "harmonic_eigenstates", "momentum_amplitudes", "momentum_density_matrix", "morse_basis",
    "morse_bound_count", "morse_eigenstate", "morse_energy", "morse_lambda",
]
