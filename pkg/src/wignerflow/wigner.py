"""Wigner transform from position- and momentum-representation density matrices,
projections and overlaps."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EdgeDecayWarning, GridError, RealnessError
from .grid import EDGE_DECAY, ScalarField, y_to_p
from .model.state import DensityMatrix, MomentumDensityMatrix, QuantumState, momentum_amplitudes

REALNESS_TOL = 1e-10
NORM_TOL = 1e-6
BOUND_SLACK = 1e-8


@dataclass(frozen=True, eq=False)
class WignerField(ScalarField):
    t: float = 0.0
    label: str = ""
    imag_residue: float = 0.0

    def invariants(self) -> dict:
        g = self.grid
        peak = self.max_abs()
        return {
            "realness": self.imag_residue / peak if peak else 0.0,
            "normalization": abs(self.integral() - 1.0),
            "bound_excess": max(0.0, peak - 1.0 / (math.pi * g.hbar)),
        }

    def check_invariants(self) -> None:
        inv = self.invariants()
        if inv["normalization"] > NORM_TOL:
            raise ValueError(f"Wigner function integrates to {self.integral():.10f}")
        if inv["bound_excess"] > BOUND_SLACK:
            raise ValueError(f"|W| exceeds 1/(pi hbar) by {inv['bound_excess']:.2e}")


def _finish(grid, F: np.ndarray, t: float, label: str, check: bool) -> WignerField:
    residue = float(np.max(np.abs(F.imag)))
    peak = float(np.max(np.abs(F.real)))
    if residue > REALNESS_TOL * peak:
        raise RealnessError(f"Wigner transform imaginary residue {residue:.2e} vs max|W| {peak:.2e}")
    W = WignerField(grid, F.real, "W", t=t, label=label, imag_residue=residue)
    if check:
        W.check_invariants()
    return W


def wigner_from_rho(rho: DensityMatrix, check: bool = True) -> WignerField:
    """``W(x, p) = (1/(pi hbar)) sum_y rho(x-y, x+y) exp(2i p y / hbar) dy`` via row FFTs."""
    g = rho.grid
    f = rho.rotated()
    edge = np.abs(f[:, 0]).max()
    if edge > EDGE_DECAY * np.abs(f).max():
        warnings.warn(f"density matrix not decayed at the y-extent (edge {edge:.1e})",
                      EdgeDecayWarning, stacklevel=2)
    return _finish(g, y_to_p(g, f), rho.t, rho.label, check)


def wigner_from_rho_momentum(rho_tilde: MomentumDensityMatrix, check: bool = True) -> WignerField:
    """``W(x, p) = (1/(pi hbar)) sum_s rho~(p-s, p+s) exp(-2i x s / hbar) ds``.

    Evaluated as a dense product over ``s`` so the output lands on the same
    x-grid as the position route.
    """
    g = rho_tilde.grid
    f = rho_tilde.rotated()
    kernel = np.exp(-2j * np.outer(rho_tilde.s, g.x) / g.hbar)
    F = (f @ kernel).T * (rho_tilde.ds / (math.pi * g.hbar))
    return _finish(g, F, rho_tilde.t, rho_tilde.label, check)


@dataclass(frozen=True, eq=False)
class Projection:
    values: np.ndarray
    reference: np.ndarray | None = None

    @property
    def max_deviation(self) -> float | None:
        if self.reference is None:
            return None
        return float(np.max(np.abs(self.values - self.reference)))


def position_density(state: QuantumState, t: float) -> np.ndarray:
    """``rho(x, x)`` on the coarse x-grid, straight from the wavefunctions."""
    psi = state.psi(t)[:, ::2]
    return np.einsum("k,ka->a", state.weights, np.abs(psi) ** 2)


def momentum_density(state: QuantumState, t: float) -> np.ndarray:
    """``rho~(p, p)`` on the momentum grid, straight from the wavefunctions."""
    phi = momentum_amplitudes(state.grid, state.psi(t), state.grid.p)
    return np.einsum("k,ka->a", state.weights, np.abs(phi) ** 2)


def project_position(W: ScalarField, state: QuantumState | None = None) -> Projection:
    vals = W.values.sum(axis=1) * W.grid.dp
    ref = position_density(state, getattr(W, "t", 0.0)) if state is not None else None
    return Projection(vals, ref)


def project_momentum(W: ScalarField, state: QuantumState | None = None) -> Projection:
    vals = W.values.sum(axis=0) * W.grid.dx
    ref = momentum_density(state, getattr(W, "t", 0.0)) if state is not None else None
    return Projection(vals, ref)


def overlap(W1: ScalarField, W2: ScalarField) -> float:
    """``2 pi hbar * sum W1 W2 dx dp``, equal to ``|<psi1|psi2>|^2`` for pure states."""
    if W1.grid != W2.grid:
        raise GridError("overlap needs both Wigner functions on the same grid")
    g = W1.grid
    return float(2 * math.pi * g.hbar * np.sum(W1.values * W2.values) * g.dx * g.dp)


def wigner(state: QuantumState, t: float = 0.0, route: str = "position", check: bool = True) -> WignerField:
    """Convenience wrapper building the density matrix first."""
    from .model.state import density_matrix, momentum_density_matrix

    if route == "position":
        return wigner_from_rho(density_matrix(state, t), check=check)
    if route == "momentum":
        return wigner_from_rho_momentum(momentum_density_matrix(state, t), check=check)
    raise ValueError(f"unknown route {route!r}")
