"""Finite eigenbasis states, their time evolution and density matrices.

Time dependence is carried only by the stationary phases
``exp(-i E_n t / hbar)``; nothing is propagated numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DecayError, GridError
from ..grid import EDGE_DECAY, PhaseGrid
from .eigen import Eigenpair, fd_eigensolve, harmonic_eigenstates, morse_bound_count, morse_eigenstate
from .potentials import Morse, Polynomial

NORM_TOL = 1e-10
ORTHO_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Basis:
    """Eigenpairs of one potential sampled on ``grid.u``."""

    grid: PhaseGrid
    energies: np.ndarray
    functions: np.ndarray
    potential: object = None
    label: str = ""

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        f = np.asarray(self.functions)
        if f.ndim != 2 or f.shape != (e.size, self.grid.n_u):
            raise GridError(f"basis functions shape {f.shape} does not match ({e.size}, {self.grid.n_u})")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "functions", f)

    @classmethod
    def from_pairs(cls, grid, pairs: list[Eigenpair], potential=None, label=""):
        return cls(grid, [p.energy for p in pairs], np.array([p.psi for p in pairs]), potential, label)

    @property
    def size(self) -> int:
        return self.energies.size

    def gram(self) -> np.ndarray:
        f = self.functions
        return (f.conj() @ f.T) * self.grid.du

    def orthonormality_error(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(self.size))))


def harmonic_basis(grid: PhaseGrid, V: Polynomial, n_max: int, check: bool = True) -> Basis:
    """Hermite functions ``0..n_max-1``."""
    pairs = harmonic_eigenstates(n_max - 1, grid, V, check=check)
    return Basis.from_pairs(grid, pairs, V, "harmonic")


def morse_basis(grid: PhaseGrid, V: Morse, n_max: int | None = None) -> Basis:
    count = morse_bound_count(V, grid.hbar)
    n_max = count if n_max is None else n_max
    pairs = [morse_eigenstate(n, V, grid) for n in range(n_max)]
    return Basis.from_pairs(grid, pairs, V, "morse")


def fd_basis(grid: PhaseGrid, V, n_max: int) -> Basis:
    return Basis.from_pairs(grid, fd_eigensolve(V, grid, n_max), V, "fd")


def auto_basis(grid: PhaseGrid, V, n_max: int) -> Basis:
    """Closed forms where available, the finite-difference solver otherwise."""
    if isinstance(V, Polynomial) and V.degree == 2 and V.coeffs[2] > 0:
        return harmonic_basis(grid, V, n_max)
    if isinstance(V, Morse):
        return morse_basis(grid, V, n_max)
    return fd_basis(grid, V, n_max)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Mixture ``sum_k P_k |Psi_k><Psi_k|`` with ``Psi_k = sum_n c_kn psi_n``.

    ``coefficients`` has shape ``(n_components, basis.size)``.
    """

    basis: Basis
    coefficients: np.ndarray
    weights: np.ndarray = None
    label: str = ""

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coefficients, dtype=complex))
        if c.shape[1] != self.basis.size:
            raise ValueError(f"{c.shape[1]} coefficients for a basis of size {self.basis.size}")
        w = np.ones(c.shape[0]) / c.shape[0] if self.weights is None else np.asarray(self.weights, float)
        if w.shape != (c.shape[0],) or np.any(w < 0):
            raise ValueError("weights must be non-negative, one per component")
        if abs(w.sum() - 1) > NORM_TOL:
            raise ValueError(f"weights sum to {w.sum()}, not 1")
        norms = np.sum(np.abs(c) ** 2, axis=1)
        if np.any(np.abs(norms - 1) > NORM_TOL):
            raise ValueError(f"component coefficients are not normalized: {norms}")
        used = np.any(c != 0, axis=0)
        sub = self.basis.gram()[np.ix_(used, used)]
        err = np.max(np.abs(sub - np.eye(sub.shape[0])))
        if err > ORTHO_TOL:
            raise ValueError(f"basis functions in use are not orthonormal on the grid (error {err:.1e})")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "weights", w)
        psi = self.psi(0.0)
        peak = np.abs(psi).max()
        edge = np.abs(psi[:, [0, -1]]).max()
        if edge > EDGE_DECAY * peak:
            raise DecayError(f"state has edge/max amplitude {edge / peak:.2e}; widen the grid")

    @property
    def grid(self) -> PhaseGrid:
        return self.basis.grid

    @property
    def hbar(self) -> float:
        return self.basis.grid.hbar

    @property
    def is_pure(self) -> bool:
        return self.coefficients.shape[0] == 1

    def phases(self, t: float) -> np.ndarray:
        return np.exp(-1j * self.basis.energies * t / self.hbar)

    def psi(self, t: float = 0.0) -> np.ndarray:
        """Component wavefunctions at time ``t`` on ``grid.u``, shape ``(n_components, n_u)``."""
        return (self.coefficients * self.phases(t)) @ self.basis.functions

    def dpsi_dt(self, t: float = 0.0) -> np.ndarray:
        rate = -1j * self.basis.energies / self.hbar
        return (self.coefficients * self.phases(t) * rate) @ self.basis.functions

    def active_energies(self) -> np.ndarray:
        used = np.any(self.coefficients != 0, axis=0)
        return self.basis.energies[used]

    def shortest_beat_period(self) -> float | None:
        e = self.active_energies()
        if e.size < 2:
            return None
        return 2 * np.pi * self.hbar / (e.max() - e.min())

    # constructors
    @classmethod
    def pure(cls, basis: Basis, n: int, label: str = "") -> "QuantumState":
        c = np.zeros(basis.size, complex)
        c[n] = 1.0
        return cls(basis, c, label=label or f"{basis.label} n={n}")

    @classmethod
    def superposition(cls, basis: Basis, coeffs: dict, label: str = "") -> "QuantumState":
        """Normalized superposition from ``{n: c_n}``."""
        c = np.zeros(basis.size, complex)
        for n, v in coeffs.items():
            c[int(n)] = v
        c /= np.linalg.norm(c)
        return cls(basis, c, label=label or f"{basis.label} superposition {sorted(coeffs)}")

    @classmethod
    def mixture(cls, basis: Basis, components: list, weights, label: str = "") -> "QuantumState":
        rows = []
        for comp in components:
            c = np.zeros(basis.size, complex)
            for n, v in (comp.items() if isinstance(comp, dict) else enumerate(comp)):
                c[int(n)] = v
            rows.append(c / np.linalg.norm(c))
        return cls(basis, np.array(rows), np.asarray(weights, float), label=label or "mixture")


def coherent_state(grid: PhaseGrid, V: Polynomial, alpha: complex, tail: float = 1e-16) -> QuantumState:
    """Harmonic-oscillator coherent state, truncated where the Poisson tail falls below ``tail``."""
    mean = abs(alpha) ** 2
    n_max = 0
    if mean > 0:
        # Poisson weights fall off faster than geometrically past the mean.
        while n_max < 200 and (n_max <= mean or
                               -mean + n_max * math.log(mean) - math.lgamma(n_max + 1) > math.log(tail)):
            n_max += 1
    basis = harmonic_basis(grid, V, n_max + 1, check=False)
    n = np.arange(n_max + 1)
    logmag = -0.5 * mean + n * (math.log(abs(alpha)) if alpha else 0.0) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n])
    c = np.exp(logmag) * np.exp(1j * np.angle(alpha) * n) if alpha else (n == 0).astype(complex)
    c /= np.linalg.norm(c)
    return QuantumState(basis, c, label=f"coherent alpha={alpha}")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """``rho(a, b) = sum_k P_k Psi_k(a) Psi_k(b)^*`` stored as component wavefunctions on ``grid.u``."""

    grid: PhaseGrid
    weights: np.ndarray
    psi: np.ndarray
    t: float = 0.0
    label: str = ""

    def matrix(self) -> np.ndarray:
        return np.einsum("k,ka,kb->ab", self.weights, self.psi, self.psi.conj())

    def rotated(self) -> np.ndarray:
        """``rho(x_i - y_k, x_i + y_k)`` of shape ``(n_x, n_y)``; zero outside the domain."""
        lo, hi, inside = self.grid.rotated_index
        out = np.zeros(self.grid.shape, complex)
        for w, f in zip(self.weights, self.psi):
            out += w * f[lo] * f[hi].conj()
        out[~inside] = 0.0
        return out

    def diagonal(self) -> np.ndarray:
        """``rho(u, u)`` on the refined lattice."""
        return np.einsum("k,ka->a", self.weights, np.abs(self.psi) ** 2)

    def trace(self) -> float:
        return float(self.diagonal().sum() * self.grid.du)

    def purity(self) -> float:
        ov = (self.psi.conj() @ self.psi.T) * self.grid.du
        return float(np.real(np.einsum("k,l,kl->", self.weights, self.weights, np.abs(ov) ** 2)))

    def hermiticity_error(self) -> float:
        m = self.matrix()
        return float(np.max(np.abs(m - m.conj().T)))


def density_matrix(state: QuantumState, t: float = 0.0) -> DensityMatrix:
    rho = DensityMatrix(state.grid, state.weights, state.psi(t), float(t), state.label)
    tr = rho.trace()
    if abs(tr - 1) > 1e-8:
        raise ValueError(f"density matrix trace {tr} deviates from 1")
    return rho


def momentum_amplitudes(grid: PhaseGrid, psi: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``(2 pi hbar)^(-1/2) sum_j psi(u_j) exp(-i q u_j / hbar) du`` for each row of ``psi``."""
    kernel = np.exp(-1j * np.outer(grid.u, q) / grid.hbar)
    return (np.atleast_2d(psi) @ kernel) * (grid.du / math.sqrt(2 * math.pi * grid.hbar))


@dataclass(frozen=True, eq=False)
class MomentumDensityMatrix:
    """``rho~(q, q')`` from momentum amplitudes on the lattice ``q_m = m dp/2``.

    ``m_offset`` is the lattice index of ``phi[:, 0]``.  The separation grid
    ``s_k = (k - n_s/2) dp/2`` uses ``n_s = n_y``.
    """

    grid: PhaseGrid
    weights: np.ndarray
    phi: np.ndarray
    m_offset: int
    t: float = 0.0
    label: str = ""

    @property
    def n_s(self) -> int:
        return self.grid.n_y

    @property
    def ds(self) -> float:
        return self.grid.dp / 2

    @property
    def s(self) -> np.ndarray:
        return (np.arange(self.n_s) - self.n_s // 2) * self.ds

    def rotated(self) -> np.ndarray:
        """``rho~(p_j - s_k, p_j + s_k)`` of shape ``(n_p, n_s)``."""
        g = self.grid
        j = 2 * (np.arange(g.n_p) - g.n_p // 2)[:, None]
        k = (np.arange(self.n_s) - self.n_s // 2)[None, :]
        lo = j - k - self.m_offset
        hi = j + k - self.m_offset
        out = np.zeros((g.n_p, self.n_s), complex)
        for w, f in zip(self.weights, self.phi):
            out += w * f[lo] * f[hi].conj()
        return out

    def diagonal(self) -> np.ndarray:
        """``rho~(p, p)`` on the momentum grid."""
        g = self.grid
        m = 2 * (np.arange(g.n_p) - g.n_p // 2) - self.m_offset
        return np.einsum("k,ka->a", self.weights, np.abs(self.phi[:, m]) ** 2)


def momentum_density_matrix(state: QuantumState, t: float = 0.0) -> MomentumDensityMatrix:
    g = state.grid
    half = g.n_p // 2
    m_lo = -2 * half - g.n_y // 2
    m_hi = 2 * (half - 1) + g.n_y // 2
    m = np.arange(m_lo, m_hi + 1)
    phi = momentum_amplitudes(g, state.psi(t), m * g.dp / 2)
    return MomentumDensityMatrix(g, state.weights, phi, m_lo, float(t), state.label)
