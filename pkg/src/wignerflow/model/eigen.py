"""Bound eigenstates: harmonic (Hermite functions), Morse (associated Laguerre
closed form) and a three-point finite-difference solver used as an oracle.

All eigenfunctions are sampled on the refined lattice ``grid.u``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_genlaguerre, gammaln

from ..errors import BoundStateError, DecayError, DiscretizationError, EdgeDecayWarning
from ..grid import EDGE_DECAY, PhaseGrid
from .potentials import Morse, Polynomial


@dataclass(frozen=True, eq=False)
class Eigenpair:
    energy: float
    psi: np.ndarray
    n: int


def _check_decay(psi: np.ndarray, what: str, tol: float = EDGE_DECAY) -> None:
    peak = np.max(np.abs(psi))
    edge = max(abs(psi[0]), abs(psi[-1]))
    if edge > tol * peak:
        raise DecayError(f"{what} has edge/max = {edge / peak:.2e} > {tol:g}; widen the grid")


def _fix_sign(psi: np.ndarray) -> np.ndarray:
    # Positive in the right-hand tail, matching the closed forms.
    a = np.abs(psi)
    idx = np.nonzero(a > 1e-3 * a.max())[0][-1]
    return psi if psi[idx] > 0 else -psi


def harmonic_parameters(V: Polynomial, hbar: float) -> tuple[float, float, float]:
    """``(omega, x0, v_min)`` of a quadratic polynomial with positive curvature."""
    if not (isinstance(V, Polynomial) and V.degree == 2 and V.coeffs[2] > 0):
        raise ValueError("harmonic eigenstates need a quadratic polynomial with positive curvature")
    c0, c1, c2 = V.coeffs
    K = 2 * c2
    return math.sqrt(K / V.mass), -c1 / K, c0 - c1 * c1 / (4 * c2)


def hermite_functions(n_max: int, xi: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions (in ``xi``) ``h_0..h_{n_max}`` by the stable recurrence."""
    out = np.empty((n_max + 1, xi.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xi * xi)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def harmonic_eigenstates(n_max: int, grid: PhaseGrid, V: Polynomial, check: bool = True) -> list[Eigenpair]:
    omega, x0, vmin = harmonic_parameters(V, grid.hbar)
    alpha = V.mass * omega / grid.hbar
    h = hermite_functions(n_max, math.sqrt(alpha) * (grid.u - x0)) * alpha ** 0.25
    pairs = []
    for n in range(n_max + 1):
        if check:
            _check_decay(h[n], f"harmonic eigenstate n={n}")
        pairs.append(Eigenpair(grid.hbar * omega * (n + 0.5) + vmin, h[n], n))
    return pairs


def harmonic_eigenstate(n: int, grid: PhaseGrid, V: Polynomial) -> Eigenpair:
    """Hermite-function eigenstate ``n`` of ``V = K/2 (x-x0)^2 + const``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return harmonic_eigenstates(n, grid, V)[n]


def morse_lambda(V: Morse, hbar: float) -> float:
    return math.sqrt(2 * V.mass * V.depth) / (V.range_ * hbar)


def morse_bound_count(V: Morse, hbar: float) -> int:
    """Number of bound states: ``n`` with ``lambda - n - 1/2 > 0``."""
    return max(0, math.ceil(morse_lambda(V, hbar) - 0.5))


def morse_energy(n: int, V: Morse, hbar: float) -> float:
    w0 = V.range_ * math.sqrt(2 * V.depth / V.mass)
    e = hbar * w0 * (n + 0.5)
    return e - e * e / (4 * V.depth)


def morse_eigenstate(n: int, V: Morse, grid: PhaseGrid, check: bool = True) -> Eigenpair:
    """Bound state ``n`` of the Morse oscillator from the Laguerre closed form.

    ``psi_n = N z^s exp(-z/2) L_n^(2s)(z)`` with ``z = 2 lambda exp(-a x)`` and
    ``s = lambda - n - 1/2``; the normalization is assembled in log space.
    """
    lam = morse_lambda(V, grid.hbar)
    count = morse_bound_count(V, grid.hbar)
    if not 0 <= n < count:
        raise BoundStateError(f"Morse state n={n} requested but only {count} bound states exist")
    a = V.range_
    s = lam - n - 0.5
    log_norm = 0.5 * (gammaln(n + 1) + math.log(2 * s) + math.log(a) - gammaln(2 * lam - n))
    log_z = math.log(2 * lam) - a * grid.u
    z = np.exp(log_z)
    lag = eval_genlaguerre(n, 2 * s, z)
    with np.errstate(over="ignore", under="ignore"):
        psi = np.exp(log_norm + s * log_z - 0.5 * z) * lag
    if check:
        _check_decay(psi, f"Morse eigenstate n={n}")
    return Eigenpair(morse_energy(n, V, grid.hbar), psi, n)


def fd_eigensolve(V, grid: PhaseGrid, n_max: int) -> list[Eigenpair]:
    """Lowest ``n_max`` eigenpairs of the three-point finite-difference Hamiltonian.

    Dirichlet boundaries on the refined lattice ``grid.u``; eigenvectors are
    normalized with the lattice step and signed positive in the right tail.
    """
    if n_max <= 0:
        return []
    if n_max > grid.n_u // 4:
        raise DiscretizationError(f"n_max={n_max} too large for a lattice of {grid.n_u} points")
    h = grid.du
    v = np.asarray(V.value(grid.u), dtype=float)
    if not np.all(np.isfinite(v)):
        raise DiscretizationError("potential is not finite on the lattice")
    t = grid.hbar ** 2 / (2 * V.mass * h * h)
    diag = v + 2 * t
    off = np.full(grid.n_u - 1, -t)
    evals, evecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_max - 1))
    if np.any(np.diff(evals) <= 1e-12 * max(1.0, np.abs(evals).max())):
        raise DiscretizationError("degenerate finite-difference spectrum; refine the lattice")
    out = []
    for n in range(n_max):
        psi = evecs[:, n] / math.sqrt(h)
        psi = _fix_sign(psi)
        band = np.abs(np.r_[psi[:5], psi[-5:]]).max() / np.abs(psi).max()
        if band > 1e-6:
            warnings.warn(f"FD eigenstate n={n} touches the box edge (edge/max = {band:.1e})",
                          EdgeDecayWarning, stacklevel=2)
        out.append(Eigenpair(float(evals[n]), psi, n))
    return out
