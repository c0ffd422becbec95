"""Wigner current: integral form, terminated Moyal series and the classical current."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, RealnessError, TruncationWarning
from .grid import ScalarField, VectorField, spectral_derivative, y_to_p
from .model.potentials import Polynomial
from .model.state import DensityMatrix

REALNESS_TOL = 1e-10
DEFAULT_NON_POLYNOMIAL_ORDER = 4


@dataclass(frozen=True, eq=False)
class CurrentField(VectorField):
    method: str = "integral"
    flags: dict = field(default_factory=dict)


def _jx(W: ScalarField, mass: float) -> ScalarField:
    return ScalarField(W.grid, W.values * (W.grid.p / mass)[None, :], "Jx")


def current_integral(rho: DensityMatrix, V, W: ScalarField) -> CurrentField:
    """Integral-form current.

    ``J_p(x, p) = -(1/(pi hbar)) sum_y K_x(y) rho(x-y, x+y) exp(2i p y/hbar) dy``
    with ``K_x(y) = [V(x+y) - V(x-y)]/(2y)`` and ``K_x(0) = V'(x)``.
    """
    g = W.grid
    if rho.grid != g:
        raise GridError("density matrix and Wigner function are on different grids")
    if abs(getattr(W, "t", rho.t) - rho.t) > 0:
        raise ValueError(f"density matrix at t={rho.t} but Wigner function at t={W.t}")
    kernel = V.difference_kernel(g.x[:, None], g.y[None, :])
    F = -y_to_p(g, kernel * rho.rotated())
    residue = float(np.max(np.abs(F.imag)))
    peak = float(np.max(np.abs(F.real)))
    if residue > REALNESS_TOL * max(peak, np.finfo(float).tiny):
        raise RealnessError(f"J_p imaginary residue {residue:.2e} vs max|J_p| {peak:.2e}")
    flags = {}
    kinks = V.kinks(g.x)
    if np.any(kinks):
        flags["kink_columns"] = [int(i) for i in np.nonzero(kinks)[0]]
    return CurrentField(_jx(W, V.mass), ScalarField(g, F.real, "Jp"), "integral", flags)


def moyal_order(V, L_max: int | None) -> tuple[int, bool]:
    """Number of quantum terms to keep and whether that truncates the series."""
    if not V.analytic:
        raise ValueError(f"the Moyal series needs an analytic potential, got {V.kind}")
    if isinstance(V, Polynomial):
        terminating = max(0, (V.degree - 1) // 2)
        if L_max is None:
            return terminating, False
        return min(L_max, terminating), L_max < terminating
    if L_max is None:
        raise ValueError(f"the Moyal series for a {V.kind} potential does not terminate; pass L_max")
    return L_max, True


def moyal_quantum_terms(W: ScalarField, V, L: int) -> list[np.ndarray]:
    """Per-order contributions to ``J_p``, ``l = 1..L``."""
    g = W.grid
    terms = []
    for l in range(1, L + 1):
        coef = (-1) ** l * (g.hbar / 2) ** (2 * l) / math.factorial(2 * l + 1)
        dW = spectral_derivative(W, "p", 2 * l).values
        terms.append(-coef * dW * V.derivative(g.x, 2 * l + 1)[:, None])
    return terms


def current_moyal(W: ScalarField, V, L_max: int | None = None) -> CurrentField:
    """Moyal-series current with spectral p-derivatives and exact x-derivatives of V."""
    L, truncated = moyal_order(V, L_max)
    if truncated:
        warnings.warn(f"Moyal series truncated after l={L} for {V.kind} potential",
                      TruncationWarning, stacklevel=2)
    g = W.grid
    jp = -W.values * V.derivative(g.x)[:, None]
    for term in moyal_quantum_terms(W, V, L):
        jp = jp + term
    return CurrentField(_jx(W, V.mass), ScalarField(g, jp, "Jp"), f"moyal({L})",
                        {"truncated": truncated})


def classical_current(W: ScalarField, V) -> CurrentField:
    """``j = W v`` with ``v = (p/M, -V'(x))``."""
    g = W.grid
    jx = ScalarField(g, W.values * (g.p / V.mass)[None, :], "jx_classical")
    jp = ScalarField(g, -W.values * V.derivative(g.x)[:, None], "jp_classical")
    return CurrentField(jx, jp, "classical")


def moyal_error_curve(W: ScalarField, V, reference: CurrentField, L_values) -> list[tuple[int, float]]:
    """Max-abs error of the truncated Moyal ``J_p`` against ``reference.jp``,
    relative to ``max|reference.jp|``, for each truncation order."""
    g = W.grid
    scale = reference.jp.max_abs()
    base = -W.values * V.derivative(g.x)[:, None]
    L_top = max(L_values)
    terms = moyal_quantum_terms(W, V, L_top)
    out = []
    for L in L_values:
        jp = base + sum(terms[:L], np.zeros_like(base))
        out.append((int(L), float(np.max(np.abs(jp - reference.jp.values)) / scale)))
    return out
