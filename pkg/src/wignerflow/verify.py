"""Identity checks: continuity, projections, Ehrenfest relations, Hudson positivity
and the threshold sweep for the Liouvillian verdict."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .current import current_integral
from .flow import divergence_w
from .grid import PhaseGrid, ScalarField, make_grid, p_to_y, spectral_derivative, y_to_p
from .model.potentials import Morse, Polynomial, harmonic
from .model.state import (
    QuantumState,
    coherent_state,
    density_matrix,
    harmonic_basis,
    momentum_amplitudes,
    morse_basis,
)
from .wigner import momentum_density, position_density, wigner_from_rho

NEGATIVITY_TOL = 1e-8
GAUSSIAN_TOL = 1e-6
LIOUVILLE_TOL = 1e-6
SWEEP_EPS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class CheckReport:
    name: str
    residual: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def record(self) -> dict:
        return {"name": self.name, "residual": float(self.residual), "tolerance": float(self.tolerance),
                "passed": self.passed, "details": self.details}


def _meta(state: QuantumState, V, t: float) -> dict:
    g = state.grid
    return {"state": state.label, "potential": V.kind, "t": float(t),
            "grid": [g.x_min, g.x_max, g.n_x, g.n_y]}


def _fields(state: QuantumState, V, t: float):
    rho = density_matrix(state, t)
    W = wigner_from_rho(rho, check=False)
    return rho, W, current_integral(rho, V, W)


def default_dt(state: QuantumState) -> float:
    period = state.shortest_beat_period()
    return 1e-4 * period if period else 1e-4


def divergence_J(J) -> ScalarField:
    return spectral_derivative(J.jx, "x", 1).with_values(
        spectral_derivative(J.jx, "x", 1).values + spectral_derivative(J.jp, "p", 1).values, "div_J")


# --------------------------------------------------------------------------- continuity


def continuity_residual(state: QuantumState, V, t: float, dt: float) -> float:
    """``max |[W(t+dt) - W(t-dt)]/(2dt) + div J(t)|``."""
    _, W, J = _fields(state, V, t)
    div = divergence_J(J).values
    if state.shortest_beat_period() is None:
        return float(np.max(np.abs(div)))
    Wp = wigner_from_rho(density_matrix(state, t + dt), check=False).values
    Wm = wigner_from_rho(density_matrix(state, t - dt), check=False).values
    return float(np.max(np.abs((Wp - Wm) / (2 * dt) + div)))


def check_continuity(state: QuantumState, V, t: float = 0.0, dt: float | None = None,
                     tol: float | None = None) -> CheckReport:
    """Continuity equation with a centred time difference and the spectral divergence of J.

    For a stationary state ``dW/dt = 0`` and the residual is ``max |div J|``.
    The default tolerance is a spectral floor plus an ``O(dt^2)`` allowance.
    """
    dt = default_dt(state) if dt is None else float(dt)
    tol = 1e-6 + 10 * dt * dt if tol is None else tol
    r = continuity_residual(state, V, t, dt)
    details = _meta(state, V, t) | {"dt": dt, "stationary": state.shortest_beat_period() is None}
    return CheckReport("continuity", r, tol, details)


def continuity_scaling(state: QuantumState, V, t: float = 0.0, dts=(1e-3, 1e-4, 1e-5)) -> list[tuple[float, float]]:
    return [(float(dt), continuity_residual(state, V, t, dt)) for dt in dts]


# --------------------------------------------------------------------------- projections


def _dpsi_du(grid: PhaseGrid, psi: np.ndarray) -> np.ndarray:
    n = psi.shape[-1]
    k = 2 * np.pi * np.fft.fftfreq(n, grid.du)
    k[n // 2] = 0.0
    return np.fft.ifft(np.fft.fft(psi, axis=-1) * 1j * k, axis=-1)


def probability_current(state: QuantumState, t: float) -> np.ndarray:
    """``sum_k P_k (hbar/M) Im(Psi_k^* dPsi_k/dx)`` on the coarse x-grid."""
    g = state.grid
    psi = state.psi(t)
    j = np.einsum("k,ka->a", state.weights, np.imag(psi.conj() * _dpsi_du(g, psi)))
    return (g.hbar / state.basis.potential.mass if state.basis.potential is not None else g.hbar) * j[::2]


def momentum_current(state: QuantumState, t: float) -> np.ndarray:
    """``-int_{-inf}^p d/dt rho~(p', p') dp'`` by a spectral antiderivative.

    The antiderivative divides the y-representation by ``2iy/hbar``; its
    constant is fixed so the value at the lower p edge is zero.
    """
    g = state.grid
    phi = momentum_amplitudes(g, state.psi(t), g.p)
    dphi = momentum_amplitudes(g, state.dpsi_dt(t), g.p)
    rate = np.einsum("k,ka->a", state.weights, 2 * np.real(phi.conj() * dphi))
    fy = p_to_y(g, rate)
    mult = np.zeros(g.n_y, complex)
    nz = g.y != 0
    mult[nz] = g.hbar / (2j * g.y[nz])
    mult[0] = 0.0
    F = y_to_p(g, fy * mult).real
    return -(F - F[0])


def check_projections(state: QuantumState, V, t: float = 0.0, tol: float = 1e-6) -> list[CheckReport]:
    """Marginals of ``J``: probability currents in x and p and the force balance."""
    g = state.grid
    rho, W, J = _fields(state, V, t)
    meta = _meta(state, V, t)
    out = []
    a = J.jx.values.sum(axis=1) * g.dp
    out.append(CheckReport("projection_jx_dp", float(np.max(np.abs(a - probability_current(state, t)))), tol, meta))
    b = J.jx.values.sum(axis=0) * g.dx
    out.append(CheckReport("projection_jx_dx",
                           float(np.max(np.abs(b - g.p / V.mass * momentum_density(state, t)))), tol, meta))
    c = J.jp.values.sum(axis=0) * g.dx
    out.append(CheckReport("projection_jp_dx", float(np.max(np.abs(c - momentum_current(state, t)))), tol, meta))
    d = J.jp.values.sum(axis=1) * g.dp
    ref = -position_density(state, t) * V.derivative(g.x)
    out.append(CheckReport("projection_jp_dp", float(np.max(np.abs(d - ref))), tol, meta))
    return out


# --------------------------------------------------------------------------- Ehrenfest


def _expect_x(state: QuantumState, t: float) -> float:
    g = state.grid
    rho = np.einsum("k,ka->a", state.weights, np.abs(state.psi(t)) ** 2)
    return float(np.sum(g.u * rho) * g.du)


def _expect_p(state: QuantumState, t: float) -> float:
    g = state.grid
    psi = state.psi(t)
    val = np.einsum("k,ka->", state.weights, np.imag(psi.conj() * _dpsi_du(g, psi)))
    return float(g.hbar * val * g.du)


def _expect_force(state: QuantumState, V, t: float) -> float:
    g = state.grid
    rho = np.einsum("k,ka->a", state.weights, np.abs(state.psi(t)) ** 2)
    return float(-np.sum(V.derivative(g.u) * rho) * g.du)


def ehrenfest_quantities(state: QuantumState, V, t: float = 0.0, dt: float | None = None) -> dict:
    dt = default_dt(state) if dt is None else float(dt)
    g = state.grid
    _, W, J = _fields(state, V, t)
    cell = g.dx * g.dp
    return {
        "A1": float(J.jx.values.sum() * cell),
        "A2": _expect_p(state, t) / V.mass,
        "A3": (_expect_x(state, t + dt) - _expect_x(state, t - dt)) / (2 * dt),
        "B1": float(J.jp.values.sum() * cell),
        "B2": _expect_force(state, V, t),
        "B3": (_expect_p(state, t + dt) - _expect_p(state, t - dt)) / (2 * dt),
    }


PAIRS = (("A1", "A2"), ("A2", "A3"), ("A1", "A3"), ("B1", "B2"), ("B2", "B3"), ("B1", "B3"))


def check_ehrenfest(state: QuantumState, V, t: float = 0.0, dt: float | None = None,
                    tol: float = 1e-6) -> list[CheckReport]:
    """Pairwise agreement of the phase-space integrals of ``J`` with ``<p>/M``,
    ``-<V'>`` and centred time derivatives of ``<x>`` and ``<p>``."""
    q = ehrenfest_quantities(state, V, t, dt)
    meta = _meta(state, V, t) | {k: q[k] for k in sorted(q)}
    return [CheckReport(f"ehrenfest_{a}_{b}", abs(q[a] - q[b]), tol, meta) for a, b in PAIRS]


# --------------------------------------------------------------------------- Hudson


def gaussian_fit(W: ScalarField) -> np.ndarray:
    """Gaussian with the first and second moments of ``W``."""
    g = W.grid
    X, P = g.meshgrid()
    cell = g.dx * g.dp
    w = W.values
    norm = w.sum() * cell
    mx, mp = (X * w).sum() * cell / norm, (P * w).sum() * cell / norm
    dx, dp = X - mx, P - mp
    cov = np.array([[(dx * dx * w).sum(), (dx * dp * w).sum()],
                    [(dx * dp * w).sum(), (dp * dp * w).sum()]]) * cell / norm
    det = np.linalg.det(cov)
    if det <= 0:
        return np.zeros_like(w)
    inv = np.linalg.inv(cov)
    q = inv[0, 0] * dx * dx + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp * dp
    return norm * np.exp(-0.5 * q) / (2 * math.pi * math.sqrt(det))


def check_hudson(W: ScalarField, tol: float = GAUSSIAN_TOL) -> CheckReport:
    """Minimum of ``W`` and the relative L2 distance to its moment-matched Gaussian.

    For a pure state a non-negative ``W`` must be Gaussian; the residual is that
    distance when ``W`` is non-negative and pure, and 0 otherwise.
    """
    g = W.grid
    w = W.values
    w_min = float(w.min())
    G = gaussian_fit(W)
    dist = float(np.linalg.norm(w - G) / np.linalg.norm(w))
    purity = float(2 * math.pi * g.hbar * np.sum(w * w) * g.dx * g.dp)
    negative = w_min < -NEGATIVITY_TOL * W.max_abs()
    if negative:
        label = "negative-somewhere"
    elif dist <= tol:
        label = "positive-gaussian"
    else:
        label = "positive-non-gaussian"
    pure = abs(purity - 1) < 1e-6
    residual = dist if (pure and not negative) else 0.0
    return CheckReport("hudson", residual, tol, {"min_w": w_min, "gaussian_distance": dist,
                                                 "purity": purity, "classification": label})


# --------------------------------------------------------------------------- threshold sweep


def check_epsilon_sweep(state: QuantumState, V, t: float = 0.0, eps_values=SWEEP_EPS,
                        tol: float = LIOUVILLE_TOL) -> CheckReport:
    """Liouvillian verdict ``sup |div w| <= tol`` over several mask thresholds.

    The verdict is expected to hold for quadratic potentials and to fail for
    every other one; the residual counts thresholds where it disagrees.
    """
    _, W, J = _fields(state, V, t)
    sups = [divergence_w(J, W, e).sup_unmasked() for e in eps_values]
    expect = isinstance(V, Polynomial) and V.degree <= 2
    wrong = sum((s <= tol) != expect for s in sups)
    details = _meta(state, V, t) | {"eps_w": list(eps_values), "sup_div_w": sups, "liouvillian_expected": expect}
    return CheckReport("eps_w_sweep", float(wrong), 0.0, details)


# --------------------------------------------------------------------------- suite


def run_suite(state: QuantumState, V, t: float = 0.0, dt: float | None = None) -> list[CheckReport]:
    """All checks for one state, ordered by name."""
    _, W, _ = _fields(state, V, t)
    stationary = state.shortest_beat_period() is None
    tol_e = 1e-8 if stationary else 1e-5
    reports = [check_continuity(state, V, t, dt), *check_projections(state, V, t),
               *check_ehrenfest(state, V, t, dt, tol=tol_e), check_hudson(W), check_epsilon_sweep(state, V, t)]
    return sorted(reports, key=lambda r: r.name)


def harmonic_grid() -> PhaseGrid:
    return make_grid(-8.0, 8.0, 128, 256)


def morse_grid() -> PhaseGrid:
    return make_grid(-6.0, 18.0, 256, 512)


def figure1_potential() -> Morse:
    return Morse(3.0, 1 / math.sqrt(6))


def standard_set() -> list[tuple[QuantumState, object]]:
    """Harmonic n=0,1,2, a coherent state, a harmonic (0,1) superposition,
    Morse n=0,1 and a Morse (0,1) superposition."""
    gh, Vh = harmonic_grid(), harmonic()
    hb = harmonic_basis(gh, Vh, 4)
    gm, Vm = morse_grid(), figure1_potential()
    mb = morse_basis(gm, Vm, 2)
    r = 1 / math.sqrt(2)
    return [
        (QuantumState.pure(hb, 0, "harmonic n=0"), Vh),
        (QuantumState.pure(hb, 1, "harmonic n=1"), Vh),
        (QuantumState.pure(hb, 2, "harmonic n=2"), Vh),
        (coherent_state(gh, Vh, 1.0), Vh),
        (QuantumState.superposition(hb, {0: r, 1: r}, "harmonic (0+1)/sqrt2"), Vh),
        (QuantumState.pure(mb, 0, "morse n=0"), Vm),
        (QuantumState.pure(mb, 1, "morse n=1"), Vm),
        (QuantumState.superposition(mb, {0: r, 1: r}, "morse (0+1)/sqrt2"), Vm),
    ]
