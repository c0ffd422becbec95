"""Phase-space grids, the half-Fourier transform y <-> p and spectral derivatives.

Conventions
-----------
The position grid ``x`` has ``n_x`` points ``x_min + i*dx`` with
``dx = (x_max - x_min)/n_x``.  Wavefunctions live on a refined lattice ``u``
with step ``dx/2`` so that every pair ``x_i -/+ y_k`` with ``y_k = k*dx/2`` is a
lattice point.  The separation grid ``y`` and the momentum grid ``p`` are
conjugate under the kernel ``exp(2i p y / hbar)``::

    y_k = (k - n_y/2) * dy,     dy = dx/2
    p_j = (j - n_y/2) * dp,     dp = pi*hbar / (n_y*dy)

so that ``p = 0`` sits at index ``n_y//2``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import EdgeDecayWarning, GridError

EDGE_DECAY = 1e-8


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PhaseGrid:
    x_min: float
    x_max: float
    n_x: int
    n_y: int
    hbar: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_max <= self.x_min:
            raise GridError(f"degenerate domain [{self.x_min}, {self.x_max}]")
        if self.n_x < 8 or self.n_y < 8:
            raise GridError(f"need n_x >= 8 and n_y >= 8, got n_x={self.n_x}, n_y={self.n_y}")
        if self.n_y & (self.n_y - 1):
            raise GridError(f"n_y must be a power of two, got {self.n_y}")
        if self.n_y > 2 * self.n_x:
            # Keeps max|y| <= half the x-extent.
            raise GridError(f"n_y={self.n_y} exceeds 2*n_x={2 * self.n_x}")
        if not self.hbar > 0:
            raise GridError(f"hbar must be positive, got {self.hbar}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dy(self) -> float:
        return self.dx / 2

    @property
    def du(self) -> float:
        """Step of the refined wavefunction lattice."""
        return self.dx / 2

    @property
    def dp(self) -> float:
        return np.pi * self.hbar / (self.n_y * self.dy)

    @property
    def n_p(self) -> int:
        return self.n_y

    @property
    def n_u(self) -> int:
        return 2 * self.n_x

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_y)

    @property
    def p_min(self) -> float:
        return -(self.n_y // 2) * self.dp

    @cached_property
    def x(self) -> np.ndarray:
        return _readonly(self.x_min + np.arange(self.n_x) * self.dx)

    @cached_property
    def u(self) -> np.ndarray:
        return _readonly(self.x_min + np.arange(self.n_u) * self.du)

    @cached_property
    def y(self) -> np.ndarray:
        return _readonly((np.arange(self.n_y) - self.n_y // 2) * self.dy)

    @cached_property
    def p(self) -> np.ndarray:
        return _readonly((np.arange(self.n_y) - self.n_y // 2) * self.dp)

    @cached_property
    def rotated_index(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Lattice indices of ``x_i - y_k`` and ``x_i + y_k`` and their validity.

        Returns ``(lo, hi, inside)``, each of shape ``(n_x, n_y)``; ``lo`` and
        ``hi`` are clipped into range, ``inside`` flags pairs where both points
        fall inside the domain.
        """
        i = 2 * np.arange(self.n_x)[:, None]
        k = np.arange(self.n_y)[None, :] - self.n_y // 2
        lo, hi = i - k, i + k
        inside = (lo >= 0) & (lo < self.n_u) & (hi >= 0) & (hi < self.n_u)
        return (_readonly(np.clip(lo, 0, self.n_u - 1)), _readonly(np.clip(hi, 0, self.n_u - 1)),
                _readonly(inside))

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.p, indexing="ij")

    def locate(self, x: float, p: float) -> tuple[int, int]:
        """Indices of the grid node nearest to ``(x, p)``."""
        i = int(round((x - self.x_min) / self.dx))
        j = int(round(p / self.dp)) + self.n_y // 2
        return i, j

    def contains(self, x: float, p: float) -> bool:
        return bool(self.x[0] <= x <= self.x[-1] and self.p[0] <= p <= self.p[-1])


def make_grid(x_min: float, x_max: float, n_x: int, n_y: int, hbar: float = 1.0) -> PhaseGrid:
    return PhaseGrid(float(x_min), float(x_max), int(n_x), int(n_y), float(hbar))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples on a :class:`PhaseGrid`, shape ``(n_x, n_p)``, row-major in x."""

    grid: PhaseGrid
    values: np.ndarray
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"field {self.name!r} has non-finite values")
        object.__setattr__(self, "values", _readonly(v))

    def with_values(self, values, name: str | None = None) -> "ScalarField":
        return ScalarField(self.grid, values, self.name if name is None else name)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.dx * self.grid.dp)


@dataclass(frozen=True, eq=False)
class VectorField:
    jx: ScalarField
    jp: ScalarField

    def __post_init__(self):
        if self.jx.grid != self.jp.grid:
            raise GridError("vector components live on different grids")

    @property
    def grid(self) -> PhaseGrid:
        return self.jx.grid

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.jx.values, self.jp.values)


def require_same_grid(*fields) -> PhaseGrid:
    grids = {id(f.grid): f.grid for f in fields}
    first = fields[0].grid
    for g in grids.values():
        if g != first:
            raise GridError("fields are defined on different grids")
    return first


def y_to_p(grid: PhaseGrid, f: np.ndarray) -> np.ndarray:
    """``(1/(pi hbar)) * sum_k f(y_k) exp(2i p_j y_k / hbar) dy`` along the last axis."""
    n = grid.n_y
    F = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(f, axes=-1), axis=-1), axes=-1)
    return F * (n * grid.dy / (np.pi * grid.hbar))


def p_to_y(grid: PhaseGrid, F: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`y_to_p`."""
    n = grid.n_y
    f = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(F, axes=-1), axis=-1), axes=-1)
    return f * (np.pi * grid.hbar / (n * grid.dy))


def check_edge_decay(values: np.ndarray, axis: int, what: str = "field", tol: float = EDGE_DECAY) -> float:
    """Return edge/max ratio along ``axis``; warn if it exceeds ``tol``."""
    a = np.abs(np.asarray(values))
    peak = a.max()
    if peak == 0:
        return 0.0
    edge = max(np.take(a, 0, axis=axis).max(), np.take(a, -1, axis=axis).max())
    ratio = float(edge / peak)
    if ratio > tol:
        warnings.warn(f"{what} does not decay at the grid edge (edge/max = {ratio:.2e})",
                      EdgeDecayWarning, stacklevel=3)
    return ratio


def spectral_derivative(f: ScalarField, axis: str, order: int = 1) -> ScalarField:
    """FFT derivative of ``f`` of the given order along ``axis`` ('x' or 'p').

    The field is treated as compactly supported; a warning is issued when it
    is not negligible at the edges of the chosen axis.
    """
    grid = f.grid
    if axis not in ("x", "p"):
        raise ValueError(f"axis must be 'x' or 'p', got {axis!r}")
    ax = 0 if axis == "x" else 1
    n = grid.shape[ax]
    if order < 0 or order > n // 2:
        raise ValueError(f"derivative order {order} not in [0, {n // 2}] for axis {axis}")
    if order == 0:
        return f.with_values(f.values)
    check_edge_decay(f.values, ax, f"field {f.name!r} along {axis}")
    if ax == 0:
        k = 2 * np.pi * np.fft.fftfreq(n, grid.dx)
        mult = (1j * k) ** order
        if order % 2:
            mult[n // 2] = 0.0
        out = np.fft.ifft(np.fft.fft(f.values, axis=0) * mult[:, None], axis=0)
    else:
        # Conjugate variable of p is 2y/hbar.
        mult = (2j * grid.y / grid.hbar) ** order
        if order % 2:
            mult[0] = 0.0
        out = y_to_p(grid, p_to_y(grid, f.values) * mult)
    return f.with_values(out.real, name=f"d{axis}^{order} {f.name}".strip())
