"""One-dimensional potentials ``V(x)`` together with the particle mass.

Every potential supplies ``value``, ``derivative`` and ``difference_kernel``;
the last evaluates ``[V(x+y) - V(x-y)] / (2y)`` with its ``y -> 0`` limit,
which is the weight of the integral-form momentum current.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P


def _sinhc(z):
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.sinh(z[nz]) / z[nz]
    return out


@dataclass(frozen=True)
class Polynomial:
    """``V(x) = sum_n coeffs[n] * x**n``."""

    coeffs: tuple
    mass: float = 1.0
    kind = "polynomial"
    analytic = True

    def __post_init__(self):
        c = [float(v) for v in np.atleast_1d(self.coeffs)]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not all(math.isfinite(v) for v in c):
            raise ValueError("polynomial coefficients must be finite")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_quadratic(self) -> bool:
        return self.degree <= 2

    def value(self, x):
        return P.polyval(np.asarray(x, dtype=float), self.coeffs)

    __call__ = value

    def derivative(self, x, order: int = 1):
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.value(x)
        if order > self.degree:
            return np.zeros_like(x)
        return P.polyval(x, P.polyder(self.coeffs, order))

    def difference_kernel(self, x, y):
        # Odd Taylor terms: sum_k V^(k)(x) y^(k-1) / k!, exact for polynomials.
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.zeros(x.shape)
        for k in range(self.degree, 0, -1):
            if k % 2:
                out = out + self.derivative(x, k) * y ** (k - 1) / math.factorial(k)
        return out

    def kinks(self, x):
        return np.zeros(np.shape(x), dtype=bool)

    def params(self) -> dict:
        return {"coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class Morse:
    """``V(x) = depth * (1 - exp(-range_ * x))**2``."""

    depth: float
    range_: float
    mass: float = 1.0
    kind = "morse"
    analytic = True
    degree = None

    def __post_init__(self):
        if not (self.depth > 0 and self.range_ > 0):
            raise ValueError(f"Morse needs depth > 0 and range > 0, got {self.depth}, {self.range_}")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    is_quadratic = False

    def value(self, x):
        return self.depth * (1.0 - np.exp(-self.range_ * np.asarray(x, dtype=float))) ** 2

    __call__ = value

    def derivative(self, x, order: int = 1):
        if order == 0:
            return self.value(x)
        a, D = self.range_, self.depth
        e = np.exp(-a * np.asarray(x, dtype=float))
        return D * (-2.0 * (-a) ** order * e + (-2.0 * a) ** order * e * e)

    def difference_kernel(self, x, y):
        a, D = self.range_, self.depth
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        e = np.exp(-a * x)
        return D * (2 * a * e * _sinhc(a * y) - 2 * a * e * e * _sinhc(2 * a * y))

    def kinks(self, x):
        return np.zeros(np.shape(x), dtype=bool)

    def params(self) -> dict:
        return {"depth": self.depth, "range": self.range_}


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear potential.

    ``slopes[0]`` applies left of ``breakpoints[0]``, ``slopes[i]`` between
    ``breakpoints[i-1]`` and ``breakpoints[i]``, and ``slopes[-1]`` right of the
    last breakpoint.  ``offset`` is ``V(breakpoints[0])``.
    """

    breakpoints: tuple
    slopes: tuple
    offset: float = 0.0
    mass: float = 1.0
    kind = "piecewise"
    analytic = False
    degree = None
    is_quadratic = False

    def __post_init__(self):
        b = tuple(float(v) for v in np.atleast_1d(self.breakpoints))
        s = tuple(float(v) for v in np.atleast_1d(self.slopes))
        if len(b) < 1 or len(s) != len(b) + 1:
            raise ValueError("need at least one breakpoint and len(slopes) == len(breakpoints) + 1")
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not all(map(math.isfinite, b + s + (self.offset,))):
            raise ValueError("piecewise parameters must be finite")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "slopes", s)

    @property
    def _knot_values(self):
        b, s = self.breakpoints, self.slopes
        v = [self.offset]
        for i in range(1, len(b)):
            v.append(v[-1] + s[i] * (b[i] - b[i - 1]))
        return np.array(v)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        b = np.array(self.breakpoints)
        s = np.array(self.slopes)
        seg = np.searchsorted(b, x, side="right")
        ref = np.maximum(seg - 1, 0)
        return self._knot_values[ref] + s[seg] * (x - b[ref])

    __call__ = value

    def derivative(self, x, order: int = 1):
        """Slope; at a breakpoint the mean of the one-sided slopes."""
        if order == 0:
            return self.value(x)
        if order > 1:
            raise ValueError("piecewise-linear potential has no derivatives beyond first order")
        x = np.asarray(x, dtype=float)
        b = np.array(self.breakpoints)
        s = np.array(self.slopes)
        right = s[np.searchsorted(b, x, side="right")]
        left = s[np.searchsorted(b, x, side="left")]
        return 0.5 * (left + right)

    def difference_kernel(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.empty(x.shape)
        nz = y != 0
        out[nz] = (self.value(x[nz] + y[nz]) - self.value(x[nz] - y[nz])) / (2 * y[nz])
        out[~nz] = self.derivative(x[~nz])
        return out

    def kinks(self, x):
        return np.isin(np.asarray(x, dtype=float), np.array(self.breakpoints))

    def params(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "slopes": list(self.slopes), "offset": self.offset}


PotentialModel = Polynomial | Morse | PiecewiseLinear


def harmonic(K: float = 1.0, mass: float = 1.0) -> Polynomial:
    return Polynomial((0.0, 0.0, 0.5 * K), mass=mass)


def eval_potential(V: PotentialModel, x):
    return V.value(x)
