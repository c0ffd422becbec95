"""Velocity field ``w = J/W``, its divergence, the Liouvillian residual,
stagnation points with Poincare-Hopf indices and fieldline integration."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.signal import resample

from .grid import ScalarField, VectorField, p_to_y, require_same_grid, spectral_derivative, y_to_p

DEFAULT_EPS_W = 1e-3


# --------------------------------------------------------------------------- velocity


@dataclass(frozen=True, eq=False)
class VelocityField:
    w: VectorField
    mask: np.ndarray
    removable: np.ndarray
    eps_w: float


def zero_crossings(W: ScalarField) -> np.ndarray:
    """Samples with a 4-neighbour of opposite sign: the zero contour passes through their cell."""
    s = np.sign(W.values)
    out = np.zeros(W.grid.shape, dtype=bool)
    for axis in (0, 1):
        flip = np.delete(s, -1, axis=axis) * np.delete(s, 0, axis=axis) < 0
        lo = [slice(None), slice(None)]
        hi = [slice(None), slice(None)]
        lo[axis], hi[axis] = slice(None, -1), slice(1, None)
        out[tuple(lo)] |= flip
        out[tuple(hi)] |= flip
    return out


def singular_mask(W: ScalarField, eps_w: float, crossings: bool = True) -> np.ndarray:
    """``|W| <= eps_w max|W|``, plus the zero-crossing samples when ``crossings``."""
    mask = np.abs(W.values) <= eps_w * W.max_abs()
    if crossings:
        mask |= zero_crossings(W)
    return mask


def velocity_field(J: VectorField, W: ScalarField, eps_w: float = DEFAULT_EPS_W, V=None,
                   removable_tol: float = 1e-8, crossings: bool = True) -> VelocityField:
    """``w = J/W`` outside the singular mask (see ``singular_mask``).

    ``w_x = p/M`` is set exactly.  When ``V`` is given, small-``|W|`` cells whose
    Liouvillian residual ``J_p + W V'`` is negligible are treated as removable
    singularities and receive the classical value ``-V'(x)``; the rest are masked
    and carry zeros.
    """
    g = require_same_grid(J.jx, J.jp, W)
    small = singular_mask(W, eps_w, crossings)
    mass = V.mass if V is not None else _mass_from(J, W)
    wx = np.broadcast_to((g.p / mass)[None, :], g.shape).copy()
    wp = np.zeros(g.shape)
    ok = ~small
    wp[ok] = J.jp.values[ok] / W.values[ok]
    removable = np.zeros(g.shape, dtype=bool)
    if V is not None:
        force = V.derivative(g.x)[:, None] * np.ones(g.shape)
        resid = np.abs(J.jp.values + W.values * force)
        removable = small & (resid <= removable_tol * J.jp.max_abs())
        wp[removable] = -force[removable]
    mask = small & ~removable
    wx[mask] = 0.0
    w = VectorField(ScalarField(g, wx, "wx"), ScalarField(g, wp, "wp"))
    return VelocityField(w, mask, removable, eps_w)


def _mass_from(J: VectorField, W: ScalarField) -> float:
    # M from J_x = p W / M at the largest |p W| sample.
    pw = W.values * W.grid.p[None, :]
    idx = np.unravel_index(np.argmax(np.abs(pw)), pw.shape)
    return float(pw[idx] / J.jx.values[idx]) if J.jx.values[idx] else 1.0


# --------------------------------------------------------------------------- divergence


@dataclass(frozen=True, eq=False)
class DivergenceMap:
    field: ScalarField
    mask: np.ndarray
    eps_w: float

    @property
    def arctan(self) -> ScalarField:
        """``(2/pi) arctan(div w)``; masked cells are 0."""
        return self.field.with_values(2 / np.pi * np.arctan(self.field.values), "div_w_arctan")

    def sup_unmasked(self) -> float:
        vals = np.abs(self.field.values[~self.mask])
        return float(vals.max()) if vals.size else 0.0


def divergence_w(J: VectorField, W: ScalarField, eps_w: float = DEFAULT_EPS_W,
                 method: str = "quotient", crossings: bool = True) -> DivergenceMap:
    """``div w = d/dp (J_p / W)`` on unmasked cells.

    The mask is ``singular_mask(W, eps_w, crossings)``.
    ``method='quotient'`` uses ``(W dJ_p - J_p dW) / W^2`` with spectral
    p-derivatives of ``J_p`` and ``W``.  ``method='direct'`` differentiates the
    ratio spectrally and only applies to p-columns with no masked cell; other
    columns are added to the mask.  The ``d/dx (p/M)`` term vanishes exactly.
    """
    g = require_same_grid(J.jx, J.jp, W)
    mask = singular_mask(W, eps_w, crossings)
    ok = ~mask
    div = np.zeros(g.shape)
    if method == "quotient":
        dJ = spectral_derivative(J.jp, "p", 1).values
        dW = spectral_derivative(W, "p", 1).values
        Wv, Jv = W.values[ok], J.jp.values[ok]
        div[ok] = (dJ[ok] * Wv - Jv * dW[ok]) / (Wv * Wv)
    elif method == "direct":
        full = np.all(ok, axis=1)
        ratio = np.zeros(g.shape)
        ratio[full] = J.jp.values[full] / W.values[full]
        mult = 2j * g.y / g.hbar
        mult[0] = 0.0
        d = y_to_p(g, p_to_y(g, ratio) * mult).real
        div[full] = d[full]
        mask = mask | ~full[:, None]
    else:
        raise ValueError(f"unknown method {method!r}")
    return DivergenceMap(ScalarField(g, div, "div_w"), mask, eps_w)


def divergence_sup(J: VectorField, W: ScalarField, eps_values, oversample: int = 8,
                   chunk: int = 256) -> list[float]:
    """Unmasked ``sup |div w|`` for each threshold in ``eps_values``.

    The grid samples only approach the zero contour of ``W`` to within one cell,
    which caps the sup once ``eps_w`` drops below the closest sample.  Here ``W``,
    ``J_p`` and their spectral p-derivatives are band-limited interpolated onto a
    lattice ``oversample`` times finer in both directions before the quotient
    form is evaluated.  Only the threshold part of the mask applies;
    ``oversample=1`` matches ``divergence_w(..., crossings=False)``.
    """
    g = require_same_grid(J.jx, J.jp, W)
    k = int(oversample)
    if k < 1:
        raise ValueError("oversample must be >= 1")
    arrays = [W.values, J.jp.values, spectral_derivative(W, "p", 1).values,
              spectral_derivative(J.jp, "p", 1).values]
    if k > 1:
        arrays = [resample(a, g.n_x * k, axis=0) for a in arrays]
    thresholds = np.asarray(eps_values, dtype=float) * W.max_abs()
    sup = np.zeros(len(thresholds))
    for start in range(0, arrays[0].shape[0], chunk):
        rows = [a[start:start + chunk] for a in arrays]
        if k > 1:
            rows = [resample(a, g.n_p * k, axis=1) for a in rows]
        w, jp, dw, djp = rows
        aw = np.abs(w)
        for n, thr in enumerate(thresholds):
            ok = aw > thr
            if np.any(ok):
                div = (djp[ok] * w[ok] - jp[ok] * dw[ok]) / (w[ok] * w[ok])
                sup[n] = max(sup[n], float(np.abs(div).max()))
    return [float(v) for v in sup]


# --------------------------------------------------------------------------- Liouville residual


@dataclass(frozen=True, eq=False)
class LiouvilleResidual:
    """``R = J_p + W V'`` and its best p-independent correction ``R ~ -W dV'(x)``."""

    residual: ScalarField
    dV_prime: np.ndarray
    post_fit: ScalarField
    scale: float

    def norm(self, which: str = "post_fit") -> float:
        g = self.residual.grid
        f = getattr(self, which).values
        return float(np.sqrt(np.sum(f * f) * g.dx * g.dp))

    @property
    def max_abs(self) -> float:
        return self.residual.max_abs()

    @property
    def post_fit_relative(self) -> float:
        return self.post_fit.max_abs() / self.scale if self.scale else 0.0


def liouville_residual(J: VectorField, W: ScalarField, V) -> LiouvilleResidual:
    g = require_same_grid(J.jx, J.jp, W)
    R = J.jp.values + W.values * V.derivative(g.x)[:, None]
    ww = np.sum(W.values * W.values, axis=1)
    rw = np.sum(R * W.values, axis=1)
    # The per-column fit is scale-free; only empty columns are skipped.
    usable = ww > 0
    dvp = np.zeros(g.n_x)
    dvp[usable] = -rw[usable] / ww[usable]
    post = R + W.values * dvp[:, None]
    return LiouvilleResidual(ScalarField(g, R, "liouville_residual"), dvp,
                             ScalarField(g, post, "liouville_post_fit"), J.jp.max_abs())


# --------------------------------------------------------------------------- stagnation points


@dataclass(frozen=True)
class StagnationPoint:
    x: float
    p: float
    omega: int
    residual: float
    winding: float = float("nan")
    quantization_error: float = float("nan")
    indeterminate: bool = False

    def record(self) -> dict:
        return {"x": self.x, "p": self.p, "omega": self.omega, "residual": self.residual,
                "winding": self.winding, "quantization_error": self.quantization_error,
                "indeterminate": self.indeterminate}


def _bilinear_root(a, b):
    """Zero of two bilinear interpolants on the unit cell, corners ``[00, 10, 01, 11]``."""

    def f(c, s, t):
        return c[0] * (1 - s) * (1 - t) + c[1] * s * (1 - t) + c[2] * (1 - s) * t + c[3] * s * t

    def grad(c, s, t):
        return ((c[1] - c[0]) * (1 - t) + (c[3] - c[2]) * t, (c[2] - c[0]) * (1 - s) + (c[3] - c[1]) * s)

    for s, t in ((0.5, 0.5), (0.1, 0.1), (0.9, 0.1), (0.1, 0.9), (0.9, 0.9)):
        for _ in range(30):
            fa, fb = f(a, s, t), f(b, s, t)
            (a1, a2), (b1, b2) = grad(a, s, t), grad(b, s, t)
            det = a1 * b2 - a2 * b1
            if det == 0:
                break
            ds = (fa * b2 - fb * a2) / det
            dt = (a1 * fb - b1 * fa) / det
            s, t = s - ds, t - dt
            if abs(ds) + abs(dt) < 1e-13:
                break
        if -1e-9 <= s <= 1 + 1e-9 and -1e-9 <= t <= 1 + 1e-9 and abs(f(a, s, t)) + abs(f(b, s, t)) < 1e-10 * (
                np.abs(a).max() + np.abs(b).max() + 1e-300):
            return min(max(s, 0.0), 1.0), min(max(t, 0.0), 1.0)
    return None


def _loop_winding(A, B, i0, j0, radius, refine):
    """Winding of ``(A, B)`` around the node block ``[i0-r, i0+1+r] x [j0-r, j0+1+r]``.

    Returns ``(winding, min |J| on the loop)``; ``None`` if the block leaves the grid.
    """
    n_x, n_p = A.shape
    lo_i, hi_i, lo_j, hi_j = i0 - radius, i0 + 1 + radius, j0 - radius, j0 + 1 + radius
    if lo_i < 0 or lo_j < 0 or hi_i >= n_x or hi_j >= n_p:
        return None
    corners = [(lo_i, lo_j), (hi_i, lo_j), (hi_i, hi_j), (lo_i, hi_j)]
    pts = []
    for (ia, ja), (ib, jb) in zip(corners, corners[1:] + corners[:1]):
        n_seg = max(abs(ib - ia), abs(jb - ja)) * refine
        for k in range(n_seg):
            pts.append((ia + (ib - ia) * k / n_seg, ja + (jb - ja) * k / n_seg))
    pts = np.array(pts)
    fi, fj = pts[:, 0], pts[:, 1]
    i = np.minimum(np.floor(fi).astype(int), n_x - 2)
    j = np.minimum(np.floor(fj).astype(int), n_p - 2)
    s, t = fi - i, fj - j

    def interp(F):
        return (F[i, j] * (1 - s) * (1 - t) + F[i + 1, j] * s * (1 - t)
                + F[i, j + 1] * (1 - s) * t + F[i + 1, j + 1] * s * t)

    a, b = interp(A), interp(B)
    theta = np.arctan2(b, a)
    d = np.diff(np.r_[theta, theta[0]])
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return d.sum() / (2 * np.pi), float(np.hypot(a, b).min())


def stagnation_points(J: VectorField, search_window=None, loop_radius: int = 1, loop_refine: int = 2,
                      floor: float = 1e-8, merge_cells: float = 1.0) -> list[StagnationPoint]:
    """Zeros of ``J`` with their Poincare-Hopf indices.

    Candidate cells show a sign change in both components; the zero is located
    by bilinear sub-cell interpolation and polished on a bicubic spline.  The
    index is the winding number of ``J`` around the ``(2r+1) x (2r+1)`` block of
    cells centred on the candidate, sampled ``loop_refine`` times per cell edge.
    Cells where ``|J|`` is below ``floor * max|J|`` everywhere are numerically
    field-free and skipped; loops touching such values are flagged
    ``indeterminate``.

    ``search_window`` is ``(x_lo, x_hi, p_lo, p_hi)`` or ``None`` for the full grid.
    """
    g = J.grid
    A, B = J.jx.values, J.jp.values
    scale = float(np.hypot(A, B).max())
    if scale == 0:
        return []
    thr = floor * scale

    def corners(F):
        return np.stack([F[:-1, :-1], F[1:, :-1], F[:-1, 1:], F[1:, 1:]])

    cA, cB = corners(A), corners(B)
    cand = ((cA.min(0) <= 0) & (cA.max(0) >= 0) & (cB.min(0) <= 0) & (cB.max(0) >= 0)
            & (np.hypot(cA, cB).max(0) >= thr))
    if search_window is not None:
        x_lo, x_hi, p_lo, p_hi = search_window
        xc = g.x[:-1, None] + 0 * g.p[None, :-1]
        pc = g.p[None, :-1] + 0 * g.x[:-1, None]
        cand &= (xc >= x_lo) & (xc + g.dx <= x_hi) & (pc >= p_lo) & (pc + g.dp <= p_hi)
    idx = np.argwhere(cand)
    if idx.size == 0:
        return []
    sA = RectBivariateSpline(g.x, g.p, A, kx=3, ky=3, s=0)
    sB = RectBivariateSpline(g.x, g.p, B, kx=3, ky=3, s=0)
    found: list[StagnationPoint] = []
    for i, j in idx:
        root = _bilinear_root(cA[:, i, j], cB[:, i, j])
        if root is None:
            continue
        x = g.x[i] + root[0] * g.dx
        p = g.p[j] + root[1] * g.dp
        x, p = _polish(sA, sB, x, p, g.dx, g.dp)
        if any(abs(q.x - x) <= merge_cells * g.dx and abs(q.p - p) <= merge_cells * g.dp for q in found):
            continue
        residual = float(math.hypot(sA.ev(x, p), sB.ev(x, p)))
        ii = min(max(int(math.floor((x - g.x_min) / g.dx)), 0), g.n_x - 2)
        jj = min(max(int(math.floor((p - g.p[0]) / g.dp)), 0), g.n_p - 2)
        loop = _loop_winding(A, B, ii, jj, loop_radius, loop_refine)
        if loop is None:
            found.append(StagnationPoint(float(x), float(p), 0, residual, indeterminate=True))
            continue
        wnd, jmin = loop
        omega = int(round(wnd))
        found.append(StagnationPoint(float(x), float(p), omega, residual, float(wnd),
                                     abs(wnd - omega), indeterminate=jmin < thr))
    return found


def _polish(sA, sB, x, p, dx, dp):
    x0, p0 = x, p
    for _ in range(20):
        fa, fb = sA.ev(x, p), sB.ev(x, p)
        a1, a2 = sA.ev(x, p, dx=1), sA.ev(x, p, dy=1)
        b1, b2 = sB.ev(x, p, dx=1), sB.ev(x, p, dy=1)
        det = a1 * b2 - a2 * b1
        if det == 0:
            return x0, p0
        ddx = (fa * b2 - fb * a2) / det
        ddp = (a1 * fb - b1 * fa) / det
        x, p = x - ddx, p - ddp
        if abs(ddx) < 1e-14 * (1 + abs(x)) and abs(ddp) < 1e-14 * (1 + abs(p)):
            break
    if abs(x - x0) > dx or abs(p - p0) > dp:
        return x0, p0
    return float(x), float(p)


# --------------------------------------------------------------------------- fieldlines


@dataclass(frozen=True, eq=False)
class Fieldline:
    points: np.ndarray
    reason: str

    def __len__(self):
        return len(self.points)


class _Bilinear:
    def __init__(self, J: VectorField):
        g = J.grid
        self.x0, self.p0, self.dx, self.dp = g.x[0], g.p[0], g.dx, g.dp
        self.x1, self.p1 = g.x[-1], g.p[-1]
        self.A, self.B = J.jx.values, J.jp.values
        self.nx, self.np_ = g.n_x, g.n_p

    def inside(self, x, p):
        return self.x0 <= x <= self.x1 and self.p0 <= p <= self.p1

    def __call__(self, x, p):
        fi = (x - self.x0) / self.dx
        fj = (p - self.p0) / self.dp
        i = min(int(fi), self.nx - 2)
        j = min(int(fj), self.np_ - 2)
        s, t = fi - i, fj - j
        A, B = self.A, self.B
        w00, w10, w01, w11 = (1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t
        return (A[i, j] * w00 + A[i + 1, j] * w10 + A[i, j + 1] * w01 + A[i + 1, j + 1] * w11,
                B[i, j] * w00 + B[i + 1, j] * w10 + B[i, j + 1] * w01 + B[i + 1, j + 1] * w11)


def fieldlines(J: VectorField, seeds, step: float = 0.05, max_steps: int = 2000,
               stop_speed: float = 1e-8, direction: float = 1.0) -> list[Fieldline]:
    """Fixed-step RK4 integration of ``dX/dtau = J(X)`` with bilinear ``J``.

    Lines stop on leaving the grid (``left_domain``), after ``max_steps``
    (``max_steps``) or when ``|J| < stop_speed * max|J|`` (``reached_stagnation``).
    Seeds outside the grid give an empty line with reason ``seed_outside_domain``.
    """
    f = _Bilinear(J)
    vmin = stop_speed * float(J.magnitude().max())
    h = direction * step
    out = []
    for seed in seeds:
        x, p = float(seed[0]), float(seed[1])
        if not f.inside(x, p):
            out.append(Fieldline(np.empty((0, 2)), "seed_outside_domain"))
            continue
        pts = [(x, p)]
        reason = "max_steps"
        for _ in range(max_steps):
            k1 = f(x, p)
            if math.hypot(*k1) < vmin:
                reason = "reached_stagnation"
                break
            xs, ps = x + 0.5 * h * k1[0], p + 0.5 * h * k1[1]
            if not f.inside(xs, ps):
                reason = "left_domain"
                break
            k2 = f(xs, ps)
            xs, ps = x + 0.5 * h * k2[0], p + 0.5 * h * k2[1]
            if not f.inside(xs, ps):
                reason = "left_domain"
                break
            k3 = f(xs, ps)
            xs, ps = x + h * k3[0], p + h * k3[1]
            if not f.inside(xs, ps):
                reason = "left_domain"
                break
            k4 = f(xs, ps)
            xn = x + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            pn = p + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            if not f.inside(xn, pn):
                reason = "left_domain"
                break
            x, p = xn, pn
            pts.append((x, p))
        out.append(Fieldline(np.array(pts), reason))
    return out


def normalized_arrows(J: VectorField, stride: int = 8) -> np.ndarray:
    """Rows ``(x, p, Jx/|J|, Jp/|J|)`` on a subsampled lattice; zero-length where ``J = 0``."""
    g = J.grid
    A = J.jx.values[::stride, ::stride]
    B = J.jp.values[::stride, ::stride]
    mag = np.hypot(A, B)
    safe = np.where(mag > 0, mag, 1.0)
    X, P = np.meshgrid(g.x[::stride], g.p[::stride], indexing="ij")
    return np.column_stack([X.ravel(), P.ravel(), (A / safe).ravel(), (B / safe).ravel()])


def sample_bilinear(F: ScalarField, points: np.ndarray) -> np.ndarray:
    """Bilinear samples of ``F`` at ``points`` (rows ``(x, p)``)."""
    g = F.grid
    z = ScalarField(g, np.zeros(g.shape))
    f = _Bilinear(VectorField(F, z))
    return np.array([f(x, p)[0] for x, p in points])


def zero_contour_crossings(line: Fieldline, W: ScalarField) -> dict:
    """Count entries into and exits from ``W < 0`` along a fieldline."""
    if len(line) < 2:
        return {"entries": 0, "exits": 0}
    s = np.sign(sample_bilinear(W, line.points))
    s = s[s != 0]
    d = np.diff(s)
    return {"entries": int(np.sum(d < 0)), "exits": int(np.sum(d > 0))}
