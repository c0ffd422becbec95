"""Command-line front end.

Every run writes into one output directory: binary fields (see ``fieldio``),
small CSV/JSON tables, the resolved ``config.json`` and, unless ``--no-meta``
is given, a ``meta.json`` with the wall-clock time of the run.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import __version__
from .current import DEFAULT_NON_POLYNOMIAL_ORDER, classical_current, current_integral, current_moyal
from .errors import GridError
from .fieldio import write_field
from .flow import (
    DEFAULT_EPS_W,
    divergence_sup,
    divergence_w,
    fieldlines,
    normalized_arrows,
    stagnation_points,
    zero_contour_crossings,
    zero_crossings,
)
from .grid import PhaseGrid, make_grid
from .model.potentials import Morse, PiecewiseLinear, Polynomial
from .model.state import QuantumState, auto_basis, coherent_state, density_matrix
from .verify import run_suite, standard_set
from .wigner import wigner_from_rho

COMMANDS = ("wigner", "current", "divergence", "stagnation", "fieldlines", "verify", "figure1")
HARMONIC_GRID = (-8.0, 8.0, 128, 256)
MORSE_GRID = (-6.0, 18.0, 256, 512)
FIGURE1_POTENTIAL = {"kind": "morse", "params": [3.0, 1 / math.sqrt(6)]}
FIGURE1_SEEDS = [[x, p] for x in (-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5) for p in (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5)]
NEGATIVE_PATCH_TOL = 1e-3


# --------------------------------------------------------------------------- parsing


def parse_grid(text) -> tuple[float, float, int, int]:
    """``x_min,x_max,nx,ny``; validated by constructing the grid."""
    parts = text if isinstance(text, (list, tuple)) else str(text).split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("grid needs x_min,x_max,nx,ny")
    try:
        x_min, x_max, nx, ny = float(parts[0]), float(parts[1]), int(parts[2]), int(parts[3])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None
    try:
        make_grid(x_min, x_max, nx, ny)
    except GridError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return x_min, x_max, nx, ny


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def parse_potential(text) -> dict:
    """``harmonic:K``, ``poly:c0,c1,..``, ``morse:D,a`` or ``piecewise:b1,..;s0,..[;offset]``."""
    if isinstance(text, dict):
        return {"kind": text["kind"], "params": text.get("params", [])}
    kind, _, rest = str(text).partition(":")
    try:
        if kind == "harmonic":
            params = _floats(rest) if rest else [1.0]
            if len(params) != 1:
                raise ValueError("harmonic takes one stiffness")
        elif kind == "poly":
            params = _floats(rest)
            if not params:
                raise ValueError("poly needs coefficients")
        elif kind == "morse":
            params = _floats(rest)
            if len(params) != 2:
                raise ValueError("morse takes D,a")
        elif kind == "piecewise":
            groups = rest.split(";")
            if len(groups) not in (2, 3):
                raise ValueError("piecewise takes breakpoints;slopes[;offset]")
            params = [_floats(groups[0]), _floats(groups[1]), float(groups[2]) if len(groups) == 3 else 0.0]
        else:
            raise ValueError(f"unknown potential kind {kind!r}")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad potential {text!r}: {exc}") from None
    return {"kind": kind, "params": params}


def parse_state(text) -> dict:
    """``n``, ``n1,n2`` (equal weights), ``n1:c1,n2:c2`` or ``coherent:alpha``."""
    if isinstance(text, dict):
        return text
    text = str(text)
    try:
        if text.startswith("coherent:"):
            return {"coherent": float(text.split(":", 1)[1])}
        coeffs = {}
        for item in text.split(","):
            n, _, c = item.partition(":")
            coeffs[str(int(n))] = float(c) if c else 1.0
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad state {text!r}: {exc}") from None
    if not coeffs or any(int(n) < 0 for n in coeffs):
        raise argparse.ArgumentTypeError(f"bad state {text!r}")
    return {"coefficients": coeffs}


def parse_seeds(text) -> list[list[float]]:
    """``x:p;x:p;...``"""
    if isinstance(text, list):
        return [[float(a), float(b)] for a, b in text]
    try:
        return [[float(v) for v in item.split(":")] for item in str(text).split(";") if item]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seeds {text!r}: {exc}") from None


def parse_window(text) -> list[float] | None:
    if text is None:
        return None
    vals = text if isinstance(text, list) else _floats(str(text))
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("window needs x_lo,x_hi,p_lo,p_hi")
    return [float(v) for v in vals]


@dataclass
class RunConfig:
    command: str
    grid: list
    potential: dict
    state: dict
    time: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0
    eps_w: float = DEFAULT_EPS_W
    method: str = "integral"
    moyal_order: int | None = None
    dt: float | None = None
    seeds: list | None = None
    window: list | None = None
    step: float = 0.05
    max_steps: int = 2000
    standard_set: bool = False
    extra: dict = field(default_factory=dict)

    def make_grid(self) -> PhaseGrid:
        x_min, x_max, nx, ny = self.grid
        return make_grid(x_min, x_max, nx, ny, self.hbar)

    def make_potential(self):
        kind, prm = self.potential["kind"], self.potential["params"]
        if kind == "harmonic":
            return Polynomial((0.0, 0.0, 0.5 * prm[0]), mass=self.mass)
        if kind == "poly":
            return Polynomial(tuple(prm), mass=self.mass)
        if kind == "morse":
            return Morse(prm[0], prm[1], mass=self.mass)
        if kind == "piecewise":
            return PiecewiseLinear(tuple(prm[0]), tuple(prm[1]), prm[2], mass=self.mass)
        raise ValueError(f"unknown potential kind {kind!r}")

    def make_state(self, grid: PhaseGrid, V) -> QuantumState:
        if "coherent" in self.state:
            return coherent_state(grid, V, self.state["coherent"])
        coeffs = {int(n): c for n, c in self.state["coefficients"].items()}
        basis = auto_basis(grid, V, max(coeffs) + 1)
        return QuantumState.superposition(basis, coeffs)

    def to_json(self) -> dict:
        return asdict(self)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wignerflow", description="Wigner function and Wigner current toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="JSON file with run settings; flags override it")
    ap.add_argument("--grid", type=parse_grid, help="x_min,x_max,nx,ny")
    ap.add_argument("--potential", type=parse_potential, help="harmonic:K | poly:c0,c1,.. | morse:D,a | "
                                                              "piecewise:b1,..;s0,..[;offset]")
    ap.add_argument("--state", type=parse_state, help="n | n1,n2 | n1:c1,n2:c2 | coherent:alpha")
    ap.add_argument("--time", type=float)
    ap.add_argument("--mass", type=float)
    ap.add_argument("--hbar", type=float)
    ap.add_argument("--method", choices=("integral", "moyal", "classical"))
    ap.add_argument("--eps-w", type=float, dest="eps_w")
    ap.add_argument("--moyal-order", type=int, dest="moyal_order")
    ap.add_argument("--dt", type=float)
    ap.add_argument("--seeds", type=parse_seeds, help="x:p;x:p;...")
    ap.add_argument("--window", type=parse_window, help="x_lo,x_hi,p_lo,p_hi")
    ap.add_argument("--step", type=float)
    ap.add_argument("--max-steps", type=int, dest="max_steps")
    ap.add_argument("--standard-set", action="store_true", dest="standard_set",
                    help="verify: run the built-in standard state set")
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--no-meta", action="store_true", dest="no_meta")
    return ap


def resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    raw = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
    keys = ("grid", "potential", "state", "time", "mass", "hbar", "method", "eps_w", "moyal_order", "dt",
            "seeds", "window", "step", "max_steps")
    unknown = set(raw) - set(keys) - {"standard_set"}
    if unknown:
        parser.error(f"unknown config keys {sorted(unknown)}")
    try:
        for key, conv in (("grid", parse_grid), ("potential", parse_potential), ("state", parse_state),
                          ("seeds", parse_seeds), ("window", parse_window)):
            if raw.get(key) is not None:
                raw[key] = conv(raw[key])
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    if args.standard_set:
        raw["standard_set"] = True
    if args.command == "figure1":
        raw["potential"] = FIGURE1_POTENTIAL
        raw["state"] = {"coefficients": {"1": 1.0}}
        raw.setdefault("seeds", FIGURE1_SEEDS)
        raw["mass"], raw["hbar"] = 1.0, 1.0
    raw.setdefault("potential", {"kind": "harmonic", "params": [1.0]})
    raw.setdefault("state", {"coefficients": {"0": 1.0}})
    if "grid" not in raw:
        raw["grid"] = MORSE_GRID if raw["potential"]["kind"] == "morse" else HARMONIC_GRID
    raw["grid"] = list(raw["grid"])
    for key in ("time", "mass", "hbar", "eps_w", "step"):
        if key in raw:
            raw[key] = float(raw[key])
    if raw.get("mass", 1.0) <= 0 or raw.get("hbar", 1.0) <= 0:
        parser.error("mass and hbar must be positive")
    if raw.get("eps_w", DEFAULT_EPS_W) <= 0:
        parser.error("eps-w must be positive")
    if raw.get("moyal_order") is not None and raw["moyal_order"] < 0:
        parser.error("moyal-order must be non-negative")
    try:
        make_grid(*raw["grid"][:4], raw.get("hbar", 1.0))
    except GridError as exc:
        parser.error(str(exc))
    return RunConfig(command=args.command, **raw)


# --------------------------------------------------------------------------- outputs


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


class Run:
    """Lazily computed quantities shared between commands."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.grid = cfg.make_grid()
        self.V = cfg.make_potential()
        self.state = cfg.make_state(self.grid, self.V)
        self.rho = density_matrix(self.state, cfg.time)
        self.W = wigner_from_rho(self.rho)
        self._J = None

    @property
    def J(self):
        if self._J is None:
            cfg = self.cfg
            if cfg.method == "integral":
                self._J = current_integral(self.rho, self.V, self.W)
            elif cfg.method == "moyal":
                order = cfg.moyal_order
                if order is None and not isinstance(self.V, Polynomial):
                    order = DEFAULT_NON_POLYNOMIAL_ORDER
                self._J = current_moyal(self.W, self.V, order)
            else:
                self._J = classical_current(self.W, self.V)
        return self._J


def write_wigner(run: Run, out: Path) -> dict:
    write_field(out / "W.bin", run.W, "W")
    return {"W": run.W.invariants()}


def write_current(run: Run, out: Path) -> dict:
    write_field(out / "Jx.bin", run.J.jx, "Jx")
    write_field(out / "Jp.bin", run.J.jp, "Jp")
    _write_csv(out / "arrows.csv", ["x", "p", "ux", "up"], normalized_arrows(run.J).tolist())
    return {"method": run.J.method, "flags": run.J.flags}


def write_divergence(run: Run, out: Path) -> dict:
    d = divergence_w(run.J, run.W, run.cfg.eps_w)
    write_field(out / "div_w.bin", d.field, "div_w")
    write_field(out / "div_w_arctan.bin", d.arctan, "div_w_arctan")
    write_field(out / "mask.bin", d.mask.astype(float), "mask", run.grid)
    return {"eps_w": d.eps_w, "sup_unmasked": d.sup_unmasked(), "masked_cells": int(d.mask.sum())}


def write_stagnation(run: Run, out: Path) -> list:
    pts = stagnation_points(run.J, run.cfg.window)
    records = [p.record() for p in pts]
    _dump_json(out / "stagnation.json", records)
    return pts


def default_seeds(grid: PhaseGrid) -> list[list[float]]:
    xs = np.linspace(grid.x[0], grid.x[-1], 9)[1:-1]
    ps = np.linspace(grid.p[0], grid.p[-1], 9)[1:-1]
    return [[float(x), float(p)] for x in xs for p in ps]


def write_fieldlines(run: Run, out: Path) -> list:
    seeds = run.cfg.seeds or default_seeds(run.grid)
    lines = fieldlines(run.J, seeds, run.cfg.step, run.cfg.max_steps)
    rows = [(i, float(x), float(p)) for i, line in enumerate(lines) for x, p in line.points]
    _write_csv(out / "fieldlines.csv", ["id", "x", "p"], rows)
    summary = [{"id": i, "seed": list(map(float, s)), "reason": line.reason, "points": len(line),
                **zero_contour_crossings(line, run.W)} for i, (s, line) in enumerate(zip(seeds, lines))]
    _dump_json(out / "fieldlines_summary.json", summary)
    return summary


def figure1_metrics(run: Run, stagnation, lines_summary) -> dict:
    """Quantities behind the qualitative reproduction checks."""
    W = run.W.values
    m = run.W.max_abs()
    neg, n_neg = ndimage.label(W < -NEGATIVE_PATCH_TOL * m)
    sizes = [int((neg == k).sum()) for k in range(1, n_neg + 1)]
    patch = {}
    if n_neg:
        big = int(np.argmax(sizes)) + 1
        idx = np.argwhere(neg == big)
        patch = {"x_mean": float(run.grid.x[idx[:, 0]].mean()), "p_mean": float(run.grid.p[idx[:, 1]].mean()),
                 "contains_min": bool(neg[np.unravel_index(np.argmin(W), W.shape)] == big)}
    d = divergence_w(run.J, run.W, run.cfg.eps_w)
    lab, n_lab = ndimage.label(d.mask)
    border = set(np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))) - {0}
    interior = [k for k in range(1, n_lab + 1) if k not in border]
    near_zero = ndimage.binary_dilation(zero_crossings(run.W))
    inner_mask = np.isin(lab, interior)
    omegas = sorted({p.omega for p in stagnation if not p.indeterminate})
    crossing = [s["id"] for s in lines_summary if s["entries"] > 0 and s["exits"] > 0]
    sups = divergence_sup(run.J, run.W, (1e-2, 1e-3, 1e-4))
    return {
        "negative_patches": n_neg,
        "negative_patch_sizes": sizes,
        "negative_patch": patch,
        "min_w": float(W.min()),
        "stagnation_indices": omegas,
        "stagnation_count": len(stagnation),
        "interior_mask_components": len(interior),
        "interior_mask_cells": int(inner_mask.sum()),
        "interior_mask_on_zero_contour": bool(inner_mask.any() and np.all(near_zero[inner_mask])),
        "crossing_fieldlines": crossing,
        "divergence_sup": {"eps_w": [1e-2, 1e-3, 1e-4], "sup": sups},
    }


def execute(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "config.json", cfg.to_json())
    if cfg.command == "verify":
        return execute_verify(cfg, out)
    run = Run(cfg)
    summary: dict = {}
    cmd = cfg.command
    if cmd in ("wigner", "figure1"):
        summary |= write_wigner(run, out)
    if cmd in ("current", "figure1"):
        summary |= write_current(run, out)
    if cmd in ("divergence", "figure1"):
        summary |= write_divergence(run, out)
    stag = write_stagnation(run, out) if cmd in ("stagnation", "figure1") else []
    lines = write_fieldlines(run, out) if cmd in ("fieldlines", "figure1") else []
    if cmd == "stagnation":
        summary["stagnation_count"] = len(stag)
    if cmd == "fieldlines":
        summary["reasons"] = sorted({s["reason"] for s in lines})
    if cmd == "figure1":
        summary["figure1"] = figure1_metrics(run, stag, lines)
    _dump_json(out / "summary.json", summary)
    return 0


def execute_verify(cfg: RunConfig, out: Path) -> int:
    if cfg.standard_set:
        cases = standard_set()
    else:
        grid = cfg.make_grid()
        V = cfg.make_potential()
        cases = [(cfg.make_state(grid, V), V)]
    ok = True
    with open(out / "report.jsonl", "w") as fh:
        for state, V in cases:
            for rep in run_suite(state, V, cfg.time, cfg.dt):
                ok &= rep.passed
                fh.write(json.dumps(rep.record(), sort_keys=True) + "\n")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = resolve_config(args, parser)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            status = execute(cfg, args.out)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.no_meta:
        _dump_json(args.out / "meta.json", {"timestamp": datetime.now(timezone.utc).isoformat(),
                                            "version": __version__})
    return status


if __name__ == "__main__":
    sys.exit(main())
