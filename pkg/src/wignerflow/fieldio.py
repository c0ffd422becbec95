"""Field export: a one-line JSON header followed by little-endian float64 samples.

The header carries ``{nx, np, x_min, dx, p_min, dp, hbar, name}``; samples are
row-major in x (``values[i, j]`` is at ``x_i, p_j``).
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import PhaseGrid, ScalarField

HEADER_KEYS = ("nx", "np", "x_min", "dx", "p_min", "dp", "hbar", "name")


def field_header(grid: PhaseGrid, name: str) -> dict:
    return {
        "nx": grid.n_x,
        "np": grid.n_p,
        "x_min": grid.x_min,
        "dx": grid.dx,
        "p_min": grid.p_min,
        "dp": grid.dp,
        "hbar": grid.hbar,
        "name": name,
    }


def write_field(path, field: ScalarField | np.ndarray, name: str | None = None,
                grid: PhaseGrid | None = None) -> Path:
    """Write ``field`` in the binary field format and return the path."""
    if isinstance(field, ScalarField):
        grid = field.grid
        values = field.values
        name = field.name if name is None else name
    else:
        if grid is None:
            raise ValueError("a grid is required when writing a bare array")
        values = np.asarray(field, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"array shape {values.shape} does not match grid {grid.shape}")
    path = Path(path)
    header = json.dumps(field_header(grid, name or ""), separators=(",", ":"))
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii") + b"\n")
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
    return path


def read_field(path) -> tuple[dict, np.ndarray]:
    """Read a field file; returns ``(header, values)`` with ``values`` shaped ``(nx, np)``."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        data = np.frombuffer(fh.read(), dtype="<f8")
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise ValueError(f"field header lacks keys {missing}")
    expected = header["nx"] * header["np"]
    if data.size != expected:
        raise ValueError(f"field body has {data.size} samples, header promises {expected}")
    return header, data.reshape(header["nx"], header["np"]).astype(float)


def grid_from_header(header: dict) -> PhaseGrid:
    n_x = header["nx"]
    x_min = header["x_min"]
    return PhaseGrid(x_min, x_min + n_x * header["dx"], n_x, header["np"], header["hbar"])


def write_field_csv(path, field: ScalarField) -> Path:
    """Long-format CSV ``x,p,value``; intended for small grids."""
    path = Path(path)
    g = field.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "p", "value"])
        for i, x in enumerate(g.x):
            for j, p in enumerate(g.p):
                w.writerow([repr(float(x)), repr(float(p)), repr(float(field.values[i, j]))])
    return path
