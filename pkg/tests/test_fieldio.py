import json

import numpy as np
import pytest

from wignerflow.fieldio import HEADER_KEYS, grid_from_header, read_field, write_field, write_field_csv
from wignerflow.grid import ScalarField, make_grid


@pytest.fixture
def field():
    g = make_grid(-2.0, 3.0, 16, 32, hbar=0.5)
    X, P = g.meshgrid()
    return ScalarField(g, np.sin(X) * np.exp(-P ** 2), "demo")


def test_round_trip(tmp_path, field):
    path = write_field(tmp_path / "f.bin", field)
    header, values = read_field(path)
    assert set(HEADER_KEYS) <= set(header)
    assert header["name"] == "demo"
    assert np.array_equal(values, field.values)
    assert grid_from_header(header) == field.grid


def test_header_is_one_json_line(tmp_path, field):
    path = write_field(tmp_path / "f.bin", field)
    first = path.read_bytes().split(b"\n", 1)[0]
    header = json.loads(first)
    assert header["nx"] == 16 and header["np"] == 32
    assert header["p_min"] == field.grid.p[0]
    assert len(path.read_bytes()) == len(first) + 1 + 8 * 16 * 32


def test_bare_array_needs_grid(tmp_path, field):
    with pytest.raises(ValueError):
        write_field(tmp_path / "a.bin", field.values, "a")
    with pytest.raises(ValueError):
        write_field(tmp_path / "a.bin", np.zeros((3, 3)), "a", field.grid)
    write_field(tmp_path / "a.bin", field.values, "a", field.grid)


def test_truncated_body_rejected(tmp_path, field):
    path = write_field(tmp_path / "f.bin", field)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_field(path)


def test_identical_bytes(tmp_path, field):
    a = write_field(tmp_path / "a.bin", field).read_bytes()
    b = write_field(tmp_path / "b.bin", field).read_bytes()
    assert a == b


def test_csv(tmp_path, field):
    path = write_field_csv(tmp_path / "f.csv", field)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,p,value"
    assert len(lines) == 1 + 16 * 32
    x, p, v = map(float, lines[1].split(","))
    assert (x, p, v) == (field.grid.x[0], field.grid.p[0], field.values[0, 0])
