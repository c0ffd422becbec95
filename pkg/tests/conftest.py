import math

import numpy as np
import pytest

from wignerflow.current import current_integral
from wignerflow.grid import make_grid
from wignerflow.model import Morse, Polynomial, QuantumState, density_matrix, harmonic, harmonic_basis, morse_basis
from wignerflow.wigner import wigner_from_rho

SQRT_HALF = 1 / math.sqrt(2)


@pytest.fixture(scope="session")
def hgrid():
    return make_grid(-8.0, 8.0, 128, 256)


@pytest.fixture(scope="session")
def mgrid():
    return make_grid(-6.0, 18.0, 256, 512)


@pytest.fixture(scope="session")
def hpot():
    return harmonic(1.0)


@pytest.fixture(scope="session")
def quartic():
    return Polynomial((0.0, 0.0, 0.0, 0.0, 1.0))


@pytest.fixture(scope="session")
def morse():
    return Morse(3.0, 1 / math.sqrt(6))


@pytest.fixture(scope="session")
def hbasis(hgrid, hpot):
    return harmonic_basis(hgrid, hpot, 6)


@pytest.fixture(scope="session")
def mbasis(mgrid, morse):
    return morse_basis(mgrid, morse, 2)


@pytest.fixture(scope="session")
def morse1(mbasis):
    return QuantumState.pure(mbasis, 1)


@pytest.fixture(scope="session")
def morse1_fields(morse1, morse):
    rho = density_matrix(morse1, 0.0)
    W = wigner_from_rho(rho)
    return rho, W, current_integral(rho, morse, W)


def fields(state, V, t=0.0):
    rho = density_matrix(state, t)
    W = wigner_from_rho(rho)
    return rho, W, current_integral(rho, V, W)


def gaussian_w(grid, x0=0.0, p0=0.0):
    X, P = grid.meshgrid()
    return np.exp(-((X - x0) ** 2) - (P - p0) ** 2) / np.pi


_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    key = mark.args[0]
    ok = _CRITERIA.get(key, (True, mark.args[1]))[0] and not rep.failed
    _CRITERIA[key] = (ok, mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        ok, text = _CRITERIA[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}: {text}")
