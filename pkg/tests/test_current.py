import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from wignerflow.current import (
    DEFAULT_NON_POLYNOMIAL_ORDER,
    classical_current,
    current_integral,
    current_moyal,
    moyal_error_curve,
    moyal_order,
)
from wignerflow.errors import GridError, TruncationWarning
from wignerflow.grid import make_grid
from wignerflow.model import PiecewiseLinear, Polynomial, QuantumState, density_matrix, fd_basis, harmonic
from wignerflow.wigner import wigner_from_rho

from conftest import fields


def rel_max(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


@pytest.fixture(scope="module")
def ground(hbasis):
    rho = density_matrix(QuantumState.pure(hbasis, 0))
    return rho, wigner_from_rho(rho)


class TestQuartic:
    def test_spot_value(self, ground, quartic):
        rho, W = ground
        J = current_integral(rho, quartic, W)
        g = W.grid
        i = int(np.argmin(np.abs(g.x - 1.0)))
        j = g.n_y // 2
        assert g.x[i] == 1.0
        assert J.jp.values[i, j] == pytest.approx(-6 * math.exp(-1) / math.pi, rel=1e-12)
        # The commonly quoted rounding -0.70258 holds to four decimals.
        assert J.jp.values[i, j] == pytest.approx(-0.70258, abs=1e-4)

    def test_closed_form_field(self, ground, quartic):
        rho, W = ground
        X, P = W.grid.meshgrid()
        d2W = (4 * P ** 2 - 2) * W.values
        ref = -4 * X ** 3 * W.values + X * d2W
        J = current_integral(rho, quartic, W)
        assert np.max(np.abs(J.jp.values - ref)) <= 1e-11 * np.max(np.abs(ref))

    def test_integral_vs_moyal(self, ground, quartic):
        rho, W = ground
        a = current_integral(rho, quartic, W)
        b = current_moyal(W, quartic)
        assert b.method == "moyal(1)"
        assert rel_max(b.jp.values, a.jp.values) <= 1e-6

    @pytest.mark.parametrize("coeffs", [(0, 0.3, 0.5, -0.2, 0.1), (0, 0, 1.0, 0, 0, 0, 0.05), (0.0, 1.0)])
    def test_polynomials_agree_for_superposition(self, hbasis, coeffs):
        V = Polynomial(coeffs)
        s = QuantumState.superposition(hbasis, {0: 1.0, 1: 0.5j, 2: 0.3})
        rho = density_matrix(s, 0.2)
        W = wigner_from_rho(rho)
        assert rel_max(current_moyal(W, V).jp.values, current_integral(rho, V, W).jp.values) <= 1e-10

    def test_jx_is_p_over_m_times_w(self, ground, quartic):
        rho, W = ground
        J = current_integral(rho, quartic, W)
        assert_allclose(J.jx.values, W.values * W.grid.p[None, :], atol=0)


class TestHarmonicIsClassical:
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_equal_to_classical(self, hbasis, hpot, n):
        rho = density_matrix(QuantumState.pure(hbasis, n))
        W = wigner_from_rho(rho)
        J = current_integral(rho, hpot, W)
        c = classical_current(W, hpot)
        assert np.max(np.abs(J.jp.values - c.jp.values)) <= 1e-14
        assert current_moyal(W, hpot).method == "moyal(0)"


class TestMorse:
    def test_truncation_error_decreases_then_stagnates(self, morse1_fields, morse):
        _, W, J = morse1_fields
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            curve = dict(moyal_error_curve(W, morse, J, range(0, 16)))
        early = [curve[L] for L in range(0, 10)]
        assert all(b < a / 5 for a, b in zip(early, early[1:]))
        assert curve[4] < 2e-5
        tail = [curve[L] for L in range(11, 16)]
        assert max(tail) < 1e-12
        assert max(tail) / min(tail) < 2

    def test_default_order_warns(self, morse1_fields, morse):
        _, W, J = morse1_fields
        with pytest.warns(TruncationWarning):
            M = current_moyal(W, morse, DEFAULT_NON_POLYNOMIAL_ORDER)
        assert M.flags["truncated"]
        assert rel_max(M.jp.values, J.jp.values) < 2e-5

    def test_needs_order(self, morse1_fields, morse):
        _, W, _ = morse1_fields
        with pytest.raises(ValueError, match="L_max"):
            current_moyal(W, morse)

    def test_quantum_terms_matter(self, morse1_fields, morse):
        _, W, J = morse1_fields
        c = classical_current(W, morse)
        assert rel_max(c.jp.values, J.jp.values) > 0.1


class TestValidation:
    def test_moyal_order(self):
        assert moyal_order(Polynomial((0, 0, 0, 0, 1.0)), None) == (1, False)
        assert moyal_order(Polynomial((0, 0, 0, 0, 0, 0, 1.0)), 1) == (1, True)
        assert moyal_order(harmonic(), 5) == (0, False)

    def test_piecewise_rejected_by_moyal(self, hgrid):
        V = PiecewiseLinear((0.0,), (-1.0, 1.0))
        with pytest.raises(ValueError, match="analytic"):
            moyal_order(V, 4)

    def test_mismatched_inputs(self, hbasis, hpot):
        s = QuantumState.superposition(hbasis, {0: 1.0, 1: 1.0})
        rho0 = density_matrix(s, 0.0)
        W1 = wigner_from_rho(density_matrix(s, 1.0))
        with pytest.raises(ValueError, match="t="):
            current_integral(rho0, hpot, W1)
        from wignerflow.model import harmonic_basis
        other = harmonic_basis(make_grid(-10, 10, 128, 256), hpot, 1)
        W2 = wigner_from_rho(density_matrix(QuantumState.pure(other, 0)))
        with pytest.raises(GridError):
            current_integral(rho0, hpot, W2)


class TestPiecewise:
    def test_kinks_flagged_and_projection(self):
        g = make_grid(-10, 10, 256, 512)
        V = PiecewiseLinear((0.0,), (-1.0, 1.0))
        s = QuantumState.pure(fd_basis(g, V, 1), 0)
        rho, W, J = fields(s, V)
        assert J.flags["kink_columns"] == [128]
        # The force balance holds away from the kink column.
        d = J.jp.values.sum(axis=1) * g.dp
        ref = -rho.diagonal()[::2] * V.derivative(g.x)
        assert np.max(np.abs(np.delete(d - ref, 128))) < 1e-6
