import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from wignerflow.model.potentials import Morse, PiecewiseLinear, Polynomial, eval_potential, harmonic

finite = st.floats(-3, 3, allow_nan=False)


class TestPolynomial:
    def test_trailing_zeros_trimmed(self):
        V = Polynomial((1.0, 2.0, 0.0, 0.0))
        assert V.coeffs == (1.0, 2.0)
        assert V.degree == 1

    def test_values_and_derivatives(self):
        V = Polynomial((0, 0, 0, 0, 1.0))
        x = np.linspace(-2, 2, 9)
        assert_allclose(V(x), x ** 4)
        assert_allclose(V.derivative(x), 4 * x ** 3)
        assert_allclose(V.derivative(x, 3), 24 * x)
        assert_allclose(V.derivative(x, 5), 0.0)

    def test_harmonic(self):
        V = harmonic(2.5)
        assert V.is_quadratic
        assert V.derivative(1.0) == pytest.approx(2.5)
        assert eval_potential(V, 2.0) == pytest.approx(5.0)

    @settings(max_examples=50, deadline=None)
    @given(c=st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=7), x=finite,
           y=st.floats(0.01, 2.0))
    def test_difference_kernel_matches_quotient(self, c, x, y):
        V = Polynomial(tuple(c))
        ref = (V(x + y) - V(x - y)) / (2 * y)
        assert V.difference_kernel(x, y) == pytest.approx(ref, rel=1e-9, abs=1e-9)

    def test_kernel_at_zero_is_slope(self):
        V = Polynomial((0.3, -1.0, 0.5, 2.0))
        assert V.difference_kernel(0.7, 0.0) == pytest.approx(V.derivative(0.7))

    @pytest.mark.parametrize("bad", [dict(coeffs=(1.0, math.inf)), dict(coeffs=(1.0,), mass=0.0)])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            Polynomial(**bad)


class TestMorse:
    V = Morse(3.0, 1 / math.sqrt(6))

    def test_shape(self):
        assert self.V(0.0) == 0.0
        assert self.V(200.0) == pytest.approx(3.0)
        assert self.V.derivative(0.0) == pytest.approx(0.0, abs=1e-15)
        assert self.V.derivative(0.0, 2) == pytest.approx(2 * 3.0 / 6)

    @pytest.mark.parametrize("order", [1, 2, 3, 4, 7])
    def test_derivatives_against_finite_differences(self, order):
        x = np.linspace(-1, 4, 11)
        h = 1e-4
        up = self.V.derivative(x + h, order - 1)
        down = self.V.derivative(x - h, order - 1)
        assert_allclose(self.V.derivative(x, order), (up - down) / (2 * h), rtol=1e-6, atol=1e-8)

    @settings(max_examples=50, deadline=None)
    @given(x=finite, y=st.floats(1e-3, 4.0))
    def test_difference_kernel(self, x, y):
        ref = (self.V(x + y) - self.V(x - y)) / (2 * y)
        assert self.V.difference_kernel(x, y) == pytest.approx(ref, rel=1e-8, abs=1e-10)

    def test_kernel_small_y(self):
        assert self.V.difference_kernel(0.5, 0.0) == pytest.approx(self.V.derivative(0.5), rel=1e-14)
        assert self.V.difference_kernel(0.5, 1e-9) == pytest.approx(self.V.derivative(0.5), rel=1e-12)

    @pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, -1.0)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            Morse(*args)


class TestPiecewise:
    V = PiecewiseLinear((-1.0, 1.0), (-2.0, 0.0, 3.0), offset=1.0)

    def test_values(self):
        assert self.V(-1.0) == pytest.approx(1.0)
        assert self.V(0.0) == pytest.approx(1.0)
        assert self.V(1.0) == pytest.approx(1.0)
        assert self.V(2.0) == pytest.approx(4.0)
        assert self.V(-3.0) == pytest.approx(5.0)

    def test_derivative_mean_at_kink(self):
        assert self.V.derivative(1.0) == pytest.approx(1.5)
        assert self.V.derivative(0.5) == 0.0
        with pytest.raises(ValueError):
            self.V.derivative(0.5, 2)

    def test_kinks_flagged(self):
        x = np.array([-1.0, 0.0, 1.0, 2.0])
        assert self.V.kinks(x).tolist() == [True, False, True, False]
        assert not self.V.analytic

    @settings(max_examples=40, deadline=None)
    @given(x=finite, y=st.floats(1e-3, 3.0))
    def test_difference_kernel(self, x, y):
        ref = (self.V(x + y) - self.V(x - y)) / (2 * y)
        assert self.V.difference_kernel(x, y) == pytest.approx(ref, rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("args", [((0.0,), (1.0,)), ((1.0, 0.0), (1.0, 2.0, 3.0)), ((0.0,), (1.0, math.nan))])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            PiecewiseLinear(*args)
