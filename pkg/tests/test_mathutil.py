import numpy as np
import pytest
import uncertainties

from holobf.common import DomainError, NumericError
from holobf.mathutil import fit, integrate_t_box, log_tensor_trapezoid, richardson, romberg_table


class TestExtrapolation:

    def test_romberg_table(self):
        r = romberg_table([1.0, 0.5], ratio=10, order=1)
        assert r[1, 1] == pytest.approx(4/9)
        assert np.isnan(r[0, 1])

    def test_richardson_removes_leading_power(self):
        hs = [0.1 / 2**k for k in range(4)]
        values = [1 + 3*h**2 - h**4 for h in hs]
        best, error = richardson(values)
        assert best == pytest.approx(1, abs=1e-12)
        assert error < 1e-6

    def test_single_value(self):
        assert richardson([2.0]) == (2.0, np.inf)
        with pytest.raises(DomainError):
            richardson([])


class TestScaleBox:

    def test_one_dimension(self):
        value, error, level = integrate_t_box(lambda T: T[:, 0]**-1.5, 0.1, 1, dim=1)
        assert value == pytest.approx(2*(0.1**-0.5 - 1), rel=1e-6)
        assert error <= 1e-6 * value
        assert level >= 3

    def test_two_dimensions(self):
        # Twice the integral over the ordered half of the box
        expected = 2*(np.log(2) - 0.1*np.log(1.1) - np.log(1.1) + 0.1*np.log(0.2))
        value, _, _ = integrate_t_box(lambda T: 1/(T[:, 0] + T[:, 1]), 0.1, 1, dim=2)
        assert value == pytest.approx(expected, rel=1e-6)

    def test_chunking_does_not_change_value(self):
        f = lambda T: np.exp(-T[:, 0]) * T[:, 1]
        a = log_tensor_trapezoid(f, 0.5, 2, dim=2, points=33, chunk=7)
        b = log_tensor_trapezoid(f, 0.5, 2, dim=2, points=33)
        assert a == pytest.approx(b, rel=1e-13)

    def test_zero_dimensions(self):
        value, error, level = integrate_t_box(lambda T: np.full(len(T), 3.0), 0.1, 1, dim=0)
        assert (value, error, level) == (3.0, 0.0, 0)

    def test_not_converged(self):
        f = lambda T: np.sin(40*np.log(T[:, 0]))
        with pytest.raises(NumericError):
            integrate_t_box(f, 1e-3, 1, dim=1, tol=1e-14, max_level=4)
        value, error, level = integrate_t_box(f, 1e-3, 1, dim=1, tol=1e-14, max_level=4, strict=False)
        assert level == 4 and np.isfinite(value)

    @pytest.mark.parametrize("lower, upper", [(0, 1), (1, 0.1), (-1, 1)])
    def test_invalid_box(self, lower, upper):
        with pytest.raises(DomainError):
            integrate_t_box(lambda T: T[:, 0], lower, upper, dim=1)


class TestFit:

    def test_linear(self):
        xs = np.linspace(0, 1, 11)
        ys = 2*xs + 1
        assert fit(lambda x, a, b: a*x + b, xs, ys) == pytest.approx([2, 1])

    def test_errors_and_labels(self):
        xs = np.array([1.0, 2.0, 3.0, 4.0])
        ys = np.array([2.1, 3.9, 6.2, 7.8])
        (slope,), labels = fit(lambda x, c: c*x, xs, ys, errors=True, labels=True)
        assert isinstance(slope, uncertainties.core.AffineScalarFunc)
        assert slope.n == pytest.approx(np.dot(xs, ys) / np.dot(xs, xs))
        assert slope.s > 0
        assert labels[0].startswith("c = ")
