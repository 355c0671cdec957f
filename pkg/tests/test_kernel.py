import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from agrf.kernel import (
    ZERO_MEAN,
    HermiteTable,
    KernelCapacityError,
    PolynomialMean,
    SquaredExponentialKernel,
    kernel_derivative,
    mean_derivative,
)

from oracles import fd_mixed_richardson

positive = st.floats(0.1, 3.0)
lengths = st.floats(0.1, 2.0)
coords = st.floats(-3.0, 3.0)
orders = st.integers(0, 4)


def double_factorial(n):
    return 1 if n <= 0 else n * double_factorial(n - 2)


def test_value_at_coincidence_is_amplitude_squared():
    k = SquaredExponentialKernel(1.0, 1.0)
    assert kernel_derivative(k, 0, 0, 0.3, 0.3) == 1.0


@pytest.mark.parametrize("t", [-1.3, 0.0, 0.42, 7.0])
def test_mixed_first_derivative_at_coincidence(t):
    k = SquaredExponentialKernel(1.0, 1.0)
    assert kernel_derivative(k, 1, 1, t, t) == pytest.approx(1.0, abs=1e-15)
    fd = fd_mixed_richardson(1, 1, t, t, 1.0, 1.0)
    assert fd == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("t", [0.0, 0.25, -4.0])
def test_second_mixed_derivative_at_coincidence(t):
    k = SquaredExponentialKernel(2.0, 0.5)
    assert kernel_derivative(k, 2, 2, t, t) == pytest.approx(192.0, rel=1e-14)
    fd = fd_mixed_richardson(2, 2, t, t, 2.0, 0.5)
    assert fd == pytest.approx(192.0, rel=1e-5)


@pytest.mark.parametrize("i,j", [(0, 1), (1, 0), (1, 2), (3, 0), (2, 3), (0, 5)])
def test_odd_total_order_vanishes_at_coincidence(i, j):
    k = SquaredExponentialKernel(1.7, 0.3)
    assert kernel_derivative(k, i, j, 0.8, 0.8) == 0.0


@pytest.mark.parametrize("j", range(5))
def test_diagonal_variance_is_double_factorial(j):
    a, ell = 1.3, 0.7
    k = SquaredExponentialKernel(a, ell)
    expected = a**2 * double_factorial(2 * j - 1) / ell ** (2 * j)
    got = kernel_derivative(k, j, j, 0.1, 0.1)
    assert got > 0
    assert got == pytest.approx(expected, rel=1e-14)


def test_matches_symbolic_differentiation_up_to_order_eight():
    x, xp = sympy.symbols("x xp", real=True)
    a, ell = sympy.Rational(3, 2), sympy.Rational(2, 5)
    k_sym = a**2 * sympy.exp(-(x - xp) ** 2 / (2 * ell**2))
    k = SquaredExponentialKernel(1.5, 0.4)
    for i in range(5):
        for j in range(5):
            expr = sympy.diff(k_sym, x, i, xp, j) if i or j else k_sym
            for xv, xpv in [(0.1, 0.3), (0.9, -0.2), (0.5, 0.5)]:
                want = float(expr.subs({x: xv, xp: xpv}))
                got = kernel_derivative(k, i, j, xv, xpv)
                assert got == pytest.approx(want, rel=1e-12, abs=1e-12 * 1.5**2 / 0.4 ** (i + j))


@settings(max_examples=300, deadline=None)
@given(positive, lengths, coords, coords, orders, orders)
def test_finite_difference_consistency(a, ell, x, xp, i, j):
    if i + j > 4:
        return
    k = SquaredExponentialKernel(a, ell)
    exact = kernel_derivative(k, i, j, x, xp)
    fd = fd_mixed_richardson(i, j, x, xp, a, ell)
    scale = max(abs(exact), a**2 / ell ** (i + j))
    assert abs(exact - fd) / scale < 1e-5


@settings(max_examples=300, deadline=None)
@given(positive, lengths, coords, coords, orders, orders)
def test_exchange_symmetry_is_bitwise(a, ell, x, xp, i, j):
    k = SquaredExponentialKernel(a, ell)
    assert kernel_derivative(k, i, j, x, xp) == kernel_derivative(k, j, i, xp, x)


@settings(max_examples=100, deadline=None)
@given(positive, lengths, coords, coords)
def test_plain_symmetry(a, ell, x, xp):
    k = SquaredExponentialKernel(a, ell)
    assert k.evaluate(x, xp) == k.evaluate(xp, x)
    assert k.evaluate(x, x) == pytest.approx(a**2, rel=1e-15)


def test_vectorized_broadcast_matches_scalar():
    k = SquaredExponentialKernel(0.8, 0.25)
    x = np.linspace(0, 1, 7)[:, None]
    xp = np.linspace(-0.2, 0.9, 5)[None, :]
    block = kernel_derivative(k, 2, 1, x, xp)
    assert block.shape == (7, 5)
    for r in range(7):
        for c in range(5):
            assert block[r, c] == kernel_derivative(k, 2, 1, x[r, 0], xp[0, c])


def test_capacity_error_is_explicit():
    k = SquaredExponentialKernel(1.0, 1.0, max_order=4)
    kernel_derivative(k, 2, 2, 0.0, 1.0)
    with pytest.raises(KernelCapacityError, match="exceeds"):
        kernel_derivative(k, 3, 2, 0.0, 1.0)
    with pytest.raises(ValueError):
        kernel_derivative(k, -1, 0, 0.0, 1.0)


@pytest.mark.parametrize("a,ell", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, np.nan)])
def test_invalid_kernel_parameters(a, ell):
    with pytest.raises(ValueError):
        SquaredExponentialKernel(a, ell)


class TestHermiteTable:
    def test_first_polynomials(self):
        t = HermiteTable(4)
        assert t.polynomial(0).tolist() == [1.0]
        assert t.polynomial(1).tolist() == [0.0, 1.0]
        assert t.polynomial(2).tolist() == [-1.0, 0.0, 1.0]
        assert t.polynomial(4).tolist() == [3.0, 0.0, -6.0, 0.0, 1.0]

    def test_recurrence_holds_coefficientwise(self):
        t = HermiteTable(12)
        c = t.coefficients
        for m in range(1, 12):
            shifted = np.concatenate([[0.0], c[m, :-1]])
            assert np.array_equal(c[m + 1], shifted - m * c[m - 1])

    def test_agrees_with_numpy_hermite_e(self):
        t = HermiteTable(8)
        r = np.linspace(-4, 4, 33)
        for m in range(9):
            ref = np.polynomial.hermite_e.hermeval(r, [0] * m + [1])
            np.testing.assert_allclose(t.evaluate(m, r), ref, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(
                np.polynomial.polynomial.polyval(r, t.polynomial(m)), ref, rtol=1e-12, atol=1e-10)

    def test_order_overflow(self):
        with pytest.raises(KernelCapacityError):
            HermiteTable(3).evaluate(4, 0.0)

    def test_default_capacity_covers_order_four_data(self):
        assert SquaredExponentialKernel(1.0, 1.0).hermite.max_order == 8


class TestMean:
    def test_zero_mean(self):
        assert mean_derivative(ZERO_MEAN, 0, 0.7) == 0.0
        assert mean_derivative(ZERO_MEAN, 3, 0.7) == 0.0

    def test_linear(self):
        assert mean_derivative(PolynomialMean((3.0, 2.0)), 1, 5.0) == 2.0
        assert mean_derivative(PolynomialMean((3.0, 2.0)), 0, 5.0) == 13.0

    def test_order_above_degree(self):
        assert mean_derivative(PolynomialMean((0.0, 0.0, 1.0)), 3, 1.0) == 0.0

    def test_quadratic_second_derivative_vectorized(self):
        m = PolynomialMean((1.0, -2.0, 4.0))
        np.testing.assert_array_equal(m.derivative(2, np.array([0.0, 1.0, 9.0])), [8.0, 8.0, 8.0])

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            mean_derivative(ZERO_MEAN, -1, 0.0)
