"""Squared exponential covariance, polynomial means and their derivatives.

Mixed partial derivatives of the squared exponential kernel are evaluated in
closed form through the probabilists' Hermite polynomials:

.. math::

    \\frac{\\partial^{i+j}}{\\partial x^i \\partial x'^j} k(x, x')
        = a^2 (-1)^i l^{-(i+j)} \\mathrm{He}_{i+j}(r) e^{-r^2/2},
    \\qquad r = (x - x') / l.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_MAX_ORDER = 8


class KernelCapacityError(ValueError):
    """Raised when a derivative order exceeds the Hermite table capacity."""


class HermiteTable:
    """Coefficients of He_0 ... He_M in the monomial basis.

    ``coefficients[m, k]`` is the coefficient of ``r**k`` in ``He_m``.
    """

    def __init__(self, max_order: int = DEFAULT_MAX_ORDER):
        if max_order < 0:
            raise ValueError(f"max_order must be nonnegative, got {max_order}")
        self.max_order = int(max_order)
        coef = np.zeros((self.max_order + 1, self.max_order + 1))
        coef[0, 0] = 1.0
        if self.max_order >= 1:
            coef[1, 1] = 1.0
        for m in range(1, self.max_order):
            # He_{m+1} = r He_m - m He_{m-1}
            coef[m + 1, 1:] = coef[m, :-1]
            coef[m + 1] -= m * coef[m - 1]
        coef.setflags(write=False)
        self.coefficients = coef

    def __repr__(self):
        return f"HermiteTable(max_order={self.max_order})"

    def polynomial(self, m: int) -> np.ndarray:
        self._check(m)
        return self.coefficients[m, : m + 1]

    def evaluate(self, m: int, r):
        """Evaluate He_m at ``r`` with the three-term recurrence.

        The recurrence is used instead of Horner's rule on the stored
        coefficients because it loses less precision for large ``|r|``.
        """
        self._check(m)
        r = np.asarray(r, dtype=float)
        prev = np.ones_like(r)
        if m == 0:
            return prev
        cur = r.copy()
        for k in range(1, m):
            prev, cur = cur, r * cur - k * prev
        return cur

    def _check(self, m):
        if m < 0:
            raise ValueError(f"Hermite order must be nonnegative, got {m}")
        if m > self.max_order:
            raise KernelCapacityError(
                f"Hermite order {m} exceeds table capacity {self.max_order}"
            )


@dataclass(frozen=True)
class SquaredExponentialKernel:
    """k(x, x') = amplitude**2 * exp(-(x - x')**2 / (2 * length_scale**2)).

    Parameters
    ----------
    amplitude : float
        Signal amplitude ``a``, in the units of the observable.
    length_scale : float
        Correlation length ``l``, in the units of the input.
    max_order : int
        Largest total derivative order ``i + j`` that may be requested.
    """

    amplitude: float
    length_scale: float
    max_order: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not (np.isfinite(self.length_scale) and self.length_scale > 0):
            raise ValueError(f"length_scale must be positive, got {self.length_scale}")

    @cached_property
    def hermite(self) -> HermiteTable:
        return _hermite_table(self.max_order)

    def evaluate(self, x, xp):
        return kernel_derivative(self, 0, 0, x, xp)

    def derivative(self, i: int, j: int, x, xp):
        return kernel_derivative(self, i, j, x, xp)

    def prior_variance(self, order: int) -> float:
        """Variance of the order-``order`` derivative at a single point."""
        return float(kernel_derivative(self, order, order, 0.0, 0.0))

    def with_capacity(self, max_order: int) -> "SquaredExponentialKernel":
        return SquaredExponentialKernel(self.amplitude, self.length_scale, max_order)


_TABLES: dict[int, HermiteTable] = {}


def _hermite_table(max_order):
    table = _TABLES.get(max_order)
    if table is None:
        table = _TABLES[max_order] = HermiteTable(max_order)
    return table


def kernel_derivative(kernel: SquaredExponentialKernel, i: int, j: int, x, xp):
    """Mixed derivative d^(i+j) k / dx^i dx'^j evaluated at (x, x').

    ``x`` and ``xp`` broadcast against each other; a scalar input pair
    returns a Python float.
    """
    if i < 0 or j < 0:
        raise ValueError(f"derivative orders must be nonnegative, got ({i}, {j})")
    order = i + j
    if order > kernel.max_order:
        raise KernelCapacityError(
            f"derivative order {i}+{j}={order} exceeds kernel capacity "
            f"{kernel.max_order}"
        )
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    ell = kernel.length_scale
    r = (x - xp) / ell
    value = kernel.hermite.evaluate(order, r) * np.exp(-0.5 * r * r)
    with np.errstate(over="ignore", invalid="ignore"):
        # overflow becomes inf (or inf * 0 = nan) and is reported by the caller
        scale = np.float64(kernel.amplitude) ** 2 / np.float64(ell) ** order
        if i % 2:
            scale = -scale
        value = scale * value
    if value.ndim == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class PolynomialMean:
    """Polynomial mean m(x) = c0 + c1 x + ... + cd x**d.

    An empty coefficient tuple is the zero mean.
    """

    coefficients: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", tuple(float(c) for c in self.coefficients)
        )

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return mean_derivative(self, 0, x)

    def derivative(self, i: int, x):
        return mean_derivative(self, i, x)


ZERO_MEAN = PolynomialMean()


def mean_derivative(mean: PolynomialMean, i: int, x):
    """Exact i-th derivative of a polynomial mean at ``x``."""
    if i < 0:
        raise ValueError(f"derivative order must be nonnegative, got {i}")
    x = np.asarray(x, dtype=float)
    coef = np.asarray(mean.coefficients, dtype=float)
    if i > 0 and coef.size:
        coef = np.polynomial.polynomial.polyder(coef, i)
    if coef.size == 0 or i > mean.degree:
        out = np.zeros_like(x)
    else:
        out = np.polynomial.polynomial.polyval(x, coef) * np.ones_like(x)
    if out.ndim == 0:
        return float(out)
    return out
