"""Fourier pseudo-spectral solvers for periodic KdV and viscous Burgers on [0, 1).

Both equations are written as ``u_t = L u - (u**2 / 2)_x`` with a diagonal
linear operator ``L``. The linear part is integrated exactly through an
integrating factor and the nonlinear part with classical RK4; the quadratic
term is dealiased with the 2/3 rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KDV_DISPERSION = 0.0005
BURGERS_VISCOSITY = 0.01
DEFAULT_T = 0.5
REFERENCE_N = 1024

CFL = 0.1
CFL_MAX = 1.0
MAX_REFINEMENTS = 4


class SolverError(RuntimeError):
    """Time stepping did not stay stable within the refinement cap."""


@dataclass(frozen=True, eq=False)
class PDEProblem:
    """Spectral solution of a periodic PDE at time ``T``.

    ``coefficients`` are the rfft coefficients of ``u`` on the grid, so the
    solution and its derivatives can be evaluated anywhere by Fourier
    interpolation.
    """

    name: str
    n_grid: int
    coefficient: float
    T: float
    x: np.ndarray
    u: np.ndarray
    ux: np.ndarray
    uxx: np.ndarray
    coefficients: np.ndarray
    dt: float
    steps: int
    domain: tuple[float, float] = field(default=(0.0, 1.0))
    max_order: int = 2

    def on_grid(self, order: int) -> np.ndarray:
        return (self.u, self.ux, self.uxx)[order]

    def truth(self, x, order: int = 0):
        """Evaluate the order-``order`` derivative by Fourier interpolation."""
        return fourier_eval(self.coefficients, self.n_grid, x, order)

    def grid(self, count: int | None = None) -> np.ndarray:
        return self.x if count is None else np.linspace(*self.domain, count)


def wavenumbers(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n // 2 + 1)


def dealias_mask(n: int) -> np.ndarray:
    return np.arange(n // 2 + 1) < n / 3


def spectral_derivative(uhat: np.ndarray, n: int, order: int) -> np.ndarray:
    k = wavenumbers(n)
    dhat = (1j * k) ** order * uhat
    if order % 2:
        dhat[-1] = 0.0
    return np.fft.irfft(dhat, n)


def fourier_eval(uhat: np.ndarray, n: int, x, order: int = 0):
    """Evaluate the trigonometric interpolant (or a derivative) at ``x``."""
    x = np.asarray(x, dtype=float)
    k = wavenumbers(n)
    c = (1j * k) ** order * uhat / n
    weights = np.full(k.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
        if order % 2:
            c[-1] = 0.0
    phase = np.exp(1j * np.multiply.outer(x, k))
    out = (phase * (weights * c)).real.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def _integrate(uhat0, linear, n, T, dt0):
    k = wavenumbers(n)
    mask = dealias_mask(n)
    dx = 1.0 / n

    def nonlinear(vhat):
        u = np.fft.irfft(vhat, n)
        return -0.5j * k * mask * np.fft.rfft(u * u)

    dt = dt0
    for _ in range(MAX_REFINEMENTS + 1):
        steps = max(1, int(np.ceil(T / dt - 1e-9)))
        h = T / steps
        e_half = np.exp(0.5 * h * linear)
        e_full = e_half * e_half
        uhat = uhat0.copy()
        stable = True
        for _ in range(steps):
            a = nonlinear(uhat)
            b = nonlinear(e_half * (uhat + 0.5 * h * a))
            c = nonlinear(e_half * uhat + 0.5 * h * b)
            d = nonlinear(e_full * uhat + h * e_half * c)
            uhat = e_full * uhat + (h / 6.0) * (e_full * a + 2.0 * e_half * (b + c) + d)
            umax = np.max(np.abs(np.fft.irfft(uhat, n)))
            if not np.isfinite(umax) or umax * h / dx > CFL_MAX:
                stable = False
                break
        if stable:
            return uhat, h, steps
        dt = 0.5 * h
    raise SolverError(f"unstable after {MAX_REFINEMENTS} step refinements (last dt={dt:g})")


def _solve(name, u0_func, linear_func, coefficient, n, T):
    if n < 256 or n & (n - 1):
        raise ValueError(f"grid size must be a power of two >= 256, got {n}")
    if T < 0:
        raise ValueError("final time must be nonnegative")
    x = np.arange(n) / n
    u0 = u0_func(x)
    uhat = np.fft.rfft(u0)
    if T == 0:
        h, steps = 0.0, 0
        u = u0
    else:
        dt0 = CFL * (1.0 / n) / np.max(np.abs(u0))
        uhat, h, steps = _integrate(uhat, linear_func(wavenumbers(n)), n, T, dt0)
        u = np.fft.irfft(uhat, n)
    ux = spectral_derivative(uhat, n, 1)
    uxx = spectral_derivative(uhat, n, 2)
    for arr in (x, u, ux, uxx, uhat):
        arr.setflags(write=False)
    return PDEProblem(name, n, coefficient, T, x, u, ux, uxx, uhat, h, steps)


def solve_kdv(n: int = REFERENCE_N, T: float = DEFAULT_T,
              dispersion: float = KDV_DISPERSION) -> PDEProblem:
    """u_t + u u_x + dispersion * u_xxx = 0 with u(x, 0) = cos(2 pi x)."""
    return _solve("kdv", lambda x: np.cos(2 * np.pi * x),
                  lambda k: 1j * dispersion * k**3, dispersion, n, T)


def solve_burgers(n: int = REFERENCE_N, T: float = DEFAULT_T,
                  viscosity: float = BURGERS_VISCOSITY) -> PDEProblem:
    """u_t + u u_x - viscosity * u_xx = 0 with u(x, 0) = sin(2 pi x)."""
    return _solve("burgers", lambda x: np.sin(2 * np.pi * x),
                  lambda k: -viscosity * k**2, viscosity, n, T)
