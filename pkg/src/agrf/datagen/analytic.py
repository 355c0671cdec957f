"""Closed-form test functions with exact first and second derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

ZETA = 0.1
OMEGA0 = 22.0
_DECAY = ZETA * OMEGA0
_FREQ = np.sqrt(1.0 - ZETA**2) * OMEGA0


def _check_order(order):
    if order not in (0, 1, 2):
        raise ValueError(f"only orders 0, 1 and 2 are available, got {order}")


def composite_truth(x, order: int = 0):
    """y(x) = x**2 sin(16x - 6) and its first two derivatives."""
    _check_order(order)
    x = np.asarray(x, dtype=float)
    s, c = np.sin(16 * x - 6), np.cos(16 * x - 6)
    if order == 0:
        out = x**2 * s
    elif order == 1:
        out = 2 * x * s + 16 * x**2 * c
    else:
        out = 2 * s + 64 * x * c - 256 * x**2 * s
    return float(out) if out.ndim == 0 else out


def oscillator_truth(t, order: int = 0):
    """Damped oscillator exp(-zeta w0 t) sin(sqrt(1 - zeta**2) w0 t).

    Uses zeta = 0.1 and w0 = 22, so y'' + 2 zeta w0 y' + w0**2 y = 0.
    """
    _check_order(order)
    t = np.asarray(t, dtype=float)
    e = np.exp(-_DECAY * t)
    s, c = np.sin(_FREQ * t), np.cos(_FREQ * t)
    if order == 0:
        out = e * s
    elif order == 1:
        out = e * (_FREQ * c - _DECAY * s)
    else:
        out = e * ((_DECAY**2 - _FREQ**2) * s - 2 * _DECAY * _FREQ * c)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AnalyticProblem:
    name: str
    func: Callable
    domain: tuple[float, float] = (0.0, 1.0)
    max_order: int = 2

    def truth(self, x, order: int = 0):
        return self.func(x, order)

    def grid(self, count: int = 1001) -> np.ndarray:
        return np.linspace(*self.domain, count)


COMPOSITE = AnalyticProblem("composite", composite_truth)
OSCILLATOR = AnalyticProblem("oscillator", oscillator_truth)
