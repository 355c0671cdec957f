"""Observation sampling with per-order additive Gaussian noise, and the RLE metric."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from ..field import ObservationSet
from .pde import PDEProblem

DOMAIN_GRID = 1001

# order -> explicit locations, or order -> number of random locations
Pattern = Mapping[int, Union[Sequence[float], int]]


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level as a fraction of each order's spread over the domain.

    Order-``i`` values receive N(0, (fraction * sigma_i)**2) noise, where
    ``sigma_i`` is the standard deviation of the true order-``i`` field on
    the domain grid.
    """

    fraction: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.fraction) and self.fraction >= 0):
            raise ValueError(f"noise fraction must be nonnegative, got {self.fraction}")


NOISELESS_DATA = NoiseSpec(0.0)


def truth_spread(problem, order: int) -> float:
    """Standard deviation of the true order-``order`` field on the domain grid."""
    if isinstance(problem, PDEProblem):
        return float(np.std(problem.on_grid(order)))
    return float(np.std(problem.truth(problem.grid(DOMAIN_GRID), order)))


def _random_locations(problem, count, rng):
    if isinstance(problem, PDEProblem):
        if count > problem.n_grid:
            raise ValueError(f"cannot draw {count} distinct points from a {problem.n_grid}-point grid")
        return np.sort(rng.choice(problem.n_grid, size=count, replace=False))
    lo, hi = problem.domain
    return np.sort(rng.uniform(lo, hi, size=count))


def sample_observations(problem, pattern: Pattern, noise: NoiseSpec = NOISELESS_DATA,
                        seed: int = 0) -> ObservationSet:
    """Draw observations of ``problem`` following ``pattern``.

    Random locations on a PDE problem are distinct solver grid nodes and take
    the grid values directly. All random draws come from one generator seeded
    with ``seed``: locations first (ascending order), then noise, so the same
    seed at different noise fractions reuses locations and noise shape.
    """
    rng = np.random.default_rng(seed)
    lo, hi = problem.domain
    blocks = {}
    for order in sorted(pattern):
        if order > problem.max_order:
            raise ValueError(f"{problem.name} provides orders up to {problem.max_order}")
        spec = pattern[order]
        if isinstance(spec, (int, np.integer)):
            idx = _random_locations(problem, int(spec), rng)
            if isinstance(problem, PDEProblem):
                x = problem.x[idx]
                y = problem.on_grid(order)[idx]
            else:
                x = idx
                y = np.asarray(problem.truth(x, order), dtype=float)
        else:
            x = np.asarray(spec, dtype=float)
            if np.any((x < lo) | (x > hi)):
                raise ValueError(f"order {order}: locations outside domain [{lo}, {hi}]")
            y = np.atleast_1d(np.asarray(problem.truth(x, order), dtype=float))
        blocks[order] = (x, y)
    if noise.fraction > 0:
        for order in sorted(blocks):
            x, y = blocks[order]
            eps = rng.standard_normal(y.size)
            blocks[order] = (x, y + noise.fraction * truth_spread(problem, order) * eps)
    return ObservationSet.from_blocks(blocks)


def relative_l2_error(truth, approx) -> float:
    """||truth - approx||_2 / ||truth||_2 on a common grid."""
    truth = np.asarray(truth, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if truth.shape != approx.shape:
        raise ValueError(f"shape mismatch {truth.shape} vs {approx.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise ValueError("truth has zero norm")
    return float(np.linalg.norm(truth - approx) / denom)
