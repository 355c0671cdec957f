"""Observation containers and block covariance assembly for the augmented field.

Rows of every matrix and vector built here follow one fixed layout:
observations sorted by ascending derivative order, and within an order in the
order they were supplied.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .kernel import (
    DEFAULT_MAX_ORDER,
    PolynomialMean,
    SquaredExponentialKernel,
    kernel_derivative,
    mean_derivative,
)

JITTER_STEPS = (1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


class ObservationError(ValueError):
    """Invalid observation data."""


class AssemblyError(ArithmeticError):
    """A covariance entry evaluated to a non-finite number."""


class FactorizationError(np.linalg.LinAlgError):
    """Cholesky factorization failed even after jitter escalation."""


class ObservationSet:
    """Observations of a function and its derivatives, grouped by order.

    Parameters
    ----------
    orders, locations, values : sequences of equal length
        One entry per observation. ``orders`` are nonnegative integers.

    Attributes
    ----------
    locations, values : tuple of ndarray
        ``locations[i]`` and ``values[i]`` hold the order-``i`` block; an
        order with no data has empty arrays.
    row_ids : tuple of ndarray
        Position of every observation in the input sequence, per order.
    """

    def __init__(self, orders: Iterable[int], locations: Iterable[float],
                 values: Iterable[float]):
        orders = np.asarray(list(orders))
        x = np.asarray(list(locations), dtype=float)
        y = np.asarray(list(values), dtype=float)
        if not (orders.shape == x.shape == y.shape) or orders.ndim != 1:
            raise ObservationError("orders, locations and values must be 1-d and equal length")
        if orders.size == 0:
            raise ObservationError("at least one observation is required")
        if not np.issubdtype(orders.dtype, np.integer):
            if not np.all(np.mod(orders, 1) == 0):
                raise ObservationError("derivative orders must be integers")
            orders = orders.astype(int)
        if np.any(orders < 0):
            raise ObservationError("derivative orders must be nonnegative")
        bad = ~(np.isfinite(x) & np.isfinite(y))
        if np.any(bad):
            raise ObservationError(
                f"non-finite location or value at rows {np.flatnonzero(bad).tolist()}"
            )
        self.max_order = int(orders.max())
        ids = np.arange(orders.size)
        self.row_ids = tuple(ids[orders == i] for i in range(self.max_order + 1))
        self.locations = tuple(x[r] for r in self.row_ids)
        self.values = tuple(y[r] for r in self.row_ids)
        for arr in self.row_ids + self.locations + self.values:
            arr.setflags(write=False)

    @classmethod
    def from_blocks(cls, blocks: dict[int, tuple[Sequence[float], Sequence[float]]]):
        """Build from ``{order: (locations, values)}``."""
        orders, xs, ys = [], [], []
        for order in sorted(blocks):
            loc, val = blocks[order]
            loc = np.atleast_1d(np.asarray(loc, dtype=float))
            val = np.atleast_1d(np.asarray(val, dtype=float))
            if loc.shape != val.shape:
                raise ObservationError(f"order {order}: locations and values differ in length")
            orders += [order] * loc.size
            xs += loc.tolist()
            ys += val.tolist()
        return cls(orders, xs, ys)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.locations)

    @property
    def size(self) -> int:
        return sum(self.counts)

    def __len__(self):
        return self.size

    @property
    def present_orders(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.counts) if c)

    def stacked(self):
        """Return (orders, locations, values) in row layout."""
        orders = np.concatenate(
            [np.full(c, i, dtype=int) for i, c in enumerate(self.counts)]
        )
        return orders, np.concatenate(self.locations), np.concatenate(self.values)

    def subset(self, orders: Iterable[int]) -> "ObservationSet":
        keep = set(orders)
        return ObservationSet.from_blocks(
            {i: (self.locations[i], self.values[i]) for i in keep
             if i <= self.max_order and self.counts[i]}
        )

    def coincident_duplicates(self) -> list[tuple[int, list[int]]]:
        """Groups of input rows sharing both order and location."""
        groups = []
        for i, (loc, ids) in enumerate(zip(self.locations, self.row_ids)):
            uniq, inverse, cnt = np.unique(loc, return_inverse=True, return_counts=True)
            for k in np.flatnonzero(cnt > 1):
                groups.append((i, ids[inverse == k].tolist()))
        return groups

    def validate(self, noisy: bool):
        """Reject coincident same-order rows unless the data are noisy."""
        if noisy:
            return
        dups = self.coincident_duplicates()
        if dups:
            desc = "; ".join(f"order {i} rows {rows}" for i, rows in dups)
            raise ObservationError(
                f"coincident observations are only allowed in noisy mode: {desc}"
            )

    def checksum(self) -> str:
        orders, x, y = self.stacked()
        h = hashlib.sha256()
        for arr in (orders.astype(np.int64), x, y):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, ObservationSet):
            return NotImplemented
        return self.checksum() == other.checksum()

    def __repr__(self):
        return f"ObservationSet(counts={self.counts})"


@dataclass(frozen=True)
class Hyperparameters:
    """Kernel amplitude, length scale and per-order noise intensities."""

    amplitude: float
    length_scale: float
    noise: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "noise", tuple(float(d) for d in self.noise))
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not (np.isfinite(self.length_scale) and self.length_scale > 0):
            raise ValueError(f"length_scale must be positive, got {self.length_scale}")
        if any(not np.isfinite(d) or d < 0 for d in self.noise):
            raise ValueError(f"noise intensities must be nonnegative, got {self.noise}")

    def noise_for(self, order: int) -> float:
        return self.noise[order] if order < len(self.noise) else 0.0

    def kernel(self, max_order: int = DEFAULT_MAX_ORDER) -> SquaredExponentialKernel:
        return SquaredExponentialKernel(self.amplitude, self.length_scale, max_order)


@dataclass(frozen=True)
class QuerySpec:
    location: float
    order: int


@dataclass(frozen=True)
class BlockGram:
    """Dense training covariance with its row layout.

    ``orders[r]`` and ``index[r]`` give the derivative order and the
    within-order position of row ``r``; ``offsets[i]`` is the first row of
    the order-``i`` block.
    """

    matrix: np.ndarray
    orders: np.ndarray
    index: np.ndarray
    offsets: tuple[int, ...]

    def block(self, i: int, ip: int) -> np.ndarray:
        o = self.offsets
        return self.matrix[o[i]:o[i + 1], o[ip]:o[ip + 1]]


def _offsets(counts):
    return tuple(int(v) for v in np.concatenate([[0], np.cumsum(counts)]))


def assemble_gram(obs: ObservationSet, hp: Hyperparameters, noisy: bool = False,
                  max_order: int = DEFAULT_MAX_ORDER) -> BlockGram:
    """Covariance matrix of all observations under the augmented field.

    Entry ((i, j), (i', j')) is d^(i+i') k / dx^i dx'^i' at (x_ij, x_i'j').
    With ``noisy`` set, delta_i**2 is added on the diagonal of block (i, i).
    """
    kern = hp.kernel(max_order)
    counts = obs.counts
    offsets = _offsets(counts)
    P = offsets[-1]
    K = np.zeros((P, P))
    present = obs.present_orders
    for a, i in enumerate(present):
        for ip in present[a:]:
            blk = kernel_derivative(
                kern, i, ip, obs.locations[i][:, None], obs.locations[ip][None, :]
            )
            K[offsets[i]:offsets[i + 1], offsets[ip]:offsets[ip + 1]] = blk
    bad = ~np.isfinite(K)
    if np.any(bad):
        r, c = np.argwhere(bad)[0]
        raise AssemblyError(f"non-finite covariance between rows {r} and {c}")
    K = np.triu(K)
    K = K + np.triu(K, 1).T
    orders = np.concatenate([np.full(c, i, dtype=int) for i, c in enumerate(counts)])
    index = np.concatenate([np.arange(c) for c in counts])
    if noisy:
        delta = np.array([hp.noise_for(i) for i in range(len(counts))])
        K[np.diag_indices(P)] += delta[orders] ** 2
    return BlockGram(K, orders, index, offsets)


def cross_vector(obs: ObservationSet, hp: Hyperparameters, query: QuerySpec,
                 max_order: int = DEFAULT_MAX_ORDER) -> np.ndarray:
    """Covariances between the queried derivative and every observation."""
    kern = hp.kernel(max_order)
    parts = [
        np.atleast_1d(kernel_derivative(kern, query.order, i, query.location, loc))
        for i, loc in enumerate(obs.locations)
        if loc.size
    ]
    return np.concatenate(parts)


def cross_matrix(obs: ObservationSet, hp: Hyperparameters, locations, order: int,
                 max_order: int = DEFAULT_MAX_ORDER) -> np.ndarray:
    """Rows of :func:`cross_vector` for many query locations at one order."""
    kern = hp.kernel(max_order)
    xq = np.asarray(locations, dtype=float)[:, None]
    parts = [
        kernel_derivative(kern, order, i, xq, loc[None, :])
        for i, loc in enumerate(obs.locations)
        if loc.size
    ]
    return np.concatenate(parts, axis=1)


def residual_vector(obs: ObservationSet, mean: PolynomialMean) -> np.ndarray:
    """Observed values minus the prior mean of each observation."""
    return np.concatenate([
        np.asarray(val - mean_derivative(mean, i, loc), dtype=float)
        for i, (loc, val) in enumerate(zip(obs.locations, obs.values))
    ])


def cholesky_with_jitter(K: np.ndarray, steps: Sequence[float] = JITTER_STEPS):
    """Lower Cholesky factor of ``K``, adding diagonal jitter if needed.

    Returns ``(L, jitter)`` where ``jitter`` is the absolute amount added to
    the diagonal (0.0 when none was needed).
    """
    try:
        return scipy.linalg.cholesky(K, lower=True, check_finite=False), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(K)))
    if not np.isfinite(scale) or scale <= 0:
        raise FactorizationError("Gram matrix has a nonpositive diagonal")
    eye = np.eye(K.shape[0])
    for eps in steps:
        jitter = eps * scale
        try:
            return scipy.linalg.cholesky(K + jitter * eye, lower=True, check_finite=False), jitter
        except np.linalg.LinAlgError:
            continue
    if not steps:
        raise FactorizationError("Cholesky failed and no jitter is allowed")
    raise FactorizationError(
        f"Cholesky failed with jitter up to {steps[-1]:g} x mean diagonal"
    )
