"""Posterior prediction, log-likelihood and hyperparameter fitting."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .field import (
    JITTER_STEPS,
    FactorizationError,
    Hyperparameters,
    ObservationSet,
    QuerySpec,
    assemble_gram,
    cholesky_with_jitter,
    cross_matrix,
    residual_vector,
)
from .kernel import DEFAULT_MAX_ORDER, ZERO_MEAN, PolynomialMean, kernel_derivative

log = logging.getLogger(__name__)

BAND_Z = 1.96
LOG_2PI = np.log(2.0 * np.pi)

# Posterior variance is a difference of two numbers of size K**, so float64
# cannot resolve it below ~eps * K**. For high derivative orders and short
# length scales that floor is visible, so the variance term is recomputed in
# extended precision where the platform offers it.
EXTENDED = np.longdouble if np.finfo(np.longdouble).eps < np.finfo(float).eps else None

NOISELESS = "noiseless"
ONE_DELTA = "noisy-one-delta"
MULTI_DELTA = "noisy-multi-delta"
MODES = (NOISELESS, ONE_DELTA, MULTI_DELTA)


class FitError(RuntimeError):
    """No optimizer restart reached a finite likelihood."""


class UnsupportedOrderError(ValueError):
    """Query order beyond what the model's kernel capacity can answer."""


class NumericalHealthWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Prediction:
    location: float
    order: int
    mean: float
    variance: float
    raw_variance: float

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))

    @property
    def lower(self) -> float:
        return self.mean - BAND_Z * self.std

    @property
    def upper(self) -> float:
        return self.mean + BAND_Z * self.std


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings for :func:`fit`.

    ``restarts`` starting points are drawn log-uniformly from ranges scaled
    by the data; each Nelder-Mead run stops when the simplex diameter in log
    space drops below ``xatol`` or after ``max_evals`` evaluations.
    """

    mode: str = NOISELESS
    restarts: int = 8
    max_evals: int = 2000
    xatol: float = 1e-8
    seed: int = 0
    max_order: int = DEFAULT_MAX_ORDER
    jitter_steps: tuple = JITTER_STEPS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")

    @property
    def noisy(self) -> bool:
        return self.mode != NOISELESS


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Training data conditioned under fixed hyperparameters.

    ``chol`` factors the (noise-augmented, possibly jittered) Gram and
    ``alpha`` solves it against the residual vector.
    """

    obs: ObservationSet
    mean: PolynomialMean
    hyper: Hyperparameters
    mode: str
    max_order: int
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    log_likelihood: float
    report: dict = field(default_factory=dict)
    jitter_steps: tuple = JITTER_STEPS
    chol_ext: np.ndarray | None = None

    @property
    def noisy(self) -> bool:
        return self.mode != NOISELESS

    @property
    def data_order(self) -> int:
        return self.obs.max_order

    def max_query_order(self) -> int:
        """Largest q whose cross-covariances q + n fit the kernel capacity."""
        return self.max_order - self.data_order

    def check_order(self, q: int):
        if q < 0:
            raise UnsupportedOrderError(f"query order must be nonnegative, got {q}")
        if q > self.max_query_order():
            raise UnsupportedOrderError(
                f"query order {q} with data up to order {self.data_order} needs kernel "
                f"order {q + self.data_order}, model capacity is {self.max_order}"
            )


def _factor(obs, mean, hp, noisy, max_order, jitter_steps=JITTER_STEPS):
    gram = assemble_gram(obs, hp, noisy=noisy, max_order=max_order)
    L, jitter = cholesky_with_jitter(gram.matrix, jitter_steps)
    resid = residual_vector(obs, mean)
    alpha = scipy.linalg.cho_solve((L, True), resid, check_finite=False)
    P = resid.size
    ll = (-0.5 * P * LOG_2PI - np.sum(np.log(np.diag(L)))
          - 0.5 * float(resid @ alpha))
    return L, alpha, jitter, float(ll), gram.matrix


def _cholesky_extended(K):
    """Column Cholesky in extended precision; None if a pivot is not positive."""
    n = K.shape[0]
    A = K.astype(EXTENDED)
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if not d > 0:
            return None
        L[j, j] = np.sqrt(d)
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def _forward_extended(L, B):
    """Solve L V = B by forward substitution, ``B`` of shape (n, m)."""
    V = np.empty(B.shape, dtype=EXTENDED)
    for i in range(L.shape[0]):
        V[i] = (B[i] - L[i, :i] @ V[:i]) / L[i, i]
    return V


def log_likelihood(obs: ObservationSet, mean: PolynomialMean, hp: Hyperparameters,
                   noisy: bool = False, max_order: int = DEFAULT_MAX_ORDER,
                   jitter_steps: Sequence[float] = JITTER_STEPS) -> float:
    """Gaussian log marginal likelihood of the observations.

    Returns ``-inf`` when the Gram matrix cannot be factorized even with
    jitter, so an optimizer can treat the point as rejected.
    """
    try:
        return _factor(obs, mean, hp, noisy, max_order, jitter_steps)[3]
    except FactorizationError:
        return -np.inf


def condition(obs: ObservationSet, hp: Hyperparameters, mean: PolynomialMean = ZERO_MEAN,
              mode: str = NOISELESS, max_order: int = DEFAULT_MAX_ORDER,
              report: dict | None = None,
              jitter_steps: Sequence[float] = JITTER_STEPS) -> FittedModel:
    """Condition the field on ``obs`` with the given hyperparameters."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    noisy = mode != NOISELESS
    obs.validate(noisy)
    if 2 * obs.max_order > max_order:
        raise UnsupportedOrderError(
            f"data of order {obs.max_order} need kernel order {2 * obs.max_order}, "
            f"capacity is {max_order}"
        )
    if not noisy:
        hp = Hyperparameters(hp.amplitude, hp.length_scale, (0.0,) * (obs.max_order + 1))
    jitter_steps = tuple(float(e) for e in jitter_steps)
    L, alpha, jitter, ll, K = _factor(obs, mean, hp, noisy, max_order, jitter_steps)
    if jitter:
        log.debug("Gram needed jitter %.3g", jitter)
    chol_ext = None
    if EXTENDED is not None:
        chol_ext = _cholesky_extended(K + jitter * np.eye(K.shape[0]))
    return FittedModel(obs, mean, hp, mode, max_order, L, alpha, jitter, ll,
                       dict(report or {}), jitter_steps, chol_ext)


def _posterior_arrays(model: FittedModel, locations, order: int):
    model.check_order(order)
    x = np.atleast_1d(np.asarray(locations, dtype=float))
    kx = cross_matrix(model.obs, model.hyper, x, order, model.max_order)
    kern = model.hyper.kernel(max(model.max_order, 2 * order))
    mean = np.asarray(model.mean.derivative(order, x)) * np.ones_like(x) + kx @ model.alpha
    prior = kernel_derivative(kern, order, order, 0.0, 0.0)
    if model.chol_ext is not None:
        v = _forward_extended(model.chol_ext, kx.T.astype(EXTENDED))
        raw = (EXTENDED(prior) - np.einsum("ij,ij->j", v, v)).astype(float)
    else:
        v = scipy.linalg.solve_triangular(model.chol, kx.T, lower=True, check_finite=False)
        raw = prior - np.einsum("ij,ij->j", v, v)
    if model.noisy:
        raw = raw + model.hyper.noise_for(order) ** 2
    floor = -1e-6 * model.hyper.amplitude**2
    worst = float(np.min(raw))
    if worst < floor:
        warnings.warn(
            f"posterior variance {worst:.3g} below {floor:.3g} before clamping",
            NumericalHealthWarning, stacklevel=3,
        )
    elif worst < 0:
        log.debug("clamping posterior variance %.3g to zero", worst)
    return x, mean, np.maximum(raw, 0.0), raw


def posterior(model: FittedModel, query: QuerySpec) -> Prediction:
    """Posterior mean and variance of one derivative at one location."""
    x, mu, var, raw = _posterior_arrays(model, [query.location], query.order)
    return Prediction(float(x[0]), query.order, float(mu[0]), float(var[0]), float(raw[0]))


def predict_arrays(model: FittedModel, grid, order: int):
    """Vectorized posterior: returns ``(mean, variance, raw_variance)`` arrays."""
    _, mu, var, raw = _posterior_arrays(model, grid, order)
    return mu, var, raw


def predict_curve(model: FittedModel, grid: Sequence[float],
                  orders: Iterable[int]) -> list[Prediction]:
    """One :class:`Prediction` per (order, grid point), orders ascending."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("prediction grid is empty")
    out = []
    for q in sorted(set(orders)):
        x, mu, var, raw = _posterior_arrays(model, grid, q)
        out.extend(
            Prediction(float(a), q, float(b), float(c), float(d))
            for a, b, c, d in zip(x, mu, var, raw)
        )
    return out


def _spread(v):
    v = np.asarray(v, dtype=float)
    s = float(np.std(v)) if v.size > 1 else 0.0
    if s > 0:
        return s
    s = float(np.max(np.abs(v))) if v.size else 0.0
    return s if s > 0 else 1.0


def data_scales(obs: ObservationSet):
    """Return ``(s_x, s_y, s_per_order)`` used to place restarts.

    ``s_y`` is the spread of the observable; without order-0 data it is
    inferred from the lowest present order as ``s_i * s_x**i``.
    """
    allx = np.concatenate(obs.locations)
    s_x = float(np.ptp(allx)) or 1.0
    s_i = [(_spread(v) if v.size else 0.0) for v in obs.values]
    low = obs.present_orders[0]
    s_y = s_i[low] * (s_x / (2 * np.pi)) ** low if low else s_i[0]
    return s_x, s_y, s_i


class _Objective:
    """Negative log-likelihood over log-transformed hyperparameters."""

    def __init__(self, obs, mean, mode, max_order, jitter_steps):
        self.obs, self.mean, self.mode, self.max_order = obs, mean, mode, max_order
        self.jitter_steps = jitter_steps
        self.nobs = obs.max_order + 1
        self.present = obs.present_orders
        self.noisy = mode != NOISELESS

    def unpack(self, theta) -> Hyperparameters:
        a, ell = np.exp(theta[:2])
        noise = np.zeros(self.nobs)
        if self.mode == ONE_DELTA:
            noise[list(self.present)] = np.exp(theta[2])
        elif self.mode == MULTI_DELTA:
            noise[list(self.present)] = np.exp(theta[2:])
        return Hyperparameters(float(a), float(ell), tuple(noise))

    def __call__(self, theta):
        try:
            hp = self.unpack(theta)
        except ValueError:
            return np.inf
        ll = log_likelihood(self.obs, self.mean, hp, self.noisy, self.max_order,
                            self.jitter_steps)
        return -ll if np.isfinite(ll) else np.inf


def _bounds_and_ranges(obs, mode):
    s_x, s_y, s_i = data_scales(obs)
    lo, hi = [np.log(1e-3 * s_y), np.log(1e-3 * s_x)], [np.log(1e3 * s_y), np.log(1e2 * s_x)]
    rlo, rhi = [np.log(1e-2 * s_y), np.log(1e-2 * s_x)], [np.log(1e2 * s_y), np.log(10 * s_x)]
    present = obs.present_orders
    if mode == ONE_DELTA:
        s = [s_i[i] for i in present]
        lo.append(np.log(1e-6 * min(s)))
        hi.append(np.log(10 * max(s)))
        rlo.append(np.log(1e-4 * min(s)))
        rhi.append(np.log(max(s)))
    elif mode == MULTI_DELTA:
        for i in present:
            lo.append(np.log(1e-6 * s_i[i]))
            hi.append(np.log(10 * s_i[i]))
            rlo.append(np.log(1e-4 * s_i[i]))
            rhi.append(np.log(s_i[i]))
    return np.array(lo), np.array(hi), np.array(rlo), np.array(rhi)


def fit(obs: ObservationSet, mean: PolynomialMean = ZERO_MEAN,
        config: FitConfig | None = None) -> FittedModel:
    """Fit hyperparameters by multi-start Nelder-Mead on the log-likelihood.

    Parameters are optimized in log space: amplitude, length scale and, for
    noisy modes, the noise intensity of each present order (or one shared
    intensity). Noise is fixed at zero in noiseless mode.
    """
    config = config or FitConfig()
    obs.validate(config.noisy)
    objective = _Objective(obs, mean, config.mode, config.max_order, config.jitter_steps)
    lo, hi, rlo, rhi = _bounds_and_ranges(obs, config.mode)
    rng = np.random.default_rng(config.seed)
    starts = rng.uniform(rlo, rhi, size=(config.restarts, lo.size))

    trace = []
    best = None
    for k, x0 in enumerate(starts):
        res = scipy.optimize.minimize(
            objective, x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
            options={"xatol": config.xatol, "fatol": np.inf,
                     "maxfev": config.max_evals, "maxiter": config.max_evals},
        )
        ll = -float(res.fun)
        trace.append({"restart": k, "log_likelihood": ll, "evaluations": int(res.nfev),
                      "converged": bool(res.success)})
        # strict '>' keeps the lowest restart index on ties
        if np.isfinite(ll) and (best is None or ll > best[0]):
            best = (ll, res.x, k)
    if best is None:
        raise FitError(f"all {config.restarts} restarts failed to reach a finite likelihood")

    hp = objective.unpack(best[1])
    report = {
        "best_restart": best[2],
        "finite_restarts": sum(np.isfinite(t["log_likelihood"]) for t in trace),
        "converged_restarts": sum(t["converged"] for t in trace),
        "evaluations": sum(t["evaluations"] for t in trace),
        "restarts": trace,
    }
    return condition(obs, hp, mean, config.mode, config.max_order, report,
                     config.jitter_steps)
