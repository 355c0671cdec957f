"""Drivers for the four benchmark problems: data, fit, predict, score."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .datagen import (
    COMPOSITE,
    COMPOSITE_CASES,
    COMPOSITE_PATTERN,
    OSCILLATOR,
    OSCILLATOR_PATTERN,
    PDE_PATTERN,
    NoiseSpec,
    relative_l2_error,
    sample_observations,
    solve_burgers,
    solve_kdv,
)
from .field import ObservationSet
from .inference import MULTI_DELTA, NOISELESS, ONE_DELTA, FitConfig, FittedModel, fit, predict_arrays

GRID_POINTS = 201

OSCILLATOR_METHODS = ("gp", "gek", "agrf")
KDV_NOISE = {"noise10": 0.10, "noise20": 0.20, "noise40": 0.40}
BURGERS_NOISE = 0.10
BURGERS_CALIBRATIONS = {"no-delta": NOISELESS, "one-delta": ONE_DELTA, "multi-delta": MULTI_DELTA}

EXAMPLES = {
    "composite": tuple(COMPOSITE_CASES),
    "oscillator": OSCILLATOR_METHODS,
    "kdv": tuple(KDV_NOISE),
    "burgers": tuple(BURGERS_CALIBRATIONS),
}


@dataclass
class ExperimentResult:
    """Everything one reproduction run produces.

    ``mean`` and ``variance`` map derivative order to arrays on ``grid``;
    ``truth`` holds the exact values on the same grid.
    """

    example: str
    variant: str
    seed: int
    grid: np.ndarray
    truth: dict[int, np.ndarray]
    mean: dict[int, np.ndarray]
    variance: dict[int, np.ndarray]
    rle: dict[int, float]
    data: ObservationSet
    models: dict[str, FittedModel]
    settings: dict = field(default_factory=dict)


@lru_cache(maxsize=None)
def reference_solution(name: str):
    """Cached N=1024 reference solution of ``kdv`` or ``burgers``."""
    return {"kdv": solve_kdv, "burgers": solve_burgers}[name]()


def _score(example, variant, seed, problem, data, predictors, orders, grid_points, settings):
    grid = np.linspace(*problem.domain, grid_points)
    truth, mean, var, rle = {}, {}, {}, {}
    for q in orders:
        model, q_model = predictors[q]
        mu, v, _ = predict_arrays(model, grid, q_model)
        t = np.asarray(problem.truth(grid, q), dtype=float)
        truth[q], mean[q], var[q] = t, mu, v
        rle[q] = relative_l2_error(t, mu)
    models = {}
    for q in orders:
        model = predictors[q][0]
        models.setdefault(model.report.get("label", "agrf"), model)
    return ExperimentResult(example, variant, seed, grid, truth, mean, var, rle,
                            data, models, settings)


def _config(base, mode, seed):
    return replace(base or FitConfig(), mode=mode, seed=seed)


def _labelled(model, label):
    model.report["label"] = label
    return model


def run_composite(case: str, seed: int = 0, config: FitConfig | None = None,
                  grid_points: int = GRID_POINTS) -> ExperimentResult:
    """x**2 sin(16x - 6) with the fixed sampling pattern restricted to a case."""
    orders = COMPOSITE_CASES[case]
    data = sample_observations(COMPOSITE, {i: COMPOSITE_PATTERN[i] for i in orders})
    cfg = _config(config, NOISELESS, seed)
    model = fit(data, config=cfg)
    preds = {q: (model, q) for q in (0, 1, 2)}
    return _score("composite", case, seed, COMPOSITE, data, preds, (0, 1, 2),
                  grid_points, {"mode": cfg.mode, "orders": list(orders)})


def run_oscillator(method: str, seed: int = 0, config: FitConfig | None = None,
                   grid_points: int = GRID_POINTS) -> ExperimentResult:
    """Damped oscillator with GP, gradient-enhanced kriging or the full field.

    ``gp`` fits displacement and velocity samples as two independent
    processes; ``gek`` conditions one field on both; ``agrf`` adds the
    acceleration samples.
    """
    if method not in OSCILLATOR_METHODS:
        raise ValueError(f"unknown oscillator method {method!r}")
    data = sample_observations(OSCILLATOR, OSCILLATOR_PATTERN)
    cfg = _config(config, NOISELESS, seed)
    if method == "gp":
        disp = _labelled(fit(data.subset([0]), config=cfg), "displacement")
        vel_data = ObservationSet.from_blocks({0: (data.locations[1], data.values[1])})
        vel = _labelled(fit(vel_data, config=cfg), "velocity")
        preds = {0: (disp, 0), 1: (vel, 0)}
    else:
        used = (0, 1) if method == "gek" else (0, 1, 2)
        model = fit(data.subset(used), config=cfg)
        preds = {0: (model, 0), 1: (model, 1)}
    return _score("oscillator", method, seed, OSCILLATOR, data, preds, (0, 1),
                  grid_points, {"mode": cfg.mode})


def pde_data(name: str, fraction: float, seed: int) -> ObservationSet:
    return sample_observations(reference_solution(name), PDE_PATTERN,
                               NoiseSpec(fraction), seed)


def run_kdv(level: str, seed: int = 0, config: FitConfig | None = None,
            grid_points: int = GRID_POINTS) -> ExperimentResult:
    """KdV at t=0.5 from 20 noisy samples per order, multiple-delta fit."""
    fraction = KDV_NOISE[level]
    problem = reference_solution("kdv")
    data = pde_data("kdv", fraction, seed)
    cfg = _config(config, MULTI_DELTA, seed)
    model = fit(data, config=cfg)
    preds = {q: (model, q) for q in (0, 1, 2)}
    return _score("kdv", level, seed, problem, data, preds, (0, 1, 2), grid_points,
                  {"mode": cfg.mode, "noise_fraction": fraction})


def run_burgers(calibration: str, seed: int = 0, config: FitConfig | None = None,
                grid_points: int = GRID_POINTS) -> ExperimentResult:
    """Burgers at t=0.5 from 20 samples per order with 10% noise."""
    mode = BURGERS_CALIBRATIONS[calibration]
    problem = reference_solution("burgers")
    data = pde_data("burgers", BURGERS_NOISE, seed)
    cfg = _config(config, mode, seed)
    model = fit(data, config=cfg)
    preds = {q: (model, q) for q in (0, 1, 2)}
    return _score("burgers", calibration, seed, problem, data, preds, (0, 1, 2),
                  grid_points, {"mode": cfg.mode, "noise_fraction": BURGERS_NOISE})


RUNNERS = {
    "composite": run_composite,
    "oscillator": run_oscillator,
    "kdv": run_kdv,
    "burgers": run_burgers,
}


def run(example: str, variant: str, seed: int = 0, config: FitConfig | None = None,
        grid_points: int = GRID_POINTS) -> ExperimentResult:
    if example not in RUNNERS:
        raise ValueError(f"unknown example {example!r}; choose from {sorted(RUNNERS)}")
    if variant not in EXAMPLES[example]:
        raise ValueError(f"unknown {example} variant {variant!r}; choose from {EXAMPLES[example]}")
    return RUNNERS[example](variant, seed, config, grid_points)
