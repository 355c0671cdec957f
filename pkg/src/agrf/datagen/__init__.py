"""Ground-truth problems and observation sampling for the four experiments."""

from .analytic import COMPOSITE, OSCILLATOR, AnalyticProblem, composite_truth, oscillator_truth
from .pde import PDEProblem, SolverError, solve_burgers, solve_kdv
from .sampling import NoiseSpec, relative_l2_error, sample_observations, truth_spread

COMPOSITE_PATTERN = {
    0: [0.0, 0.4, 0.6, 1.0],
    1: [0.2, 0.5, 0.8],
    2: [0.1, 0.5, 0.9],
}
COMPOSITE_CASES = {
    "case1": (0,),
    "case2": (0, 1),
    "case3": (0, 2),
    "case4": (0, 1, 2),
}
OSCILLATOR_LOCATIONS = [0.0, 0.25, 0.5, 0.75, 1.0]
OSCILLATOR_PATTERN = {i: OSCILLATOR_LOCATIONS for i in range(3)}
PDE_PATTERN = {0: 20, 1: 20, 2: 20}

__all__ = [
    "AnalyticProblem", "PDEProblem", "NoiseSpec", "SolverError",
    "COMPOSITE", "OSCILLATOR", "COMPOSITE_PATTERN", "COMPOSITE_CASES",
    "OSCILLATOR_LOCATIONS", "OSCILLATOR_PATTERN", "PDE_PATTERN",
    "composite_truth", "oscillator_truth", "solve_kdv", "solve_burgers",
    "sample_observations", "relative_l2_error", "truth_spread",
]
