"""Regression with an augmented Gaussian random field.

Observations of a function and of its derivatives of any order, at arbitrary
and possibly disjoint locations, are conditioned jointly under a squared
exponential prior. Posterior mean and variance are available for every
derivative order.
"""

__version__ = "0.1.0"

from .field import (
    BlockGram,
    Hyperparameters,
    ObservationError,
    ObservationSet,
    QuerySpec,
    assemble_gram,
    cross_vector,
    residual_vector,
)
from .inference import (
    MULTI_DELTA,
    NOISELESS,
    ONE_DELTA,
    FitConfig,
    FitError,
    FittedModel,
    Prediction,
    condition,
    fit,
    log_likelihood,
    posterior,
    predict_arrays,
    predict_curve,
)
from .kernel import (
    HermiteTable,
    KernelCapacityError,
    PolynomialMean,
    SquaredExponentialKernel,
    kernel_derivative,
    mean_derivative,
)

__all__ = [
    "BlockGram", "FitConfig", "FitError", "FittedModel", "HermiteTable",
    "Hyperparameters", "KernelCapacityError", "MULTI_DELTA", "NOISELESS",
    "ONE_DELTA", "ObservationError", "ObservationSet", "PolynomialMean",
    "Prediction", "QuerySpec", "SquaredExponentialKernel", "assemble_gram",
    "condition", "cross_vector", "fit", "kernel_derivative", "log_likelihood",
    "mean_derivative", "posterior", "predict_arrays", "predict_curve",
    "residual_vector",
]
