"""Numerics for Schatten classes, nuclearity and Weyl laws of model operators on tori and S^2."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError, ConsistencyError, ContractError, DivergenceError, FitError, LabError,
    SolverError, ThresholdViolation, UnsupportedError,
)
from .geometry import (
    LevelTable, ManifoldModel, SpectralLevel, SummabilityResult, counting_function,
    level_table, shell_sum, spectral_levels, summability_classifier, weyl_fit,
)
from .operators import Bessel, Compose, Multiply, OperatorSpec, TruncatedOperator, assemble

__all__ = [
    "__version__", "LabError", "ConfigurationError", "ContractError", "UnsupportedError",
    "FitError", "DivergenceError", "ConsistencyError", "SolverError", "ThresholdViolation",
    "ManifoldModel", "SpectralLevel", "LevelTable", "SummabilityResult", "level_table",
    "spectral_levels", "counting_function", "weyl_fit", "shell_sum", "summability_classifier",
    "Bessel", "Compose", "Multiply", "OperatorSpec", "TruncatedOperator", "assemble",
]
