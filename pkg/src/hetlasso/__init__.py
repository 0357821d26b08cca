"""Lasso sign recovery under sparse Poisson-like heteroscedastic noise."""

__version__ = "0.1.0"

from .errors import (DimensionMismatch, DomainError, HetLassoError, InfeasibleTarget, NoConvergence,
                     NonFiniteValue, NonSymmetric, NotPositiveDefinite, SingularGram, ZeroColumn)
from .model import (Dataset, GaussianEnsembleSpec, NoiseKind, NoiseSpec, SparseCoefficients,
                    make_dataset, snr)
from .sign_oracle import KktSystem, RecoveryVerdict, feasible_lambda_interval
from .solver import LassoSolution, coordinate_descent

__all__ = [
    "__version__",
    "DimensionMismatch", "DomainError", "HetLassoError", "InfeasibleTarget", "NoConvergence",
    "NonFiniteValue", "NonSymmetric", "NotPositiveDefinite", "SingularGram", "ZeroColumn",
    "Dataset", "GaussianEnsembleSpec", "NoiseKind", "NoiseSpec", "SparseCoefficients",
    "make_dataset", "snr",
    "KktSystem", "RecoveryVerdict", "feasible_lambda_interval",
    "LassoSolution", "coordinate_descent",
]
