"""Simulation and exact formulas for non-homogeneous space-time fractional Poisson processes."""

from .errors import AccuracyError, DomainError
from .process import MonteCarloEstimate, PmfTable, ProcessSpec, SamplePath
from .rates import Constant, CustomTable, GompertzMakeham, MusaOkumoto, RateFunction, Weibull
from .specfun import SeriesResult
from .subord import RngStream, SubordinatorPath

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "DomainError",
    "MonteCarloEstimate",
    "PmfTable",
    "ProcessSpec",
    "SamplePath",
    "Constant",
    "CustomTable",
    "GompertzMakeham",
    "MusaOkumoto",
    "RateFunction",
    "Weibull",
    "SeriesResult",
    "RngStream",
    "SubordinatorPath",
]
