"""Pathwise functional Ito calculus on cadlag paths.

Paths, non-anticipative functionals, their horizontal and vertical
derivatives, quadratic variation along subdivisions and Follmer integrals.
"""

from .derivatives import FDScheme, horizontal_derivative, vertical_gradient, vertical_hessian
from .errors import ConfigError, ConsistencyError, DomainError, EvaluationError, PathCalcError, PrecisionError
from .follmer import (ApproximantPair, CovReport, build_approximants, change_of_variable_report,
                      follmer_sum, jump_compensation)
from .functionals import BuiltinSpec, Functional, builtin, evaluate
from .generators import GenSpec, GroundTruth, dirichlet_sum, generate
from .paths import CadlagPath, PathPair, d_infty, jumps, step_approximation
from .qv import (QVMeasure, Subdivision, cross_variation, discrete_qv, dyadic_subdivision,
                 jump_augmented_subdivision, qv_decompose, stopping_time_subdivision)

__version__ = "0.1.0"

__all__ = [
    "ApproximantPair", "BuiltinSpec", "CadlagPath", "ConfigError", "ConsistencyError", "CovReport",
    "DomainError", "EvaluationError", "FDScheme", "Functional", "GenSpec", "GroundTruth",
    "PathCalcError", "PathPair", "PrecisionError", "QVMeasure", "Subdivision", "build_approximants",
    "builtin", "change_of_variable_report", "cross_variation", "d_infty", "dirichlet_sum",
    "discrete_qv", "dyadic_subdivision", "evaluate", "follmer_sum", "generate", "horizontal_derivative",
    "jump_augmented_subdivision", "jump_compensation", "jumps", "qv_decompose", "step_approximation",
    "stopping_time_subdivision", "vertical_gradient", "vertical_hessian",
]
