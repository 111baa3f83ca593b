"""Exception hierarchy shared by every module."""


class PathCalcError(Exception):
    """Base class for all errors raised by pathcalc."""


class DomainError(PathCalcError, ValueError):
    """An argument lies outside the domain of the operation."""


class PrecisionError(DomainError):
    """A time is not on the path's grid; snap it first."""


class ConfigError(PathCalcError, ValueError):
    """Invalid configuration: unknown builtin, bad parameters, mode/scheme mismatch."""


class EvaluationError(PathCalcError, ArithmeticError):
    """A functional cannot be evaluated at the given pair."""


class ConsistencyError(PathCalcError, RuntimeError):
    """An internal identity failed (registry/subdivision mismatch, polarization...)."""
