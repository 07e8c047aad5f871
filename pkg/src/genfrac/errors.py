"""Exception hierarchy shared by all genfrac modules."""


class GenfracError(Exception):
    """Base class for all package-specific errors."""


class DomainError(GenfracError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(GenfracError, ValueError):
    """A configuration document failed schema or semantic validation."""


class AccuracyError(GenfracError, ArithmeticError):
    """A numerical routine could not meet its accuracy target."""


class ConsistencyError(AccuracyError):
    """A computed value violates a structural constraint it must satisfy."""


class QuadratureError(AccuracyError):
    """An adaptive quadrature or mesh refinement failed to converge."""


class DiscrepancyError(AccuracyError):
    """No admissible regularization level satisfies the discrepancy criterion."""
