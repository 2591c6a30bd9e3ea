"""Exception hierarchy shared by all geolevy modules."""


class GeolevyError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GeolevyError, ValueError):
    """An argument lies outside the admissible domain of an operation."""


class ConfigError(GeolevyError, ValueError):
    """A configuration or schedule violates the hypotheses of a check."""


class ClassificationError(GeolevyError):
    """A growth rule could not be mapped to a regime."""


class UnsupportedMethodError(GeolevyError):
    """The requested computation method is not available for this model."""


class BudgetExceededError(GeolevyError):
    """A simulation would exceed the configured sample budget or atom cap."""


class NumericalError(GeolevyError, ArithmeticError):
    """A numerical routine failed (factorization, non-convergence)."""
