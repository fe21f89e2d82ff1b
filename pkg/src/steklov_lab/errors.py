"""Exception types shared across the package."""


class SteklovLabError(Exception):
    """Base class for all package errors."""


class DomainError(SteklovLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigurationError(SteklovLabError, ValueError):
    """Inconsistent scenario, mesh or certificate inputs."""


class ResourceError(SteklovLabError, RuntimeError):
    """A configured budget (modes, oracle degree) would be exceeded."""


class NumericError(SteklovLabError, ArithmeticError):
    """Non-finite coefficients, SPD violations or failed factorizations."""
