"""Exception types shared across the package."""

__all__ = [
    "NoRootError",
    "ConvergenceError",
    "InternalCheckError",
    "ConfigError",
    "EnsembleFormatError",
]


class NoRootError(RuntimeError):
    """A root finder found no sign change inside its search range."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    This signals an implementation bug, not a user error: the solvers in
    this package are applied to problems for which they provably converge.
    """


class InternalCheckError(RuntimeError):
    """A mathematically guaranteed invariant failed at runtime."""


class ConfigError(ValueError):
    """Invalid command-line or configuration-file input."""


class EnsembleFormatError(ConfigError):
    """Malformed ensemble CSV file; messages carry the offending line number."""
