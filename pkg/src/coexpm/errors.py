"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: configuration/validation problems
exit 2, solver failures exit 3, and I/O errors (plain OSError) exit 4.
"""

__all__ = [
    "CoexpmError",
    "ValidationError",
    "RangeError",
    "ConfigError",
    "SolverError",
    "FitError",
]


class CoexpmError(Exception):
    """Base class for package errors."""


class ValidationError(CoexpmError, ValueError):
    """Invalid argument or inconsistent physical input."""


class RangeError(ValidationError):
    """Quantity outside a documented validity range (names the bound)."""


class ConfigError(ValidationError):
    """Malformed or unknown configuration content."""


class SolverError(CoexpmError, RuntimeError):
    """Root finding or optimization failed; message carries diagnostics."""


class FitError(CoexpmError, RuntimeError):
    """Degenerate data made a fit ill-posed."""
