"""Exception types shared across the package."""


class SkycastError(Exception):
    """Base class for all skycast errors."""


class InvalidInputError(SkycastError, ValueError):
    """Raised when an operation receives arguments violating its contract."""
