"""Exception types shared across the package.

The CLI maps these onto its frozen exit-code contract:
config errors -> 2, numerical failures -> 3, regime violations -> 4.
"""

__all__ = ["ConfigError", "NumericalFailure", "RegimeViolation", "ProtocolError"]


class ConfigError(ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class NumericalFailure(RuntimeError):
    """NaN/overflow or other numerical breakdown during evolution."""


class RegimeViolation(RuntimeError):
    """Parameters outside the regime a computation is meaningful in."""


class ProtocolError(RuntimeError):
    """A protocol-level consistency check failed (signals a bug upstream)."""
