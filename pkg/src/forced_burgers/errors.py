"""Exception and warning types shared across the package."""


class ForcedBurgersError(Exception):
    """Base class for all package errors."""


class NoConvergence(ForcedBurgersError):
    """An iterative procedure did not reach its tolerance."""


class BlowUp(ForcedBurgersError):
    """Momentum left the configured bound during flow integration."""


class WindowExceeded(ForcedBurgersError, ValueError):
    """A displacement lies outside the admissible velocity window."""


class SizeMismatch(ForcedBurgersError, ValueError):
    """Two grid functions live on different grids."""


class CflViolation(ForcedBurgersError, ValueError):
    """A finite-volume step was requested with too large a time step."""


class ConfigError(ForcedBurgersError, ValueError):
    """Invalid configuration value; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class NoPeriodDetected(ForcedBurgersError):
    """No period T within the cap matched the tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class WindowSaturated(UserWarning):
    """A minimizer sits on the edge of the velocity window."""
