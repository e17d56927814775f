"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid argument, dimension mismatch, or malformed configuration."""


class UnsupportedDimensionError(InputError):
    """State dimension outside the supported range (1 <= m <= 4)."""


class BlowUpError(RuntimeError):
    """Integration produced a non-finite value; carries the time of failure."""

    def __init__(self, t: float, message: str | None = None):
        self.t = t
        super().__init__(message or f"integration blew up at t={t!r}")


class FitError(RuntimeError):
    """Decay-rate fit could not be performed (too few usable samples)."""
