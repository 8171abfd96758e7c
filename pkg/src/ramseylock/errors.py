"""Exception types raised across the package."""


class RamseyLockError(Exception):
    """Base class for all package-specific errors."""


class InvalidFieldError(RamseyLockError, ValueError):
    """A driving field was constructed with unphysical parameters."""


class InvalidDurationError(RamseyLockError, ValueError):
    """A negative (or otherwise unusable) duration was supplied."""


class DegradedStateError(RamseyLockError):
    """A spin state's norm has drifted too far from unity to trust."""


class SequenceError(RamseyLockError, ValueError):
    """A pulse timeline is structurally invalid (no pulses, bad scan marks, ...)."""


class PlannerError(RamseyLockError, ValueError):
    """Base class for timing-planner failures."""


class NoFringeError(PlannerError):
    """Readout timing is undefined because the interferometer does not precess."""


class NoPrecessionError(PlannerError):
    """Retrieval timing is undefined for a resonant (zero-detuning) field."""


class InfeasiblePlanError(PlannerError):
    """No integer timing solution exists within the search bound."""


class PlanMismatchError(RamseyLockError, ValueError):
    """A timing plan is inconsistent with the key it is applied to."""


class FitError(RamseyLockError, ValueError):
    """Curve fitting could not be performed on the given data."""


class ConfigError(RamseyLockError, ValueError):
    """An experiment description file could not be parsed.

    Carries the 1-based line number when the problem is tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
