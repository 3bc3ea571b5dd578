"""Exception types shared across the package.

Everything subclasses ValueError so callers that only care about
"bad input / bad state" can catch one thing.
"""


class NlspectralError(ValueError):
    pass


class ExplosionError(NlspectralError):
    """A recursion produced a non-finite or absurdly large value."""

    def __init__(self, step, value=None):
        self.step = int(step)
        self.value = value
        msg = f"recursion exploded at step {self.step}"
        if value is not None:
            msg += f" (value {value!r})"
        super().__init__(msg)


class StabilityError(NlspectralError):
    """AR polynomial is not stable."""

    def __init__(self, spectral_radius):
        self.spectral_radius = float(spectral_radius)
        super().__init__(
            f"unstable AR polynomial: companion spectral radius "
            f"{self.spectral_radius:.6g} >= 1"
        )


class UnsupportedFamilyError(NlspectralError):
    """The requested closed-form quantity does not exist for this family."""


class BandwidthError(NlspectralError):
    """Truncation lag outside the valid range."""


class LagRangeError(NlspectralError):
    """Requested autocovariance lag is out of range."""


class WindowConditionError(NlspectralError):
    """Window lacks a property the operation requires (quadratic constant,
    nonnegative spectral window)."""


class DegeneratePilotError(NlspectralError):
    """Pilot spectrum too close to zero to whiten periodogram ordinates."""


class ConfigError(NlspectralError):
    """Invalid experiment or CLI configuration."""
