"""Exception and warning types shared across the package."""


class OmcoolError(Exception):
    """Base class for all omcool errors."""


class ConfigError(OmcoolError):
    """Invalid or malformed run configuration."""


class PhysicsError(OmcoolError):
    """Parameters describe a degenerate or unsupported physical regime."""


class StabilityError(PhysicsError):
    """The linearized model is unstable at the requested detuning."""

    def __init__(self, message, delta=None):
        super().__init__(message)
        self.delta = delta


class IntegrationError(OmcoolError):
    """Numerical propagation failed or violated a state invariant."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class TruncationError(OmcoolError):
    """Fock-space cutoff too small for the requested state or dynamics."""

    def __init__(self, message, time=None, mode=None, leakage=None):
        super().__init__(message)
        self.time = time
        self.mode = mode
        self.leakage = leakage


class AdiabaticityWarning(UserWarning):
    """A detuning ramp is too fast to stay adiabatic."""


class ThermalizationWarning(UserWarning):
    """A hold stroke is too short for the cavity bath to rethermalize the fluid."""
