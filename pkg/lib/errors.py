"""
Exception and warning types shared by the dicke-sense library.
"""


class DickeSenseError(Exception):
    """Base class for every error raised by this package."""


class CapacityError(DickeSenseError):
    """A dense representation would exceed its configured size cap."""


class OddSpinCountError(DickeSenseError, ValueError):
    """A Dicke probe was requested for an odd number of spins."""


class DomainError(DickeSenseError, ValueError):
    """An argument lies outside the domain of a formula."""


class EmptyLatticeError(DickeSenseError):
    """The requested geometry and density hold less than one probe spin."""


class DimensionMismatchError(DickeSenseError, ValueError):
    """Two objects that must share a size do not."""


class StepCountError(DickeSenseError):
    """Fixed-step integration failed its Richardson self-check."""


class OptimizationError(DickeSenseError):
    """A minimization produced non-finite values or never converged."""


class RegimeViolationError(DickeSenseError):
    """Pulse or coupling parameters are outside the modeled regime."""


class ConfigError(DickeSenseError):
    """Configuration file or command-line value could not be used."""


class RegimeWarning(UserWarning):
    """Parameters are outside the regime where a model is accurate."""


class ValidityWindowWarning(UserWarning):
    """A density falls outside the empirical rho-T2* window."""


class LinearizationWarning(UserWarning):
    """Small-field linearization is being used outside |sum_omega| t << 1."""
