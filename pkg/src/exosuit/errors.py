"""Exception hierarchy shared by all modules."""


class ExosuitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ExosuitError, ValueError):
    """An input lies outside the mathematical domain of a formula."""


class FitError(ExosuitError):
    """A curve or coefficient fit could not be computed."""


class GeometryError(ExosuitError, ValueError):
    """Mounting geometry is degenerate or incompatible with the wrist circle."""


class RegimeError(GeometryError):
    """The wrapped-regime formula was asked for a straight configuration."""


class InfeasibleError(ExosuitError):
    """No admissible design satisfies the requested condition."""


class NoCrossingError(ExosuitError):
    """A torque curve never reaches zero over the scanned range."""


class InstabilityError(ExosuitError):
    """The plant simulation diverged."""
