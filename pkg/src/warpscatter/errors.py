"""Exception types raised across the package."""


class WarpScatterError(Exception):
    """Base class for all package errors."""


class ProfileError(WarpScatterError, ValueError):
    """A profile could not be built (non-positive blend, bad grid, ...)."""


class RangeError(WarpScatterError, ValueError):
    """Evaluation requested outside the sampled range of a profile."""


class DomainError(WarpScatterError, ValueError):
    """A matrix argument is not symmetric positive definite."""


class BoundNotApplicable(WarpScatterError):
    """The local boundedness hypothesis behind an injectivity bound fails."""


class ChannelClosedError(WarpScatterError):
    """A channel is not short range on both sides; no S-matrix is computed."""


class TruncationError(WarpScatterError):
    """The potential has not decayed at the truncation radius."""


class SpectrumLeakError(WarpScatterError):
    """A test-state spectrum extends outside the available k grid."""


class AliasingError(WarpScatterError):
    """A wave packet is not resolvable on the requested grid."""


class InstabilityError(WarpScatterError):
    """Norm drift of a time evolution exceeded the abort threshold."""


class ConfigError(WarpScatterError, ValueError):
    """Invalid run configuration."""
