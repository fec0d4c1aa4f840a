"""Exception types raised by the solver and its supporting modules."""

__all__ = [
    "ObeForceError",
    "IncommensurableFrequencies",
    "SingularHarmonicMatrix",
    "TruncationNotConverged",
    "DegenerateRegime",
    "UnsupportedTransition",
    "PeriodMismatch",
    "SingularContinuedFraction",
    "DepthNotConverged",
]


class ObeForceError(Exception):
    """Base class for domain errors (invalid input stays a ValueError)."""


class IncommensurableFrequencies(ObeForceError):
    """Field offsets admit no common frequency within tolerance."""


class SingularHarmonicMatrix(ObeForceError):
    """A harmonic block to be inverted is numerically singular."""


class TruncationNotConverged(ObeForceError):
    """Harmonic truncation hit its cap before the boundary decayed."""


class DegenerateRegime(ObeForceError):
    """The periodic regime is not unique (dark states survive)."""


class UnsupportedTransition(ObeForceError):
    """The requested closed form does not apply to this transition."""


class PeriodMismatch(ObeForceError):
    """Trajectory handed to Fourier extraction is not yet periodic."""


class SingularContinuedFraction(ObeForceError):
    """A continued-fraction denominator could not be inverted."""


class DepthNotConverged(ObeForceError):
    """Continued-fraction depth cap reached without convergence."""
