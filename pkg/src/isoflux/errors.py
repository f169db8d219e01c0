"""Exception types raised across the package."""


class IsofluxError(Exception):
    """Base class for all package errors."""


class AmbiguousProjection(IsofluxError):
    """The nearest boundary point is not unique; pass a direction hint."""


class OutsideDomain(IsofluxError):
    """A point lies outside the region where a field is defined."""


class BoxTooSmall(IsofluxError):
    pass


class SolverDiverged(IsofluxError):
    pass


class ZeroLength(IsofluxError, ValueError):
    """A curve or one of its segments has zero length."""


class OpenCurve(IsofluxError):
    """A meridian curve has an endpoint in the interior of the section."""


class InvalidAngles(IsofluxError):
    pass


class DegenerateCurve(IsofluxError):
    pass


class FieldEvaluationError(IsofluxError):
    """Evaluating a field along a curve failed; ``segment`` is the offending index."""

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class MaximalityViolated(IsofluxError):
    """A sampled curve beat the claimed maximizer."""

    def __init__(self, message, curve=None, alpha=None):
        super().__init__(message)
        self.curve = curve
        self.alpha = alpha


class InvalidEpsilon(IsofluxError):
    pass
