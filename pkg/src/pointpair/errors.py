"""Semantic exception hierarchy.

Validation errors (bad arguments, non-member points, unsupported
domain/metric combinations) derive from :class:`ValidationError` so callers
can distinguish them from genuine numerical failures.
"""


class PointPairError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PointPairError, ValueError):
    """An argument violates a documented precondition."""


class DimensionError(ValidationError):
    """Point dimension does not match the ambient dimension of the domain."""


class MembershipError(ValidationError):
    """Point lies outside the open domain (boundary points are excluded)."""


class ParameterError(ValidationError):
    """Scalar parameter out of range (alpha <= 0, level outside (0,1), ...)."""


class UnsupportedDomainError(ValidationError):
    """Operation has no closed form / no meaning on this domain variant."""


class DegenerateTripleError(ValidationError):
    """Triple with coincident points where the triangle ratio is undefined."""


class NumericalError(PointPairError, RuntimeError):
    """Internal numerical failure (failed bracketing, non-finite values)."""
