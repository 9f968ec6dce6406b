"""Exception hierarchy.

Every error raised by the package derives from :class:`AuctionError`, which
itself is a :class:`ValueError` so callers that validate user input with a
plain ``except ValueError`` keep working.
"""


class AuctionError(ValueError):
    """Base class for all package errors."""


class InstanceError(AuctionError):
    """An instance description violates an invariant."""


class NonIncreasingSupport(InstanceError):
    pass


class NonPositiveMass(InstanceError):
    pass


class MassNotOne(InstanceError):
    pass


class JointMarginalMismatch(InstanceError):
    pass


class JointArityError(InstanceError):
    pass


class ArityError(AuctionError):
    """The operation does not support this number of bidders."""


class ShapeMismatch(AuctionError):
    pass


class NotMonotone(AuctionError):
    """Allocation matrix violates the monotonicity constraint."""


class NegativeEps(AuctionError):
    pass


class NonPositiveEps(AuctionError):
    pass


class NegativeLambda(AuctionError):
    pass


class CorrelatedUnsupported(AuctionError):
    """Operation requires independent (product) valuations."""


class TargetOutOfRange(AuctionError):
    pass


class NonPositiveBound(AuctionError):
    pass


class NonPositiveDelta(AuctionError):
    pass


class LimitExceeded(AuctionError):
    """Enumeration would exceed the configured size limit."""


class NotDescending(AuctionError):
    pass


class TooSmall(AuctionError):
    pass


class TooLarge(AuctionError):
    pass


class NotBinary(AuctionError):
    pass


class NotAMatching(AuctionError):
    pass
