"""Exception hierarchy shared by all modules."""


class LocalBoundsError(Exception):
    """Base class for every error raised by the package."""


class DomainError(LocalBoundsError, ValueError):
    """Argument outside the mathematical domain of a scalar function."""


class PreconditionError(LocalBoundsError, ValueError):
    """A documented precondition of an operation does not hold."""


class InvalidStateError(PreconditionError):
    """Matrix or array does not describe a (sub)normalized state."""


class SupportError(PreconditionError):
    """supp(p) is not contained in supp(q): the divergence is infinite near p."""


class RangeError(PreconditionError):
    """Energy outside the open interval where the Gibbs equation has a root."""
