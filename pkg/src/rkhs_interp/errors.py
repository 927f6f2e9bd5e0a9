"""Exception hierarchy shared by every module of the package."""


class RKHSError(Exception):
    """Base class for all package errors."""


class ParameterError(RKHSError, ValueError):
    """A constructor or operation received parameters violating an invariant."""


class DomainError(RKHSError, ValueError):
    """An evaluation point lies outside the domain of a kernel."""


class CapabilityError(RKHSError):
    """A kernel cannot evaluate the requested partial derivative."""


class MembershipError(RKHSError, ValueError):
    """A function does not satisfy the constraints defining a space."""


class RankDeficiencyError(RKHSError):
    """The Gram system could not be solved even at the largest jitter.

    Parameters
    ----------
    message : str
        Human readable description.
    pivot : int or None
        Zero-based index of the first pivot that failed in the Cholesky
        factorization, when known.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class InfeasibleError(RankDeficiencyError):
    """The constraints cannot be met by any element of the space."""
