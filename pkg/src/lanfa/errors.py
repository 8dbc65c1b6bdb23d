"""Exception types raised across the package."""


class LanfaError(Exception):
    """Base class for all package errors."""


class ValidationError(LanfaError, ValueError):
    """Malformed input: wrong shapes, asymmetric matrices, bad parameters."""


class DomainError(LanfaError, ValueError):
    """A function or norm was requested outside its domain."""


class SingularShiftError(LanfaError, ArithmeticError):
    """A shift coincides (to tolerance) with an eigenvalue of T_k or A."""

    def __init__(self, message, ritz_value=None):
        super().__init__(message)
        self.ritz_value = ritz_value


class SingularIntegrandError(LanfaError, ArithmeticError):
    """A contour integrand produced a non-finite value at a node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class EnclosureError(LanfaError, ValueError):
    """A contour does not enclose the sets it is required to enclose."""


class MatrixMarketError(ValidationError):
    """Unsupported or inconsistent Matrix Market file."""
