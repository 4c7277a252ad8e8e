"""Exception types shared across the package."""


class JohnGaugeError(Exception):
    """Base class for all package errors."""


class DegenerateError(JohnGaugeError, ValueError):
    """A simplex or matrix is too close to singular to be trusted."""


class ConditioningError(JohnGaugeError):
    """Rejection sampling could not produce a well-conditioned instance."""


class InfeasibleError(JohnGaugeError):
    """The polytope has empty interior."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class UnboundedError(JohnGaugeError):
    """The polytope is unbounded, so no maximal ellipsoid exists."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CertificateError(JohnGaugeError):
    """Contact points or weights do not form a valid decomposition of the identity."""
