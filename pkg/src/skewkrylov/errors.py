"""Exception types raised across the package."""


class SkewKrylovError(Exception):
    """Base class for all package errors."""


class UsageError(SkewKrylovError, ValueError):
    """Bad arguments: dimension mismatch, violated precondition, unknown name."""


class SkewValidationError(SkewKrylovError, ValueError):
    """A matrix fails the skew-symmetry (or squareness) requirement."""


class MatrixMarketError(SkewKrylovError):
    """Malformed Matrix Market input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlreadyConverged(SkewKrylovError):
    """The starting residual is exactly zero; the initial guess solves the system."""


class LuckyBreakdown(SkewKrylovError):
    """The Lanczos recurrence produced a vanishing next vector (invariant Krylov space)."""


class SingularBreakdown(SkewKrylovError):
    """A diagonal entry of the rotated Ritz matrix vanished."""


class OracleInapplicable(SkewKrylovError):
    """A closed-form oracle would divide by zero for the given inputs."""
