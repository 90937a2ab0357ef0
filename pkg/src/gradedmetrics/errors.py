"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(ValueError):
    """Mismatched depths, lengths or model kinds."""


class DegenerateBallError(DomainError):
    """The requested ball radius is not below the metric's essential sup."""


class EmptyEstimateError(RuntimeError):
    """No probe fell inside the ball; nothing to estimate."""


class ContractionError(RuntimeError):
    """A contraction-factor precondition failed (estimate >= 1)."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before reaching the requested tolerance."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class CertificateViolation(RuntimeError):
    """Measured behaviour contradicts a supplied certificate."""

    def __init__(self, message, witness=None, trace=None):
        super().__init__(message)
        self.witness = witness
        self.trace = trace


class SingularVelocityError(DomainError):
    """A curve's velocity vanishes where a unit-speed parametrization needs it."""


class EvaluationError(RuntimeError):
    """A map produced non-finite values during numerical differentiation."""
