"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid parameters or an object violating its stated invariants."""


class ProfileError(ValidationError):
    """A variance profile breaks symmetry, row-sum or boundedness constraints."""


class DivergentMomentError(ValidationError):
    """Requested an absolute moment at or beyond the tail index."""


class InfeasibleMomentsError(ValidationError):
    """No probability measure on the requested support matches the target moments."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or reach its tolerance."""


class EigensolverError(NumericalError):
    pass


class QuadratureError(NumericalError):
    """Adaptive quadrature ran out of budget; carries the best estimate."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class FitError(NumericalError):
    """Moment fit did not converge; carries the best residual reached."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
