"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a function is defined."""


class DivergenceError(ArithmeticError):
    """A quantity is infinite at the requested argument (e.g. K(1))."""


class UnsupportedStratumError(ValueError):
    """The requested formula does not apply to the covector's stratum."""


class OriginExcludedError(DomainError):
    """The origin of the plane z = 0 has no stratum label."""


class NumericFailure(RuntimeError):
    """An iterative method did not meet its tolerance.

    ``best`` holds the best candidate found (or ``None``) and ``bracket``
    the search interval when one is meaningful.
    """

    def __init__(self, message, *, best=None, residual=None, bracket=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.bracket = bracket
