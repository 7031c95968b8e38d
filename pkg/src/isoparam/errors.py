"""Exception hierarchy shared across the package."""


class IsoparamError(Exception):
    """Base class for all package errors."""


class DomainError(IsoparamError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class FocalPointError(DomainError):
    """The point lies on (or numerically at) a focal variety, where the gradient vanishes."""


class DegenerateOrbitError(DomainError):
    """The S^3-orbit through a point is numerically lower-dimensional.

    Attributes
    ----------
    condition : float
        Condition number of the Gram matrix that triggered the error.
    """

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class InsufficientSamplesError(IsoparamError, ValueError):
    """A dependence test bin holds fewer samples than required."""


class InconsistentFocalData(IsoparamError, ValueError):
    """Focal dimensions that cannot arise from a ball-bundle decomposition of a sphere."""


class UnclassifiedError(IsoparamError, LookupError):
    """A cohomology table that matches none of the known cases."""


class SpectrumMismatchError(IsoparamError, ArithmeticError):
    """Closed-form and numerically solved principal curvatures disagree."""
