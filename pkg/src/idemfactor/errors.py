"""Exception hierarchy shared by every module."""


class IdemFactorError(Exception):
    """Base class for all library errors."""


class FieldMismatch(IdemFactorError, TypeError):
    """Scalars or matrices from different fields were combined."""


class FieldUnsupported(IdemFactorError):
    """The operation is not defined over the requested field."""


class DimensionMismatch(IdemFactorError, ValueError):
    pass


class NonSquare(DimensionMismatch):
    pass


class SingularMatrix(IdemFactorError, ValueError):
    pass


class NoSolution(IdemFactorError):
    """``A X = B`` has no solution (some column of B is outside R(A))."""


class DependentColumns(IdemFactorError, ValueError):
    pass


class BadDimension(IdemFactorError, ValueError):
    pass


class NotApplicable(IdemFactorError):
    """A construction's preconditions do not hold for the given operator.

    ``reasons`` lists the failed preconditions in the order they were checked.
    """

    def __init__(self, message: str = "", reasons=None):
        super().__init__(message)
        self.reasons = list(reasons or ([message] if message else []))


class NoRecipeApplies(NotApplicable):
    """No factorization recipe in the dispatcher accepted the operator."""

    def __init__(self, message: str = "", reasons=None, report=None):
        super().__init__(message, reasons)
        self.report = report


class RangeNotContained(NotApplicable):
    pass


class WrongClass(IdemFactorError, ValueError):
    pass


class FactorNotIdempotent(IdemFactorError, ValueError):
    pass


class ProductMismatch(IdemFactorError, ValueError):
    pass


class BadParameter(IdemFactorError, ValueError):
    pass


class BadJ(BadParameter):
    pass


class SingularParameter(BadParameter):
    pass


class TooLarge(IdemFactorError, ValueError):
    pass


class InternalNormalizationFailure(IdemFactorError, RuntimeError):
    """A computed Douglas solution failed its own kernel-equality check."""
