"""Exception hierarchy shared by every module of the package."""


class RKDistError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ValidationError(RKDistError, ValueError):
    """Input data violates a documented invariant."""

    exit_code = 2

    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} (index {index})")
        self.index = index


class ParseError(ValidationError):
    pass


class DimError(ValidationError):
    pass


class CardinalityMismatch(ValidationError):
    pass


# name used by the two-point helpers
CardinalityError = CardinalityMismatch


class RangeError(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class InvalidMatrix(RKDistError, ValueError):
    pass


class SingularPencil(RKDistError, ArithmeticError):
    pass


class NoConvergence(RKDistError, ArithmeticError):
    pass


class ScaleError(RKDistError, ValueError):
    pass


class DegenerateSample(RKDistError, RuntimeError):
    pass
