"""Exception and warning types raised across the package."""


class FloquetLindbladError(Exception):
    """Base class for all package errors."""


class InvalidInputError(FloquetLindbladError, ValueError):
    pass


class DimensionMismatchError(InvalidInputError):
    pass


class NumericRangeError(FloquetLindbladError, ArithmeticError):
    pass


class DecompositionError(FloquetLindbladError, ArithmeticError):
    pass


class BranchCutError(DecompositionError):
    """An eigenvalue sits on the closed negative real axis of the principal logarithm."""


class InvalidBathError(InvalidInputError):
    pass


class InvertibilityError(DecompositionError):
    pass


class ConfigError(InvalidInputError):
    """Configuration could not be validated; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class AliasingWarning(UserWarning):
    pass


class DegeneracyWarning(UserWarning):
    pass


class IllConditionedWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass
