"""
Error types for the fan power baseline system
Input/config problems exit with code 1, numerical failures with code 2
"""

from typing import Any, Optional


class BaselineError(Exception):
    """Base class for every error raised by the baseline services"""

    exit_code = 1

    @property
    def code(self) -> str:
        return type(self).__name__


class BaselineInputError(BaselineError, ValueError):
    """Bad input data, configuration or call contract"""

    exit_code = 1


class BaselineNumericalError(BaselineError, ArithmeticError):
    """Numerical failure during fitting or metric evaluation"""

    exit_code = 2


# Tensor core

class LengthMismatchError(BaselineInputError):
    pass


class NonFiniteValueError(BaselineInputError):
    def __init__(self, index: int, message: Optional[str] = None):
        self.index = index
        super().__init__(message or f"Non-finite value at flat index {index}")


class IndexOutOfBoundsError(BaselineInputError, IndexError):
    pass


class InvalidModeError(BaselineInputError):
    pass


class ColumnMismatchError(BaselineInputError):
    pass


class DimensionMismatchError(BaselineInputError):
    pass


# Fitting

class RankTooLargeError(BaselineInputError):
    pass


class MaskDegenerateError(BaselineInputError):
    pass


class NonFiniteObjectiveError(BaselineNumericalError):
    pass


# Pipeline

class ParseError(BaselineInputError):
    def __init__(self, row: int, reason: str):
        self.row = row
        self.reason = reason
        super().__init__(f"row {row}: {reason}")


class EmptyDatasetError(BaselineInputError):
    pass


class IncompatibleResolutionError(BaselineInputError):
    pass


class MissingSeriesError(BaselineInputError):
    def __init__(self, fan_id: str, day: Any):
        self.fan_id = fan_id
        self.day = day
        super().__init__(f"No series for fan '{fan_id}' on day {day}")


class WindowOutOfRangeError(BaselineInputError):
    pass


# Benchmarks and evaluation

class InsufficientContextError(BaselineInputError):
    pass


class InsufficientHistoryError(BaselineInputError):
    pass


class ZeroMeanActualError(BaselineNumericalError):
    pass


class TooFewSlotsError(BaselineInputError):
    pass


class TooFewValuesError(BaselineInputError):
    pass


class InvalidConfigError(BaselineInputError):
    pass
