"""
regimerisk.exceptions
~~~~~~~~~~~~~~~~~~~~~
Exception hierarchy shared by every regimerisk module. The CLI maps the three top-level
families to process exit codes.

Classes:
    - RegimeRiskError: Base class for all regimerisk errors.
    - ConfigError: Invalid or inconsistent run configuration (exit code 1).
    - DataError: Unusable input data (exit code 2).
    - NumericError: Numerical failure during filtering, fitting or root solving (exit code 3).
    - InvalidParameterError: Parameters outside their admissible region.
"""
from typing import Optional


class RegimeRiskError(Exception):
    """ Base class for all regimerisk errors. """

    exit_code = 3


class ConfigError(RegimeRiskError):
    exit_code = 1


class DataError(RegimeRiskError, ValueError):
    exit_code = 2

    def __init__(self, message: str, row: Optional[int] = None):
        """
        Initialize the data error.

        Args:
            message (str): Description of the problem.
            row (int, optional): 1-based row number in the source file, header excluded.
        """
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MalformedDateError(DataError):
    pass


class NonPositivePriceError(DataError):
    pass


class DuplicateCellError(DataError):
    pass


class EmptyTableError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class DegenerateSeriesError(DataError):
    pass


class NumericError(RegimeRiskError, RuntimeError):
    exit_code = 3


class NonFiniteLikelihoodError(NumericError):
    pass


class NotPositiveDefiniteError(NumericError):
    pass


class RootNotBracketedError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class InvalidParameterError(RegimeRiskError, ValueError):
    exit_code = 1
