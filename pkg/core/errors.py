EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class SigclassError(Exception):
    """Base error carrying the process exit code it maps to."""

    exit_code = EXIT_DATA

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class UsageError(SigclassError):
    exit_code = EXIT_USAGE


class DataError(SigclassError):
    exit_code = EXIT_DATA


class ShapeError(DataError, ValueError):
    pass


class InvalidArgumentError(DataError, ValueError):
    pass


class InvalidParameterError(DataError, ValueError):
    pass


class NumericError(SigclassError, ArithmeticError):
    exit_code = EXIT_NUMERIC
