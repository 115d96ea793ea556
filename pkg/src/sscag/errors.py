"""Exception hierarchy shared by all sscag modules.

The CLI maps these onto process exit codes: parameter/usage problems
exit 2, data and file-format problems exit 3, numerical failures exit 4.
"""


class SscagError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParameterError(SscagError, ValueError):
    """An argument violates an operation's contract (bad k, m, window, ...)."""

    exit_code = 2


class DataError(SscagError, ValueError):
    """Input data is invalid: non-finite values, shape mismatches, infeasible scenes."""

    exit_code = 3


class FormatError(DataError):
    """A file does not conform to its on-disk format."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericalError(SscagError, ArithmeticError):
    """A numerically degenerate situation the algorithm cannot recover from."""

    exit_code = 4


class RankDeficiencyError(NumericalError):
    """The anchor graph has too little rank to support the requested embedding."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"rank deficiency at embedding component {index}")
