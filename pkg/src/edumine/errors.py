"""Exception types raised across the package.

Every error is a subclass of ``EdumineError`` so callers (the CLI in
particular) can map a whole family to one exit code.
"""


class EdumineError(Exception):
    """Base class for all package errors."""


class ContractError(EdumineError, ValueError):
    """A precondition of an operation was violated by the caller."""


class LogFormatError(EdumineError, ValueError):
    """An event log is too damaged to be trusted."""


class SchemaError(EdumineError, ValueError):
    """A CSV header names a column that is not part of the feature table."""


class CellParseError(EdumineError, ValueError):
    """A CSV cell could not be read as a number.

    ``row`` is the 1-based data row (the header is not counted) and
    ``column`` the attribute name.
    """

    def __init__(self, row, column, text):
        self.row = row
        self.column = column
        self.text = text
        super().__init__(f"cannot parse {text!r} at row {row}, column {column!r}")


class UndefinedCorrelationError(EdumineError, ArithmeticError):
    """Pearson correlation requested for a constant vector."""


class UndefinedMetricError(EdumineError, ArithmeticError):
    """A metric whose denominator is zero for the given inputs."""


class SingularDesignError(EdumineError, ArithmeticError):
    """Least squares design matrix does not have full column rank."""

    def __init__(self, dependent):
        self.dependent = list(dependent)
        super().__init__(
            "design matrix is rank deficient; linearly dependent columns: "
            + ", ".join(map(str, self.dependent))
        )


class DivergenceError(EdumineError, FloatingPointError):
    """Iterative training produced a non-finite loss."""


class SnapshotFormatError(EdumineError, ValueError):
    """A model snapshot file is corrupted or of an unknown version."""
