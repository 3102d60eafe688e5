"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DivexpError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DivexpError, ValueError):
    """An argument violates a structural contract (shape, range, coverage)."""


class SchemaError(ValidationError):
    """A JSON document does not match the model schema.

    Carries the JSON path of the offending field so command-line users get a
    pointer into their input file.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NumericDomainError(DivexpError, ValueError):
    """A numeric argument is outside the mathematical domain of an operation."""


class EstimationError(DivexpError):
    """A Monte Carlo run produced values that cannot be averaged (e.g. infinities)."""
