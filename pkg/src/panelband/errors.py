"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PanelbandError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(PanelbandError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateScaleError(PanelbandError, ArithmeticError):
    """Every entry of a normalizing scale is below the numerical floor."""


class DataError(PanelbandError):
    """Input data could not be turned into a panel."""


class ParseError(DataError):
    """A row of an input file could not be parsed."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class SparseDataError(DataError):
    """Too few observations near a grid point for a local fit."""


class StructureError(DataError):
    """The (unit, period) index set is not rectangular."""

    def __init__(self, message: str, missing: list | None = None):
        self.missing = list(missing or [])
        super().__init__(message)
