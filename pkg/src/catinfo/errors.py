"""Exception hierarchy shared across the package."""


class CatInfoError(Exception):
    """Base class for all package errors."""


class SchemaError(CatInfoError, ValueError):
    """Unknown variable or level, malformed schema or input file."""


class DomainError(CatInfoError, ValueError):
    """Argument outside the domain of an operation."""


class DegenerateTableError(DomainError):
    """Table has zero total mass where a positive total is required."""


class FormulaError(SchemaError):
    """Model formula text could not be parsed.

    Attributes
    ----------
    position : int or None
        Character offset in the formula text where parsing failed.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class RankDeficiencyError(CatInfoError, ValueError):
    """Design matrix of a logit model is not of full column rank."""

    def __init__(self, message, collinear=()):
        super().__init__(message)
        self.collinear = tuple(collinear)
