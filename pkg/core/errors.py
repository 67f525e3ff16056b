"""Exception hierarchy shared by the numeric core and the command-line front end."""
from typing import Optional


class CognitiveRadioError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CognitiveRadioError, ValueError):
    """Argument outside the domain of a function (e.g. Γ(a, x) with a <= 0)."""


class UnsupportedScenarioError(DomainError):
    """A closed form was asked for outside the scenario it was derived for."""


class ConfigError(CognitiveRadioError, ValueError):
    """Scenario or settings file could not be parsed or validated."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class NumericError(CognitiveRadioError, ArithmeticError):
    """Quadrature or another numeric procedure failed to reach its tolerance."""
