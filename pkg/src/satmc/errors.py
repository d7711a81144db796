"""Exception hierarchy shared by the parser, builder, and solvers."""

from __future__ import annotations


class SatmcError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SatmcError):
    """Syntax error with a source location (1-based line and column)."""

    def __init__(self, message: str, line: int, column: int) -> None:
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class ModelError(SatmcError):
    """Semantic error in a model or property (undefined names, bad ranges, ...)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class StateSpaceError(ModelError):
    """Raised while exploring the state space (cap exceeded, update out of range)."""


class NotIrreducibleError(ModelError):
    def __init__(self, message: str = "steady-state requires an irreducible chain") -> None:
        super().__init__(message)


class NumericalError(SatmcError):
    """Iteration caps exceeded or an iterative solver failed to converge."""
