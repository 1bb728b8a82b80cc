"""Exception hierarchy shared by the frontend, rewriter and solver."""

from __future__ import annotations


class FpcpError(Exception):
    """Base class for every error raised by this package."""


class FpError(FpcpError):
    pass


class NaNHasNoOrdinal(FpError):
    pass


class AtBoundary(FpError):
    pass


class InputError(FpcpError):
    """An error in an input script, optionally tagged with a source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class IllegalCharacter(InputError):
    pass


class UnterminatedString(InputError):
    pass


class UnbalancedParens(InputError):
    pass


class UnsupportedCommand(InputError):
    pass


class UnsupportedLogic(InputError):
    pass


class UnsupportedOperator(InputError):
    pass


class UnsupportedLiteral(InputError):
    pass


class SortError(InputError):
    pass


class ArityError(InputError):
    pass


class UnboundSymbol(InputError):
    pass


class WidthMismatch(InputError):
    pass


class CyclicDefinition(InputError):
    pass


class ValidationError(FpcpError):
    """A candidate model failed exact re-evaluation of the original assertions."""
