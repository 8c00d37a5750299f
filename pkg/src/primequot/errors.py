"""Exception types shared across the package."""


class PrimequotError(Exception):
    """Base class for all package errors."""


class DomainError(PrimequotError):
    """An argument is outside the mathematical domain of an operation."""


class RangeExhaustedError(PrimequotError):
    """A query went past the end of a finite table (e.g. the sieve limit)."""

    def __init__(self, message, limit=None):
        super().__init__(message)
        self.limit = limit


class SearchExhaustedError(PrimequotError):
    """A bounded search for a pseudo-inverse witness ran out of room.

    Carries the limit that was exhausted so the caller can retry with a
    larger table or search bound.
    """

    def __init__(self, message, limit=None, at=None):
        super().__init__(message)
        self.limit = limit
        self.at = at


class EvaluationError(PrimequotError):
    """A term or formula could not be evaluated (bad F-argument, etc.)."""

    def __init__(self, message, path=()):
        super().__init__(message)
        self.path = tuple(path)


class UnboundedHintError(EvaluationError):
    """An existential quantifier without a usable witness hint was reached."""


class ParseError(PrimequotError):
    """Syntax error in the formula text format."""

    def __init__(self, message, line, column, expected=()):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
