from __future__ import annotations


class RuleBlocksError(Exception):
    """Base class for all errors raised by this package."""


class LoadError(RuleBlocksError):
    """An input document could not be loaded."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class PathSyntaxError(RuleBlocksError):
    """A path expression falls outside the supported subset."""

    def __init__(self, message: str, expression: str, token: str | None = None):
        self.expression = expression
        self.token = token
        super().__init__(f"{message} in {expression!r}")


class RuleSetError(RuleBlocksError):
    """A rule-set file is invalid. ``location`` names the offending element."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class SetupError(RuleBlocksError):
    """Registry misconfiguration, e.g. a duplicate name."""
