"""Error hierarchy shared by the parsers, engines and the CLI."""

from typing import Optional


class TccpError(Exception):
    """
    Base class for every user-facing failure.

    Attributes:
        message (str): Human readable description.
        exit_code (int): Process exit status the CLI maps this error to.
    """

    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class TccpSyntaxError(TccpError):
    """Raised by the program and spec parsers, positioned at line/column."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class TccpValidationError(TccpError):
    """Parsed text is well-formed but violates a static rule (arity, sorts, closedness, counts)."""


class UnknownProcessError(TccpError):
    def __init__(self, proc: str, arity: int):
        self.proc = proc
        self.arity = arity
        super().__init__(f"unknown process {proc}/{arity}")


class InconsistentStoreError(TccpError):
    """The store became ff, so no further transition is defined."""


class MissingSpecError(TccpError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"no specification entry for {key}")


class UnsupportedDomainError(TccpError):
    pass
