"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class StepIndexError(Exception):
    """Base class for all errors raised by this package."""


class LocatedError(StepIndexError):
    """An error that can point at a line/column of the program source."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(self.__str__())

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(LocatedError):
    """Malformed s-expression text."""


class ValidationError(LocatedError):
    """Well-formed text that is not a valid program (scope, arity, names)."""


class TransformError(StepIndexError):
    """A definition whose shape the indexed construction cannot handle."""


class RecursiveCallInTest(TransformError):
    def __init__(self, fname: str, path: str):
        self.fname = fname
        self.path = path
        super().__init__(f"{fname}: recursive call inside a test at {path}")


class NoBaseCase(TransformError):
    def __init__(self, fname: str):
        self.fname = fname
        super().__init__(f"{fname}: every branch makes a recursive call (empty domain)")


class EvaluationError(StepIndexError):
    """Runtime failure while evaluating an expression."""


class DynamicTypeError(EvaluationError):
    def __init__(self, message: str, path: str = ""):
        self.detail = message
        self.path = path
        super().__init__(f"{message} at {path}" if path else message)


class RecursionSafetyCap(EvaluationError):
    def __init__(self, cap: int, fname: str = ""):
        self.cap = cap
        self.fname = fname
        where = f" in {fname}" if fname else ""
        super().__init__(f"recursion depth exceeded safety cap {cap}{where}")


class NonExecutableError(EvaluationError):
    def __init__(self, fname: str):
        self.fname = fname
        super().__init__(f"{fname} was declared :non-executable")


class GuardViolation(EvaluationError):
    """Unindexed execution was requested on arguments outside the domain."""

    def __init__(self, fname: str, args: tuple):
        self.fname = fname
        self.args = args
        super().__init__(f"{fname}: arguments {args} are not in the domain")
