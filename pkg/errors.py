"""Error hierarchy shared by the engine and the command line.

Each error carries the process exit code the CLI reports for it.
"""
from __future__ import annotations

from typing import Optional


class HolonomyError(Exception):
    exit_code: int = 1

    def __init__(self, message: str, *, detail: Optional[str] = None) -> None:
        super().__init__(message)
        self.message = message
        self.detail = detail

    def __str__(self) -> str:
        if self.detail:
            return f"{self.message} ({self.detail})"
        return self.message


class InstanceParseError(HolonomyError):
    """An instance file could not be read into a representation."""

    exit_code = 2

    def __init__(self, message: str, *, field_path: Optional[str] = None, line: Optional[int] = None) -> None:
        location = []
        if field_path:
            location.append(f"field {field_path}")
        if line is not None:
            location.append(f"line {line}")
        super().__init__(message, detail=", ".join(location) or None)
        self.field_path = field_path
        self.line = line


class InvariantViolation(HolonomyError, ValueError):
    """A value or precondition breaks a mathematical invariant."""

    exit_code = 3


class DimensionMismatch(InvariantViolation):
    pass


class NotSquareError(InvariantViolation):
    pass


class NotNilpotentError(InvariantViolation):
    pass


class SingularMatrixError(InvariantViolation):
    pass


class DegenerateFormError(InvariantViolation):
    pass


class PreconditionError(InvariantViolation):
    """Raised with the name of the failing clause."""

    def __init__(self, clause: str, message: str) -> None:
        super().__init__(message, detail=f"clause: {clause}")
        self.clause = clause


class UnknownReference(HolonomyError, KeyError):
    exit_code = 4

    def __str__(self) -> str:
        return HolonomyError.__str__(self)


class InternalInconsistency(HolonomyError):
    """A certificate failed exact re-verification."""

    exit_code = 5


class IsometryConstructionError(HolonomyError):
    exit_code = 5
