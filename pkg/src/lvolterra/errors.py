"""Exceptions raised by lvolterra."""

from __future__ import annotations


class LVolterraError(Exception):
    """Base class for all lvolterra errors."""


class ConfigError(LVolterraError, ValueError):
    """A configuration file or environment override is malformed."""


class TensorShapeError(LVolterraError, ValueError):
    """The heredity array does not have the declared m x m x m shape."""


class SimplexError(LVolterraError, ValueError):
    """A vector is not a point of the simplex within tolerance."""


class DomainError(LVolterraError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ClassificationError(LVolterraError, ValueError):
    """The operator does not have the class an operation requires.

    Attributes:
        k: The offending coordinate (0-based).
        reason: Which defining condition failed.
    """

    def __init__(self, k: int, reason: str) -> None:
        self.k = k
        self.reason = reason
        super().__init__(f"coordinate {k + 1}: {reason}")


class HypothesisError(LVolterraError, ValueError):
    """A structural precondition required by an operation does not hold.

    Attributes:
        index: The offending index (0-based), if one exists.
        reason: Human readable description.
    """

    def __init__(self, reason: str, index: int | None = None) -> None:
        self.index = index
        self.reason = reason
        where = f" at index {index + 1}" if index is not None else ""
        super().__init__(f"{reason}{where}")


class InconsistencyError(LVolterraError, RuntimeError):
    """A computed object failed its own certification."""


class DocumentParseError(LVolterraError, ValueError):
    """An operator document could not be parsed.

    Attributes:
        line: 1-based line number, if known.
        field: Dotted path of the offending field, if known.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None) -> None:
        self.line = line
        self.field = field
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(field)
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
