"""Exception hierarchy shared across the package.

Every error raised while reading user-supplied text (schemas, property
specs, scene records) derives from SceneMonError so callers can catch one
type at the CLI boundary and map it to an exit code.
"""
from __future__ import annotations


class SceneMonError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(SceneMonError):
    """Invalid object-model schema (bad reference, duplicate, type misuse)."""


class SpecSyntaxError(SceneMonError):
    """Lexical or grammatical error in schema or property-spec text."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class SpecTypeError(SceneMonError):
    """Well-formed spec text that fails type checking against the object model."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        if line:
            super().__init__(f"{line}:{column}: {message}")
        else:
            super().__init__(message)
        self.message = message
        self.line = line
        self.column = column


class SceneValidationError(SceneMonError):
    """Scene record that violates the object model or the record schema."""


class MissingAttributeError(SceneMonError):
    """Predicate evaluation touched an attribute absent from the scene.

    `ref` names the offending access as "<pattern-id>.<attribute>".
    """

    def __init__(self, ref: str) -> None:
        super().__init__(f"missing attribute: {ref}")
        self.ref = ref


class StreamOrderError(SceneMonError):
    """Scene stream with a timestamp lower than its predecessor."""


class OracleSizeError(SceneMonError):
    """Brute-force oracle asked to enumerate a scene above its size bound."""
