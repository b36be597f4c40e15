"""Exception hierarchy shared by every layer."""

from __future__ import annotations


class ShapegateError(Exception):
    """Base class for all errors raised by shapegate."""


class ShapeError(ShapegateError):
    """A shape cannot be put into canonical form.

    ``kind`` is one of ``DoubleOptional``, ``DuplicateName``,
    ``NonAtomicMapKey``, ``UnsupportedShape`` or ``EmptyName``; ``path`` is
    the rendered structural path of the offending node.
    """

    def __init__(self, kind: str, path: str, detail: str = "") -> None:
        self.kind = kind
        self.path = path
        self.detail = detail
        where = path or "<root>"
        text = f"{kind} at {where}"
        if detail:
            text += f": {detail}"
        super().__init__(text)


class ParseError(ShapegateError):
    """Malformed schema JSON or JSON Lines input."""

    def __init__(
        self,
        message: str,
        *,
        line: int | None = None,
        column: int | None = None,
        kind: str = "Malformed",
        path: str = "",
    ) -> None:
        self.message = message
        self.line = line
        self.column = column
        self.kind = kind
        self.path = path
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        if path:
            loc.append(f"at {path}")
        prefix = f"{kind} ({', '.join(loc)})" if loc else kind
        super().__init__(f"{prefix}: {message}")


class InferenceError(ShapegateError):
    """Schema inference could not assign a type without guessing."""

    def __init__(self, kind: str, path: str, detail: str = "", line: int | None = None) -> None:
        self.kind = kind
        self.path = path
        self.detail = detail
        self.line = line
        text = f"{kind} at {path or '<root>'}"
        if line is not None:
            text += f" (line {line})"
        if detail:
            text += f": {detail}"
        super().__init__(text)


class GateError(ShapegateError):
    """The static gate refused a producer/contract pair.

    ``str(err)`` is exactly the rendered diagnostic: the drift report lines,
    or the shape error text when a declared type is unsupported.
    """

    def __init__(self, text: str, report=None, shape_error: ShapeError | None = None) -> None:
        self.report = report
        self.shape_error = shape_error
        super().__init__(text)


class SchemaDriftError(ShapegateError):
    """Raised by the asserting variants of runtime validation."""

    def __init__(self, report) -> None:
        self.report = report
        super().__init__(report.render())


class WitnessMismatch(ShapegateError):
    """A witness does not bind the producer, contract and policy at a sink."""


class BuilderStateError(ShapegateError):
    """A pipeline builder method was called in the wrong phase."""
