"""Normalized structural shapes.

A shape is the comparison form of a record type: primitives, optional
wrappers, sequences, maps with primitive keys and records. Optionality lives
in two places. A record field carries its own ``is_optional`` flag, while
optionality of sequence elements and map values is an ``OptionalShape`` node
inside the nested shape. :func:`canonicalize` enforces that split.
"""

from __future__ import annotations

import functools
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

from .errors import ShapeError

__all__ = [
    "PrimitiveKind",
    "PrimitiveShape",
    "OptionalShape",
    "SequenceShape",
    "MappingShape",
    "RecordShape",
    "FieldShape",
    "ShapeNode",
    "FieldSeg",
    "ElementSeg",
    "MapValueSeg",
    "PositionSeg",
    "ELEMENT",
    "MAP_VALUE",
    "Path",
    "Segment",
    "render_path",
    "canonicalize",
    "fingerprint",
    "canonical_bytes",
    "describe",
    "BOOLEAN",
    "INT32",
    "INT64",
    "FLOAT64",
    "STRING",
    "BINARY",
    "DATE",
    "TIMESTAMP",
]


class PrimitiveKind(str, Enum):
    BOOLEAN = "boolean"
    INT32 = "int32"
    INT64 = "int64"
    FLOAT64 = "float64"
    STRING = "string"
    BINARY = "binary"
    DATE = "date"
    TIMESTAMP = "timestamp"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class PrimitiveShape:
    kind: PrimitiveKind


@dataclass(frozen=True, slots=True)
class OptionalShape:
    inner: "ShapeNode"


@dataclass(frozen=True, slots=True)
class SequenceShape:
    element: "ShapeNode"


@dataclass(frozen=True, slots=True)
class MappingShape:
    key: PrimitiveKind
    value: "ShapeNode"


@dataclass(frozen=True, slots=True)
class FieldShape:
    name: str
    shape: "ShapeNode"
    has_default: bool = False
    is_optional: bool = False


@dataclass(frozen=True, slots=True)
class RecordShape:
    fields: tuple[FieldShape, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.fields, tuple):
            object.__setattr__(self, "fields", tuple(self.fields))

    def names(self) -> list[str]:
        return [f.name for f in self.fields]


ShapeNode = Union[PrimitiveShape, OptionalShape, SequenceShape, MappingShape, RecordShape]

BOOLEAN = PrimitiveShape(PrimitiveKind.BOOLEAN)
INT32 = PrimitiveShape(PrimitiveKind.INT32)
INT64 = PrimitiveShape(PrimitiveKind.INT64)
FLOAT64 = PrimitiveShape(PrimitiveKind.FLOAT64)
STRING = PrimitiveShape(PrimitiveKind.STRING)
BINARY = PrimitiveShape(PrimitiveKind.BINARY)
DATE = PrimitiveShape(PrimitiveKind.DATE)
TIMESTAMP = PrimitiveShape(PrimitiveKind.TIMESTAMP)


# -- structural paths --------------------------------------------------------


@dataclass(frozen=True, slots=True)
class FieldSeg:
    name: str


@dataclass(frozen=True, slots=True)
class ElementSeg:
    pass


@dataclass(frozen=True, slots=True)
class MapValueSeg:
    pass


@dataclass(frozen=True, slots=True)
class PositionSeg:
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("position index must be non-negative")


ELEMENT = ElementSeg()
MAP_VALUE = MapValueSeg()

Segment = Union[FieldSeg, ElementSeg, MapValueSeg, PositionSeg]
Path = tuple[Segment, ...]


def render_path(path: Iterable[Segment]) -> str:
    """Render a path, e.g. ``items[].price``, ``attrs{value}.x`` or ``#2``."""
    out = ""
    for seg in path:
        if isinstance(seg, FieldSeg):
            out = f"{out}.{seg.name}" if out else seg.name
        elif isinstance(seg, ElementSeg):
            out += "[]"
        elif isinstance(seg, MapValueSeg):
            out += "{value}"
        elif isinstance(seg, PositionSeg):
            out += f"#{seg.index}"
        else:
            raise TypeError(f"not a path segment: {seg!r}")
    return out


# -- canonical form ------------------------------------------------------------


def canonicalize(raw: ShapeNode) -> ShapeNode:
    """Return the canonical form of ``raw`` or raise :class:`ShapeError`.

    An ``OptionalShape`` at the root of a record field is folded into
    ``FieldShape.is_optional``. Double optionals, duplicate field names,
    empty names and non-primitive map keys are rejected. Optional wrappers
    may only remain as sequence elements or map values.
    """
    if isinstance(raw, OptionalShape):
        if isinstance(raw.inner, OptionalShape):
            raise ShapeError("DoubleOptional", "")
        raise ShapeError("UnsupportedShape", "", "optional shape outside a field, element or map value")
    return _canon(raw, ())


def _canon_slot(node: ShapeNode, path: tuple) -> ShapeNode:
    # sequence elements and map values may keep one optional wrapper
    if isinstance(node, OptionalShape):
        if isinstance(node.inner, OptionalShape):
            raise ShapeError("DoubleOptional", render_path(path))
        inner = _canon(node.inner, path)
        return node if inner is node.inner else OptionalShape(inner)
    return _canon(node, path)


def _canon(node: ShapeNode, path: tuple) -> ShapeNode:
    if isinstance(node, PrimitiveShape):
        if not isinstance(node.kind, PrimitiveKind):
            raise ShapeError("UnsupportedShape", render_path(path), f"unknown primitive {node.kind!r}")
        return node
    if isinstance(node, SequenceShape):
        element = _canon_slot(node.element, path + (ELEMENT,))
        return node if element is node.element else SequenceShape(element)
    if isinstance(node, MappingShape):
        if not isinstance(node.key, PrimitiveKind):
            raise ShapeError("NonAtomicMapKey", render_path(path), f"map key {node.key!r} is not primitive")
        value = _canon_slot(node.value, path + (MAP_VALUE,))
        return node if value is node.value else MappingShape(node.key, value)
    if isinstance(node, RecordShape):
        return _canon_record(node, path)
    if isinstance(node, OptionalShape):
        if isinstance(node.inner, OptionalShape):
            raise ShapeError("DoubleOptional", render_path(path))
        raise ShapeError("UnsupportedShape", render_path(path), "optional shape outside a field, element or map value")
    raise ShapeError("UnsupportedShape", render_path(path), f"not a shape: {node!r}")


def _canon_record(node: RecordShape, path: tuple) -> RecordShape:
    seen: set[str] = set()
    out: list[FieldShape] = []
    changed = False
    for f in node.fields:
        fpath = path + (FieldSeg(f.name),)
        if not f.name:
            raise ShapeError("EmptyName", render_path(path), "field name is empty")
        if f.name in seen:
            raise ShapeError("DuplicateName", render_path(fpath), f"field {f.name!r} declared twice")
        seen.add(f.name)
        shape, optional = f.shape, f.is_optional
        if isinstance(shape, OptionalShape):
            if optional or isinstance(shape.inner, OptionalShape):
                raise ShapeError("DoubleOptional", render_path(fpath))
            shape, optional = shape.inner, True
        canon = _canon(shape, fpath)
        if canon is f.shape and optional == f.is_optional:
            out.append(f)
        else:
            changed = True
            out.append(FieldShape(f.name, canon, bool(f.has_default), optional))
    return RecordShape(tuple(out)) if changed else node


# -- description and fingerprint --------------------------------------------------


def describe(shape: ShapeNode) -> str:
    """Compact human-readable type text used in drift reports."""
    if isinstance(shape, PrimitiveShape):
        return str(shape.kind)
    if isinstance(shape, OptionalShape):
        return describe(shape.inner) + "?"
    if isinstance(shape, SequenceShape):
        return f"array<{describe(shape.element)}>"
    if isinstance(shape, MappingShape):
        return f"map<{shape.key},{describe(shape.value)}>"
    if isinstance(shape, RecordShape):
        parts = []
        for f in shape.fields:
            mark = "?" if f.is_optional else ""
            parts.append(f"{f.name}{mark}:{describe(f.shape)}")
        return "struct<" + ",".join(parts) + ">"
    return repr(shape)


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def _encode(shape: ShapeNode, out: bytearray) -> None:
    if isinstance(shape, PrimitiveShape):
        out += b"P" + _lp(shape.kind.value.encode())
    elif isinstance(shape, OptionalShape):
        out += b"O"
        _encode(shape.inner, out)
    elif isinstance(shape, SequenceShape):
        out += b"S"
        _encode(shape.element, out)
    elif isinstance(shape, MappingShape):
        out += b"M" + _lp(shape.key.value.encode())
        _encode(shape.value, out)
    elif isinstance(shape, RecordShape):
        out += b"R" + struct.pack(">I", len(shape.fields))
        for f in shape.fields:
            flags = (1 if f.has_default else 0) | (2 if f.is_optional else 0)
            out += _lp(f.name.encode("utf-8")) + bytes((flags,))
            _encode(f.shape, out)
    else:
        raise TypeError(f"not a shape: {shape!r}")


def canonical_bytes(shape: ShapeNode) -> bytes:
    """Length-prefixed, tag-per-node byte encoding of a shape tree."""
    out = bytearray()
    _encode(shape, out)
    return bytes(out)


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


@functools.lru_cache(maxsize=4096)
def fingerprint(shape: ShapeNode) -> int:
    """64-bit FNV-1a digest of :func:`canonical_bytes`."""
    h = _FNV_OFFSET
    for byte in canonical_bytes(shape):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h
