"""Type descriptors: what the build stage can see of a declared record type."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..errors import ShapeError
from ..shapes import (
    ELEMENT,
    MAP_VALUE,
    FieldSeg,
    FieldShape,
    MappingShape,
    OptionalShape,
    PrimitiveKind,
    PrimitiveShape,
    RecordShape,
    SequenceShape,
    ShapeNode,
    canonicalize,
    render_path,
)


@dataclass(frozen=True)
class PrimRef:
    kind: PrimitiveKind


@dataclass(frozen=True)
class OptionalRef:
    inner: "TypeRef"


@dataclass(frozen=True)
class SeqRef:
    element: "TypeRef"


@dataclass(frozen=True)
class MapRef:
    key: "TypeRef"
    value: "TypeRef"


@dataclass(frozen=True)
class RecordRef:
    descriptor: "TypeDescriptor"


@dataclass(frozen=True)
class UnsupportedRef:
    """A referenced type outside the supported family, kept so that the
    error can be reported with its path when the shape is derived."""

    type_name: str
    reason: str


TypeRef = Union[PrimRef, OptionalRef, SeqRef, MapRef, RecordRef, UnsupportedRef]


@dataclass(frozen=True)
class FieldDescriptor:
    name: str
    type: TypeRef
    has_default: bool = False


@dataclass(frozen=True)
class TypeDescriptor:
    name: str
    fields: tuple[FieldDescriptor, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.fields, tuple):
            object.__setattr__(self, "fields", tuple(self.fields))


def _raw(ref: TypeRef, path: tuple) -> ShapeNode:
    if isinstance(ref, PrimRef):
        return PrimitiveShape(ref.kind)
    if isinstance(ref, OptionalRef):
        return OptionalShape(_raw(ref.inner, path))
    if isinstance(ref, SeqRef):
        return SequenceShape(_raw(ref.element, path + (ELEMENT,)))
    if isinstance(ref, MapRef):
        if not isinstance(ref.key, PrimRef):
            raise ShapeError(
                "UnsupportedShape",
                render_path(path),
                f"map key type {_ref_name(ref.key)} is not a primitive",
            )
        return MappingShape(ref.key.kind, _raw(ref.value, path + (MAP_VALUE,)))
    if isinstance(ref, RecordRef):
        return _raw_record(ref.descriptor, path)
    if isinstance(ref, UnsupportedRef):
        raise ShapeError("UnsupportedShape", render_path(path), f"{ref.type_name}: {ref.reason}")
    raise TypeError(f"not a type reference: {ref!r}")


def _raw_record(desc: TypeDescriptor, path: tuple) -> RecordShape:
    return RecordShape(
        tuple(
            FieldShape(f.name, _raw(f.type, path + (FieldSeg(f.name),)), f.has_default)
            for f in desc.fields
        )
    )


def _ref_name(ref: TypeRef) -> str:
    if isinstance(ref, RecordRef):
        return ref.descriptor.name
    if isinstance(ref, UnsupportedRef):
        return ref.type_name
    if isinstance(ref, PrimRef):
        return ref.kind.value
    return type(ref).__name__


def derive_shape(descriptor: TypeDescriptor) -> RecordShape:
    """Canonical record shape of a descriptor.

    Raises :class:`ShapeError` with the offending path for unsupported
    types, non-primitive map keys, double optionals and duplicate names.
    """
    shape = canonicalize(_raw_record(descriptor, ()))
    assert isinstance(shape, RecordShape)
    return shape
