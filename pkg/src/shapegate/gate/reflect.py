"""Descriptors from live dataclasses via ``typing`` introspection."""

from __future__ import annotations

import collections.abc
import dataclasses
import datetime
import sys
import types
import typing
from typing import Any, NewType

from ..shapes import PrimitiveKind
from .descriptors import (
    FieldDescriptor,
    MapRef,
    OptionalRef,
    PrimRef,
    RecordRef,
    SeqRef,
    TypeDescriptor,
    TypeRef,
    UnsupportedRef,
)

Int32 = NewType("Int32", int)
Int64 = NewType("Int64", int)

PRIMITIVE_TYPES: dict[Any, PrimitiveKind] = {
    bool: PrimitiveKind.BOOLEAN,
    int: PrimitiveKind.INT64,
    Int64: PrimitiveKind.INT64,
    Int32: PrimitiveKind.INT32,
    float: PrimitiveKind.FLOAT64,
    str: PrimitiveKind.STRING,
    bytes: PrimitiveKind.BINARY,
    datetime.date: PrimitiveKind.DATE,
    datetime.datetime: PrimitiveKind.TIMESTAMP,
}

_SEQUENCES = {list, set, frozenset, collections.abc.Sequence, collections.abc.Set}
_MAPPINGS = {dict, collections.abc.Mapping}


def _name(tp: Any) -> str:
    return getattr(tp, "__qualname__", None) or getattr(tp, "__name__", None) or repr(tp)


def _type_ref(tp: Any, stack: tuple[type, ...]) -> TypeRef:
    if tp in PRIMITIVE_TYPES:
        return PrimRef(PRIMITIVE_TYPES[tp])
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Annotated:
        return _type_ref(args[0], stack)
    if origin is typing.Union or origin is types.UnionType:
        rest = [a for a in args if a is not type(None)]
        if len(rest) == 1 and len(rest) < len(args):
            return OptionalRef(_type_ref(rest[0], stack))
        return UnsupportedRef(repr(tp), "union types other than Optional are not supported")
    if origin in _SEQUENCES and len(args) == 1:
        return SeqRef(_type_ref(args[0], stack))
    if origin is tuple and len(args) == 2 and args[1] is Ellipsis:
        return SeqRef(_type_ref(args[0], stack))
    if origin in _MAPPINGS and len(args) == 2:
        return MapRef(_type_ref(args[0], stack), _type_ref(args[1], stack))
    if isinstance(tp, type) and dataclasses.is_dataclass(tp):
        if tp in stack:
            return UnsupportedRef(_name(tp), "recursive types are not supported")
        return RecordRef(_describe(tp, stack + (tp,)))
    return UnsupportedRef(_name(tp), "not in the supported type family")


def _hints(cls: type) -> dict[str, Any]:
    try:
        return typing.get_type_hints(cls, include_extras=True)
    except NameError:
        pass
    # resolve field by field so one bad forward reference does not hide the rest
    module = sys.modules.get(cls.__module__)
    ns = dict(vars(module)) if module else {}
    hints: dict[str, Any] = {}
    for klass in reversed(cls.__mro__):
        for name, ann in getattr(klass, "__annotations__", {}).items():
            if isinstance(ann, str):
                try:
                    ann = eval(ann, ns)  # noqa: S307 - annotation text from the class itself
                except Exception:
                    ann = UnsupportedRef(ann, "unresolved forward reference")
            hints[name] = ann
    return hints


def _describe(cls: type, stack: tuple[type, ...]) -> TypeDescriptor:
    hints = _hints(cls)
    fields = []
    for f in dataclasses.fields(cls):
        tp = hints.get(f.name, f.type)
        ref = tp if isinstance(tp, UnsupportedRef) else _type_ref(tp, stack)
        has_default = f.default is not dataclasses.MISSING or f.default_factory is not dataclasses.MISSING
        fields.append(FieldDescriptor(f.name, ref, has_default))
    return TypeDescriptor(_name(cls), tuple(fields))


def descriptor_of(cls: type) -> TypeDescriptor:
    """Describe a dataclass by inspecting its fields and resolved annotations."""
    if not (isinstance(cls, type) and dataclasses.is_dataclass(cls)):
        raise TypeError(f"{cls!r} is not a dataclass type")
    return _describe(cls, (cls,))
