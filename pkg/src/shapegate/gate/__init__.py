"""The build-time layer.

Two entry points share one engine:

* :func:`static_assert_conforms` derives shapes from dataclasses (or
  descriptors) and returns a :class:`~shapegate.policy.Witness` or raises
  :class:`~shapegate.errors.GateError` whose text is the drift report.
* :func:`check_paths` runs the same assertions over source files without
  importing them. Run it as the build step (``shapegate check src/``) so
  declared drift fails the build before any pipeline code executes.
"""

from __future__ import annotations

from typing import Any

from ..errors import GateError, ShapeError
from ..policy import DriftReport, SchemaPolicy, Witness, conforms
from ..shapes import RecordShape, canonicalize
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
    derive_shape,
)
from .reflect import Int32, Int64, descriptor_of
from .source import Diagnostic, check_file, check_paths, check_source, descriptors_from_source

__all__ = [
    "FieldDescriptor",
    "MapRef",
    "OptionalRef",
    "PrimRef",
    "RecordRef",
    "SeqRef",
    "TypeDescriptor",
    "TypeRef",
    "UnsupportedRef",
    "derive_shape",
    "descriptor_of",
    "Int32",
    "Int64",
    "shape_for",
    "static_assert_conforms",
    "Diagnostic",
    "check_file",
    "check_paths",
    "check_source",
    "descriptors_from_source",
]


def shape_for(declared: Any) -> RecordShape:
    """Canonical record shape of a dataclass type, a descriptor or a shape."""
    if isinstance(declared, RecordShape):
        shape = canonicalize(declared)
        assert isinstance(shape, RecordShape)
        return shape
    if isinstance(declared, TypeDescriptor):
        return derive_shape(declared)
    return derive_shape(descriptor_of(declared))


def _label(declared: Any) -> str:
    if isinstance(declared, TypeDescriptor):
        return declared.name
    if isinstance(declared, RecordShape):
        return "<shape>"
    return getattr(declared, "__qualname__", repr(declared))


def static_assert_conforms(producer: Any, contract: Any, policy: SchemaPolicy | str) -> Witness:
    """Prove that ``producer`` conforms to ``contract`` under ``policy``.

    Raises :class:`GateError` when either type is unsupported or when the pair
    drifts; the error text is the shape error or the rendered drift report.
    """
    policy = SchemaPolicy.parse(policy)
    shapes = []
    for declared in (producer, contract):
        try:
            shapes.append(shape_for(declared))
        except ShapeError as err:
            raise GateError(f"{_label(declared)}: {err}", shape_error=err) from None
    verdict = conforms(shapes[0], shapes[1], policy)
    if isinstance(verdict, DriftReport):
        raise GateError(verdict.render(), report=verdict)
    return verdict
