"""Runtime schemas at the data boundary.

The model mirrors the row-schema family of columnar engines: atomic types,
arrays with ``containsNull``, maps with ``valueContainsNull`` and records
whose fields carry ``nullable`` plus a single ``hasDefault`` metadata flag.
Validation goes through :func:`shape_of` and the shared policy engine, so
the runtime check and the static gate cannot disagree.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Union

from .errors import ParseError, SchemaDriftError
from .policy import DriftReport, SchemaPolicy, drift_items, fold_name
from .shapes import (
    FieldShape,
    MappingShape,
    OptionalShape,
    PrimitiveKind,
    PrimitiveShape,
    RecordShape,
    SequenceShape,
    ShapeNode,
)

__all__ = [
    "Atomic",
    "ArrayType",
    "MapType",
    "RecordType",
    "RuntimeField",
    "RuntimeType",
    "RuntimeSchema",
    "schema_for",
    "shape_of",
    "validate",
    "assert_valid",
    "baseline_ignore_case_and_nullability",
    "baseline_structurally",
    "baseline_structurally_by_name",
    "serialize_schema",
    "parse_schema",
    "load_schema",
]


@dataclass(frozen=True, slots=True)
class Atomic:
    kind: PrimitiveKind


@dataclass(frozen=True, slots=True)
class ArrayType:
    element: "RuntimeType"
    contains_null: bool = False


@dataclass(frozen=True, slots=True)
class MapType:
    key: PrimitiveKind
    value: "RuntimeType"
    value_contains_null: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.key, PrimitiveKind):
            raise TypeError(f"map keys must be atomic, got {self.key!r}")


@dataclass(frozen=True, slots=True)
class RuntimeField:
    name: str
    data_type: "RuntimeType"
    nullable: bool = False
    has_default: bool = False

    @property
    def metadata(self) -> dict[str, bool]:
        return {"hasDefault": True} if self.has_default else {}


@dataclass(frozen=True, slots=True)
class RecordType:
    fields: tuple[RuntimeField, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.fields, tuple):
            object.__setattr__(self, "fields", tuple(self.fields))
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate field names in record: {names}")

    def field(self, name: str) -> RuntimeField:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)


RuntimeType = Union[Atomic, ArrayType, MapType, RecordType]


@dataclass(frozen=True)
class RuntimeSchema:
    root: RecordType

    @functools.cached_property
    def shape(self) -> RecordShape:
        """The canonical shape of this schema, computed once."""
        return _record_shape(self.root)

    def field_names(self) -> list[str]:
        return [f.name for f in self.root.fields]


# -- shape <-> schema ------------------------------------------------------------


def _runtime_type(shape: ShapeNode) -> RuntimeType:
    if isinstance(shape, PrimitiveShape):
        return Atomic(shape.kind)
    if isinstance(shape, SequenceShape):
        el = shape.element
        if isinstance(el, OptionalShape):
            return ArrayType(_runtime_type(el.inner), True)
        return ArrayType(_runtime_type(el), False)
    if isinstance(shape, MappingShape):
        v = shape.value
        if isinstance(v, OptionalShape):
            return MapType(shape.key, _runtime_type(v.inner), True)
        return MapType(shape.key, _runtime_type(v), False)
    if isinstance(shape, RecordShape):
        return RecordType(
            tuple(RuntimeField(f.name, _runtime_type(f.shape), f.is_optional, f.has_default) for f in shape.fields)
        )
    raise TypeError(f"shape is not canonical here: {shape!r}")


def schema_for(contract: RecordShape) -> RuntimeSchema:
    """Derive the runtime schema of a canonical contract shape."""
    root = _runtime_type(contract)
    assert isinstance(root, RecordType)
    return RuntimeSchema(root)


def _shape(t: RuntimeType) -> ShapeNode:
    if isinstance(t, Atomic):
        return PrimitiveShape(t.kind)
    if isinstance(t, ArrayType):
        el = _shape(t.element)
        return SequenceShape(OptionalShape(el) if t.contains_null else el)
    if isinstance(t, MapType):
        v = _shape(t.value)
        return MappingShape(t.key, OptionalShape(v) if t.value_contains_null else v)
    if isinstance(t, RecordType):
        return _record_shape(t)
    raise TypeError(f"not a runtime type: {t!r}")


def _record_shape(t: RecordType) -> RecordShape:
    return RecordShape(tuple(FieldShape(f.name, _shape(f.data_type), f.has_default, f.nullable) for f in t.fields))


def shape_of(schema: RuntimeSchema) -> RecordShape:
    """Inverse of :func:`schema_for`; the result is canonical."""
    return schema.shape


def validate(actual: RuntimeSchema, contract: RuntimeSchema, policy: SchemaPolicy) -> DriftReport | None:
    """Check an actual schema against a contract schema.

    Returns ``None`` when the schema conforms, otherwise the drift report.
    """
    policy = SchemaPolicy.parse(policy)
    items = drift_items(actual.shape, contract.shape, policy)
    return DriftReport(policy, tuple(items)) if items else None


def assert_valid(actual: RuntimeSchema, contract: RuntimeSchema, policy: SchemaPolicy) -> None:
    report = validate(actual, contract, policy)
    if report is not None:
        raise SchemaDriftError(report)


# -- baseline comparators ------------------------------------------------------------
# Reimplementations of the documented built-in comparator semantics. They
# intentionally ignore every nullability flag, nested ones included.


def _ignore_case_eq(a: RuntimeType, b: RuntimeType) -> bool:
    if isinstance(a, Atomic) and isinstance(b, Atomic):
        return a.kind is b.kind
    if isinstance(a, ArrayType) and isinstance(b, ArrayType):
        return _ignore_case_eq(a.element, b.element)
    if isinstance(a, MapType) and isinstance(b, MapType):
        return a.key is b.key and _ignore_case_eq(a.value, b.value)
    if isinstance(a, RecordType) and isinstance(b, RecordType):
        if len(a.fields) != len(b.fields):
            return False
        right = {fold_name(f.name): f for f in b.fields}
        if len(right) != len(b.fields):
            return False
        seen = set()
        for f in a.fields:
            key = fold_name(f.name)
            other = right.get(key)
            if other is None or key in seen or not _ignore_case_eq(f.data_type, other.data_type):
                return False
            seen.add(key)
        return True
    return False


def baseline_ignore_case_and_nullability(a: RuntimeSchema, b: RuntimeSchema) -> bool:
    """Unordered by-name equality with case-insensitive names, ignoring all nullability."""
    return _ignore_case_eq(a.root, b.root)


def _structural_eq(a: RuntimeType, b: RuntimeType, names: Callable[[str, str], bool] | None) -> bool:
    if isinstance(a, Atomic) and isinstance(b, Atomic):
        return a.kind is b.kind
    if isinstance(a, ArrayType) and isinstance(b, ArrayType):
        return _structural_eq(a.element, b.element, names)
    if isinstance(a, MapType) and isinstance(b, MapType):
        return a.key is b.key and _structural_eq(a.value, b.value, names)
    if isinstance(a, RecordType) and isinstance(b, RecordType):
        if len(a.fields) != len(b.fields):
            return False
        for fa, fb in zip(a.fields, b.fields):
            if names is not None and not names(fa.name, fb.name):
                return False
            if not _structural_eq(fa.data_type, fb.data_type, names):
                return False
        return True
    return False


def baseline_structurally(a: RuntimeSchema, b: RuntimeSchema) -> bool:
    """By-position equality: names and nullability ignored."""
    return _structural_eq(a.root, b.root, None)


def baseline_structurally_by_name(
    a: RuntimeSchema,
    b: RuntimeSchema,
    resolver: Callable[[str, str], bool] = str.__eq__,
) -> bool:
    """Ordered by-name equality with a supplied name resolver, nullability ignored."""
    return _structural_eq(a.root, b.root, resolver)


# -- canonical JSON ------------------------------------------------------------------


def _type_json(t: RuntimeType) -> dict[str, Any]:
    if isinstance(t, Atomic):
        return {"type": t.kind.value}
    if isinstance(t, ArrayType):
        return {"type": "array", "element": _type_json(t.element), "containsNull": t.contains_null}
    if isinstance(t, MapType):
        return {
            "type": "map",
            "key": t.key.value,
            "value": _type_json(t.value),
            "valueContainsNull": t.value_contains_null,
        }
    if isinstance(t, RecordType):
        fields = []
        for f in t.fields:
            entry: dict[str, Any] = {"name": f.name, "type": _type_json(f.data_type), "nullable": f.nullable}
            if f.has_default:
                entry["metadata"] = {"hasDefault": True}
            fields.append(entry)
        return {"type": "record", "fields": fields}
    raise TypeError(f"not a runtime type: {t!r}")


def serialize_schema(schema: RuntimeSchema) -> str:
    """Canonical JSON text: fixed key order, two-space indent, trailing newline."""
    return json.dumps(_type_json(schema.root), indent=2, ensure_ascii=False) + "\n"


_PRIMITIVES = {k.value: k for k in PrimitiveKind}


def _expect_keys(obj: Mapping[str, Any], required: set[str], optional: set[str], where: str) -> None:
    keys = set(obj)
    missing = required - keys
    if missing:
        raise ParseError(f"missing key(s) {sorted(missing)}", path=where)
    unknown = keys - required - optional
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)}", path=where)


def _expect_bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise ParseError(f"expected a boolean, got {value!r}", path=where)
    return value


def _parse_type(obj: Any, where: str) -> RuntimeType:
    if not isinstance(obj, dict):
        raise ParseError(f"expected a type object, got {type(obj).__name__}", path=where)
    tag = obj.get("type")
    if tag in _PRIMITIVES:
        _expect_keys(obj, {"type"}, set(), where)
        return Atomic(_PRIMITIVES[tag])
    if tag == "array":
        _expect_keys(obj, {"type", "element", "containsNull"}, set(), where)
        element = _parse_type(obj["element"], where + ".element")
        return ArrayType(element, _expect_bool(obj["containsNull"], where + ".containsNull"))
    if tag == "map":
        _expect_keys(obj, {"type", "key", "value", "valueContainsNull"}, set(), where)
        key = obj["key"]
        if isinstance(key, dict):
            key = key.get("type")
        if key not in _PRIMITIVES:
            raise ParseError(f"map key {key!r} is not atomic", kind="NonAtomicMapKey", path=where + ".key")
        value = _parse_type(obj["value"], where + ".value")
        return MapType(_PRIMITIVES[key], value, _expect_bool(obj["valueContainsNull"], where + ".valueContainsNull"))
    if tag == "record":
        _expect_keys(obj, {"type", "fields"}, set(), where)
        raw_fields = obj["fields"]
        if not isinstance(raw_fields, list):
            raise ParseError("fields must be a list", path=where + ".fields")
        fields = []
        seen = set()
        for i, raw in enumerate(raw_fields):
            fwhere = f"{where}.fields[{i}]"
            if not isinstance(raw, dict):
                raise ParseError("field entries must be objects", path=fwhere)
            _expect_keys(raw, {"name", "type", "nullable"}, {"metadata"}, fwhere)
            name = raw["name"]
            if not isinstance(name, str) or not name:
                raise ParseError("field name must be a non-empty string", path=fwhere + ".name")
            if name in seen:
                raise ParseError(f"duplicate field name {name!r}", kind="DuplicateName", path=fwhere)
            seen.add(name)
            has_default = False
            if "metadata" in raw:
                meta = raw["metadata"]
                if not isinstance(meta, dict):
                    raise ParseError("metadata must be an object", path=fwhere + ".metadata")
                _expect_keys(meta, set(), {"hasDefault"}, fwhere + ".metadata")
                has_default = _expect_bool(meta.get("hasDefault", False), fwhere + ".metadata.hasDefault")
            data_type = _parse_type(raw["type"], fwhere + ".type")
            fields.append(RuntimeField(name, data_type, _expect_bool(raw["nullable"], fwhere + ".nullable"), has_default))
        return RecordType(tuple(fields))
    raise ParseError(f"unknown type tag {tag!r}", path=where)


def parse_schema(text: str | bytes) -> RuntimeSchema:
    """Parse canonical schema JSON; raise :class:`ParseError` on bad input."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    root = _parse_type(obj, "$")
    if not isinstance(root, RecordType):
        raise ParseError("the schema root must be a record", path="$")
    return RuntimeSchema(root)


def load_schema(path) -> RuntimeSchema:
    with open(path, "rb") as fh:
        return parse_schema(fh.read())
