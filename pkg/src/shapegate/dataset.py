"""Line-delimited JSON datasets with inferred schemas.

This is the external boundary the runtime pin guards: the schema of a
dataset comes from the data, not from the declared types in pipeline code.
"""

from __future__ import annotations

import base64
import datetime
import io
import json
import os
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Iterator, Mapping, Sequence

from .errors import InferenceError, ParseError
from .schema import ArrayType, Atomic, MapType, RecordType, RuntimeField, RuntimeSchema, RuntimeType
from .shapes import ELEMENT, FieldSeg, PrimitiveKind, render_path

__all__ = ["Dataset", "infer_schema", "read_jsonl", "write_jsonl", "read_jsonl_path", "write_jsonl_path"]

_INT64_MIN, _INT64_MAX = -(2**63), 2**63 - 1

Row = dict[str, Any]


class _Acc:
    """Running type observation for one position in the data."""

    __slots__ = ("cat", "nulls", "objects", "present", "fields", "arrays", "nonempty", "elem", "elem_null")

    def __init__(self) -> None:
        self.cat: str | None = None
        self.nulls = 0
        self.objects = 0
        self.present = 0
        self.fields: dict[str, _Acc] = {}
        self.arrays = 0
        self.nonempty = False
        self.elem: _Acc | None = None
        self.elem_null = False


def _category(value: Any) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "int64" if _INT64_MIN <= value <= _INT64_MAX else "float64"
    if isinstance(value, float):
        return "float64"
    if isinstance(value, str):
        return "string"
    if isinstance(value, Mapping):
        return "record"
    if isinstance(value, (list, tuple)):
        return "array"
    if isinstance(value, (bytes, bytearray)):
        return "binary"
    if isinstance(value, datetime.datetime):
        return "timestamp"
    if isinstance(value, datetime.date):
        return "date"
    raise TypeError(f"unsupported value {value!r}")


def _observe(acc: _Acc, value: Any, path: tuple, line: int | None) -> None:
    if value is None:
        acc.nulls += 1
        return
    try:
        cat = _category(value)
    except TypeError as exc:
        raise InferenceError("Heterogeneous", render_path(path), str(exc), line) from None
    if acc.cat is None:
        acc.cat = cat
    elif acc.cat != cat:
        if {acc.cat, cat} == {"int64", "float64"}:
            acc.cat = "float64"
        else:
            raise InferenceError("Heterogeneous", render_path(path), f"{acc.cat} vs {cat}", line)
    if cat == "record":
        acc.objects += 1
        for key, sub in value.items():
            child = acc.fields.get(key)
            if child is None:
                child = acc.fields[key] = _Acc()
            child.present += 1
            _observe(child, sub, path + (FieldSeg(key),), line)
    elif cat == "array":
        acc.arrays += 1
        if acc.elem is None:
            acc.elem = _Acc()
        for el in value:
            acc.nonempty = True
            if el is None:
                acc.elem_null = True
            _observe(acc.elem, el, path + (ELEMENT,), line)


def _finish(acc: _Acc, path: tuple) -> RuntimeType:
    if acc.cat is None:
        raise InferenceError("AllNull", render_path(path), "no non-null value observed")
    if acc.cat == "record":
        return RecordType(
            tuple(
                RuntimeField(
                    name,
                    _finish(child, path + (FieldSeg(name),)),
                    nullable=child.present < acc.objects or child.nulls > 0,
                )
                for name, child in acc.fields.items()
            )
        )
    if acc.cat == "array":
        if not acc.nonempty:
            raise InferenceError("EmptyArray", render_path(path), "array is empty in every record")
        assert acc.elem is not None
        return ArrayType(_finish(acc.elem, path + (ELEMENT,)), acc.elem_null)
    return Atomic(PrimitiveKind(acc.cat))


def infer_schema(records: Iterable[Mapping[str, Any]], lines: Sequence[int] | None = None) -> RuntimeSchema:
    """Infer a schema from parsed JSON objects.

    Fields are the union over all records, in first-appearance order. A field
    is nullable when it is missing or null in any record. Integers widen to
    float64 when mixed with fractional numbers. Objects become records,
    never maps. ``lines`` optionally maps record index to source line for
    error messages.
    """
    root = _Acc()
    count = 0
    for i, rec in enumerate(records):
        line = lines[i] if lines is not None else i + 1
        if not isinstance(rec, Mapping):
            raise InferenceError("Heterogeneous", "", f"record {i + 1} is not an object", line)
        count += 1
        _observe(root, rec, (), line)
    if count == 0:
        raise InferenceError("NoRecords", "", "no records")
    schema_root = _finish(root, ())
    assert isinstance(schema_root, RecordType)
    return RuntimeSchema(schema_root)


# -- rows -----------------------------------------------------------------------


def _coerce(value: Any, t: RuntimeType, nullable: bool, path: str) -> Any:
    if value is None:
        if not nullable:
            raise ValueError(f"null value at non-nullable {path or '<root>'}")
        return None
    if isinstance(t, Atomic):
        kind = t.kind
        if kind is PrimitiveKind.FLOAT64 and isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        expected = {
            PrimitiveKind.BOOLEAN: "boolean",
            PrimitiveKind.INT32: "int64",
            PrimitiveKind.INT64: "int64",
            PrimitiveKind.STRING: "string",
            PrimitiveKind.BINARY: "binary",
            PrimitiveKind.DATE: "date",
            PrimitiveKind.TIMESTAMP: "timestamp",
        }.get(kind)
        actual = _category(value)
        if actual == expected or (kind is PrimitiveKind.BINARY and actual == "string"):
            return value
        raise ValueError(f"{path or '<root>'}: expected {kind}, got {actual}")
    if isinstance(t, ArrayType):
        if not isinstance(value, (list, tuple)):
            raise ValueError(f"{path}: expected array")
        return [_coerce(v, t.element, t.contains_null, path + "[]") for v in value]
    if isinstance(t, MapType):
        if not isinstance(value, Mapping):
            raise ValueError(f"{path}: expected map")
        return {str(k): _coerce(v, t.value, t.value_contains_null, path + "{value}") for k, v in value.items()}
    if isinstance(t, RecordType):
        if not isinstance(value, Mapping):
            raise ValueError(f"{path}: expected record")
        return _coerce_record(value, t, path)
    raise TypeError(f"not a runtime type: {t!r}")


def _coerce_record(value: Mapping[str, Any], t: RecordType, path: str) -> Row:
    known = {f.name for f in t.fields}
    extra = [k for k in value if k not in known]
    if extra:
        raise ValueError(f"{path or '<root>'}: fields {extra} are not in the schema")
    out = {}
    for f in t.fields:
        sub = f"{path}.{f.name}" if path else f.name
        out[f.name] = _coerce(value.get(f.name), f.data_type, f.nullable, sub)
    return out


@dataclass(frozen=True)
class Dataset:
    """Rows typed by a runtime schema; rows are coerced on construction."""

    schema: RuntimeSchema
    rows: tuple[Row, ...] = field(default=())

    def __post_init__(self) -> None:
        rows = tuple(_coerce_record(r, self.schema.root, "") for r in self.rows)
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    @classmethod
    def from_records(cls, records: Iterable[Mapping[str, Any]]) -> "Dataset":
        """Build a dataset whose schema is inferred from the records themselves."""
        records = list(records)
        return cls(infer_schema(records), tuple(dict(r) for r in records))

    def select(self, *names: str) -> "Dataset":
        fields = tuple(self.schema.root.field(n) for n in names)
        rows = tuple({n: r[n] for n in names} for r in self.rows)
        return Dataset(RuntimeSchema(RecordType(fields)), rows)

    def drop(self, *names: str) -> "Dataset":
        keep = [f.name for f in self.schema.root.fields if f.name not in names]
        return self.select(*keep)


# -- JSON Lines ---------------------------------------------------------------------


def _iter_lines(source: Any) -> Iterator[tuple[int, str]]:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    for number, raw in enumerate(source, start=1):
        if isinstance(raw, (bytes, bytearray)):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"invalid UTF-8: {exc.reason}", line=number) from None
        yield number, raw


def read_jsonl(source: IO[bytes] | IO[str] | bytes) -> Dataset:
    """Read one JSON object per line; blank lines are skipped."""
    records: list[dict[str, Any]] = []
    lines: list[int] = []
    for number, text in _iter_lines(source):
        text = text.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=number, column=exc.colno) from None
        if not isinstance(obj, dict):
            raise ParseError(f"expected a JSON object, got {type(obj).__name__}", line=number)
        records.append(obj)
        lines.append(number)
    if not records:
        raise InferenceError("NoRecords", "", "no records")
    schema = infer_schema(records, lines)
    return Dataset(schema, tuple(records))


def read_jsonl_path(path: str | os.PathLike) -> Dataset:
    with open(path, "rb") as fh:
        return read_jsonl(fh)


def _json_value(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_value(v) for v in value]
    if isinstance(value, (bytes, bytearray)):
        return base64.b64encode(value).decode("ascii")
    if isinstance(value, (datetime.date, datetime.datetime)):
        return value.isoformat()
    return value


def write_jsonl(dataset: Dataset, sink: IO[bytes]) -> int:
    """Write rows in schema field order, nulls explicit; return the row count."""
    count = 0
    for row in dataset.rows:
        line = json.dumps(_json_value(row), ensure_ascii=False, separators=(",", ":"), allow_nan=False)
        sink.write(line.encode("utf-8") + b"\n")
        count += 1
    return count


def write_jsonl_path(dataset: Dataset, path: str | os.PathLike) -> int:
    with open(path, "wb") as fh:
        return write_jsonl(dataset, fh)
