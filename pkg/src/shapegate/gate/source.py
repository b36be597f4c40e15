"""Build-stage gate over Python source.

The check parses source files with :mod:`ast` and never imports or executes
them. It collects module-level dataclass declarations, evaluates every
``static_assert_conforms(Producer, Contract, policy)`` call, and inspects
``new_pipeline()`` method chains for out-of-order builder calls and for
witnesses that do not bind the sink they are presented to.
"""

from __future__ import annotations

import ast
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import ShapeError
from ..policy import DriftReport, SchemaPolicy, conforms
from ..shapes import PrimitiveKind, RecordShape, fingerprint
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

__all__ = ["Diagnostic", "check_source", "check_file", "check_paths", "descriptors_from_source"]

_PRIMITIVE_NAMES = {
    "bool": PrimitiveKind.BOOLEAN,
    "int": PrimitiveKind.INT64,
    "Int64": PrimitiveKind.INT64,
    "Int32": PrimitiveKind.INT32,
    "float": PrimitiveKind.FLOAT64,
    "str": PrimitiveKind.STRING,
    "bytes": PrimitiveKind.BINARY,
    "date": PrimitiveKind.DATE,
    "datetime.date": PrimitiveKind.DATE,
    "datetime": PrimitiveKind.TIMESTAMP,
    "datetime.datetime": PrimitiveKind.TIMESTAMP,
}
_SEQUENCE_NAMES = {"list", "List", "Sequence", "set", "Set", "frozenset", "FrozenSet", "AbstractSet"}
_MAPPING_NAMES = {"dict", "Dict", "Mapping"}
_GATE_CALL = "static_assert_conforms"


@dataclass(frozen=True)
class Diagnostic:
    filename: str
    line: int
    column: int
    code: str
    headline: str
    detail: str = ""

    def render(self) -> str:
        head = f"{self.filename}:{self.line}:{self.column}: error[{self.code}]: {self.headline}"
        return f"{head}\n{self.detail}" if self.detail else head


def _dotted(node: ast.AST) -> str | None:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        base = _dotted(node.value)
        return f"{base}.{node.attr}" if base else None
    return None


def _last(dotted: str) -> str:
    return dotted.rsplit(".", 1)[-1]


def _is_dataclass_decorator(node: ast.expr) -> bool:
    target = node.func if isinstance(node, ast.Call) else node
    name = _dotted(target)
    return name in ("dataclass", "dataclasses.dataclass")


def _has_default(value: ast.expr | None) -> bool:
    if value is None:
        return False
    if isinstance(value, ast.Call) and _dotted(value.func) in ("field", "dataclasses.field"):
        return any(kw.arg in ("default", "default_factory") for kw in value.keywords)
    return True


class _Module:
    def __init__(self, tree: ast.Module) -> None:
        self.classes: dict[str, ast.ClassDef] = {}
        for node in tree.body:
            if isinstance(node, ast.ClassDef) and any(_is_dataclass_decorator(d) for d in node.decorator_list):
                self.classes[node.name] = node
        self._cache: dict[str, TypeDescriptor] = {}

    def describe(self, name: str, stack: tuple[str, ...] = ()) -> TypeDescriptor:
        if not stack and name in self._cache:
            return self._cache[name]
        stack = stack + (name,)
        fields: dict[str, FieldDescriptor] = {}
        cls = self.classes[name]
        for base in cls.bases:
            base_name = _dotted(base)
            if base_name in self.classes and base_name not in stack:
                for f in self.describe(base_name, stack).fields:
                    fields[f.name] = f
        for stmt in cls.body:
            if not (isinstance(stmt, ast.AnnAssign) and isinstance(stmt.target, ast.Name)):
                continue
            ann_name = _dotted(stmt.annotation.value) if isinstance(stmt.annotation, ast.Subscript) else _dotted(stmt.annotation)
            if ann_name and _last(ann_name) in ("ClassVar", "InitVar"):
                continue
            ref = self.type_ref(stmt.annotation, stack)
            fields[stmt.target.id] = FieldDescriptor(stmt.target.id, ref, _has_default(stmt.value))
        desc = TypeDescriptor(name, tuple(fields.values()))
        if len(stack) == 1:
            self._cache[name] = desc
        return desc

    def type_ref(self, node: ast.expr, stack: tuple[str, ...]) -> TypeRef:
        text = ast.unparse(node)
        if isinstance(node, ast.Constant) and isinstance(node.value, str):
            try:
                inner = ast.parse(node.value, mode="eval").body
            except SyntaxError:
                return UnsupportedRef(node.value, "unparseable forward reference")
            return self.type_ref(inner, stack)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.BitOr):
            return self._union(_flatten_union(node), text, stack)
        if isinstance(node, ast.Subscript):
            base = _dotted(node.value)
            args = list(node.slice.elts) if isinstance(node.slice, ast.Tuple) else [node.slice]
            head = _last(base) if base else ""
            if head == "Optional" and len(args) == 1:
                return OptionalRef(self.type_ref(args[0], stack))
            if head == "Union":
                return self._union(args, text, stack)
            if head == "Annotated" and args:
                return self.type_ref(args[0], stack)
            if head in _SEQUENCE_NAMES and len(args) == 1:
                return SeqRef(self.type_ref(args[0], stack))
            if head in ("tuple", "Tuple") and len(args) == 2 and _is_ellipsis(args[1]):
                return SeqRef(self.type_ref(args[0], stack))
            if head in _MAPPING_NAMES and len(args) == 2:
                return MapRef(self.type_ref(args[0], stack), self.type_ref(args[1], stack))
            return UnsupportedRef(text, "not in the supported type family")
        dotted = _dotted(node)
        if dotted is None:
            return UnsupportedRef(text, "not in the supported type family")
        if dotted in self.classes:
            if dotted in stack:
                return UnsupportedRef(dotted, "recursive types are not supported")
            return RecordRef(self.describe(dotted, stack))
        if dotted in _PRIMITIVE_NAMES:
            return PrimRef(_PRIMITIVE_NAMES[dotted])
        if _last(dotted) in ("Int32", "Int64"):
            return PrimRef(_PRIMITIVE_NAMES[_last(dotted)])
        return UnsupportedRef(dotted, "unresolved or unsupported type")

    def _union(self, members: list[ast.expr], text: str, stack: tuple[str, ...]) -> TypeRef:
        rest = [m for m in members if not (isinstance(m, ast.Constant) and m.value is None)]
        if len(rest) == 1 and len(rest) < len(members):
            return OptionalRef(self.type_ref(rest[0], stack))
        return UnsupportedRef(text, "union types other than Optional are not supported")


def _flatten_union(node: ast.expr) -> list[ast.expr]:
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.BitOr):
        return _flatten_union(node.left) + _flatten_union(node.right)
    return [node]


def _is_ellipsis(node: ast.expr) -> bool:
    return isinstance(node, ast.Constant) and node.value is Ellipsis


def descriptors_from_source(text: str, filename: str = "<source>") -> dict[str, TypeDescriptor]:
    """Descriptors of every module-level dataclass in ``text``."""
    module = _Module(ast.parse(text, filename))
    return {name: module.describe(name) for name in module.classes}


def _policy_of(node: ast.expr | None) -> SchemaPolicy | None:
    if node is None:
        return None
    if isinstance(node, ast.Constant) and isinstance(node.value, str):
        try:
            return SchemaPolicy.parse(node.value)
        except ValueError:
            return None
    dotted = _dotted(node)
    if dotted and "." in dotted:
        try:
            return SchemaPolicy[_last(dotted)]
        except KeyError:
            return None
    return None


def _arg(call: ast.Call, index: int, name: str) -> ast.expr | None:
    for kw in call.keywords:
        if kw.arg == name:
            return kw.value
    if index < len(call.args):
        return call.args[index]
    return None


def _callee(call: ast.Call) -> str | None:
    name = _dotted(call.func)
    return _last(name) if name else None


@dataclass
class _Binding:
    producer: int | None
    contract: int | None
    policy: SchemaPolicy
    label: str


class _Checker:
    def __init__(self, tree: ast.Module, filename: str) -> None:
        self.tree = tree
        self.filename = filename
        self.module = _Module(tree)
        self.diagnostics: list[Diagnostic] = []
        self.bindings: dict[str, _Binding] = {}
        self._shapes: dict[str, RecordShape | ShapeError] = {}
        self._gated: dict[int, _Binding | None] = {}

    def emit(self, node: ast.AST, code: str, headline: str, detail: str = "") -> None:
        self.diagnostics.append(
            Diagnostic(self.filename, getattr(node, "lineno", 0), getattr(node, "col_offset", 0) + 1, code, headline, detail)
        )

    def shape(self, node: ast.expr | None) -> RecordShape | ShapeError | None:
        name = _dotted(node) if node is not None else None
        if name is None or name not in self.module.classes:
            return None
        if name not in self._shapes:
            try:
                self._shapes[name] = derive_shape(self.module.describe(name))
            except ShapeError as err:
                self._shapes[name] = err
        return self._shapes[name]

    def run(self) -> list[Diagnostic]:
        for stmt in self.tree.body:
            if (
                isinstance(stmt, ast.Assign)
                and len(stmt.targets) == 1
                and isinstance(stmt.targets[0], ast.Name)
                and isinstance(stmt.value, ast.Call)
                and _callee(stmt.value) == _GATE_CALL
            ):
                binding = self.gate_call(stmt.value)
                if binding is not None:
                    self.bindings[stmt.targets[0].id] = binding
        for node in ast.walk(self.tree):
            if isinstance(node, ast.Call) and _callee(node) == _GATE_CALL:
                self.gate_call(node)
        chained: set[int] = set()
        for node in ast.walk(self.tree):
            if isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute) and id(node) not in chained:
                if node.func.attr in ("add_sink", "run", "transform", "source"):
                    self.chain(node, chained)
        return self.diagnostics

    def gate_call(self, call: ast.Call) -> _Binding | None:
        if id(call) not in self._gated:
            self._gated[id(call)] = self._gate_call(call)
        return self._gated[id(call)]

    def _gate_call(self, call: ast.Call) -> _Binding | None:
        p_node, c_node = _arg(call, 0, "producer"), _arg(call, 1, "contract")
        policy = _policy_of(_arg(call, 2, "policy"))
        label = f"{_GATE_CALL}({ast.unparse(p_node) if p_node else '?'}, {ast.unparse(c_node) if c_node else '?'}, {policy or '?'})"
        if policy is None:
            self.emit(call, "gate", f"{label}: the policy must be a literal SchemaPolicy member or name")
            return None
        shapes = []
        for node in (p_node, c_node):
            shape = self.shape(node)
            if shape is None:
                text = ast.unparse(node) if node is not None else "<missing>"
                self.emit(call, "shape", f"{label}: cannot resolve {text} to a dataclass declared in this module",
                          f"UnsupportedShape at <root>: {text}")
                return None
            if isinstance(shape, ShapeError):
                self.emit(call, "shape", f"{label}: unsupported declared type {ast.unparse(node)}", f"{ast.unparse(node)}: {shape}")
                return None
            shapes.append(shape)
        verdict = conforms(shapes[0], shapes[1], policy)
        if isinstance(verdict, DriftReport):
            self.emit(call, "drift", f"{label} failed", verdict.render())
            return None
        return _Binding(verdict.producer_fingerprint, verdict.contract_fingerprint, policy, label)

    def chain(self, outer: ast.Call, chained: set[int]) -> None:
        calls: list[tuple[str, ast.Call]] = []
        node: ast.expr = outer
        while isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute):
            calls.append((node.func.attr, node))
            chained.add(id(node))
            node = node.func.value
        if not (isinstance(node, ast.Call) and _callee(node) == "new_pipeline"):
            return
        calls.reverse()
        current: RecordShape | None = None
        has_source = False
        for method, call in calls:
            if method == "source":
                if has_source:
                    self.emit(call, "builder", "source() called on a builder that already has a source")
                has_source = True
                current = self._maybe_shape(_arg(call, 1, "shape"))
            elif method in ("transform", "add_sink", "run"):
                if not has_source:
                    self.emit(call, "builder", f"{method}() called before source()")
                    continue
                if method == "transform":
                    current = self._maybe_shape(_arg(call, 1, "shape"))
                elif method == "add_sink":
                    self.sink(call, current)

    def _maybe_shape(self, node: ast.expr | None) -> RecordShape | None:
        shape = self.shape(node)
        return shape if isinstance(shape, RecordShape) else None

    def sink(self, call: ast.Call, current: RecordShape | None) -> None:
        w_node = _arg(call, 3, "witness")
        contract = self._maybe_shape(_arg(call, 1, "contract"))
        policy = _policy_of(_arg(call, 2, "policy"))
        binding = None
        if isinstance(w_node, ast.Name):
            binding = self.bindings.get(w_node.id)
        elif isinstance(w_node, ast.Call) and _callee(w_node) == _GATE_CALL:
            binding = self.gate_call(w_node)
        if binding is None:
            return
        problems = []
        if current is not None and fingerprint(current) != binding.producer:
            problems.append("producer fingerprint does not match the builder's current output type")
        if contract is not None and fingerprint(contract) != binding.contract:
            problems.append(f"contract fingerprint does not match sink contract {ast.unparse(_arg(call, 1, 'contract'))}")
        if policy is not None and policy is not binding.policy:
            problems.append(f"witness policy {binding.policy} differs from sink policy {policy}")
        if problems:
            self.emit(
                call,
                "witness",
                f"WitnessMismatch at add_sink: witness from {binding.label} does not bind this sink",
                "\n".join(f"WitnessMismatch: {p}" for p in problems),
            )


def check_source(text: str, filename: str = "<source>") -> list[Diagnostic]:
    """Run the build-stage gate over one module's source text."""
    try:
        tree = ast.parse(text, filename)
    except SyntaxError as exc:
        return [Diagnostic(filename, exc.lineno or 0, exc.offset or 0, "syntax", f"SyntaxError: {exc.msg}")]
    return _Checker(tree, filename).run()


def check_file(path: str | os.PathLike) -> list[Diagnostic]:
    path = Path(path)
    return check_source(path.read_text(encoding="utf-8"), str(path))


def _iter_sources(paths: Iterable[str | os.PathLike]) -> Iterator[Path]:
    for p in map(Path, paths):
        if p.is_dir():
            yield from sorted(p.rglob("*.py"))
        else:
            yield p


def check_paths(paths: Iterable[str | os.PathLike]) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []
    for path in _iter_sources(paths):
        diagnostics.extend(check_file(path))
    return diagnostics
