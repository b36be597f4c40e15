"""Policy-driven conformance between a producer shape and a contract shape.

One engine serves both layers: the static gate calls :func:`conforms` on
shapes derived from declared types, and runtime validation calls it on
shapes recovered from the actual data schema.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .shapes import (
    ELEMENT,
    MAP_VALUE,
    FieldSeg,
    FieldShape,
    MappingShape,
    OptionalShape,
    PositionSeg,
    PrimitiveShape,
    RecordShape,
    SequenceShape,
    ShapeNode,
    describe,
    fingerprint,
    render_path,
)

__all__ = [
    "SchemaPolicy",
    "Policy",
    "DriftKind",
    "DriftItem",
    "DriftReport",
    "Witness",
    "fold_name",
    "conforms",
    "drift_items",
]


class SchemaPolicy(Enum):
    EXACT = "exact"
    EXACT_UNORDERED_CI = "exact-unordered-ci"
    EXACT_ORDERED = "exact-ordered"
    EXACT_ORDERED_CI = "exact-ordered-ci"
    EXACT_BY_POSITION = "exact-by-position"
    BACKWARD = "backward"
    FORWARD = "forward"
    FULL = "full"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str | SchemaPolicy) -> SchemaPolicy:
        """Accept a CLI token (``exact-ordered``), a member name or a
        CamelCase name (``ExactOrdered``)."""
        if isinstance(name, SchemaPolicy):
            return name
        token = name.strip()
        for policy in cls:
            camel = "".join(part.capitalize() for part in policy.name.split("_"))
            if token in (policy.value, policy.name, camel) or token.lower() == camel.lower():
                return policy
        raise ValueError(
            f"unknown policy {name!r}; valid policies: " + ", ".join(p.value for p in cls)
        )


Policy = SchemaPolicy


class DriftKind(Enum):
    MISSING_FIELD = "MissingField"
    EXTRA_FIELD = "ExtraField"
    NAME_MISMATCH = "NameMismatch"
    ARITY_MISMATCH = "ArityMismatch"
    SHAPE_MISMATCH = "ShapeMismatch"
    NESTED_OPTIONALITY_MISMATCH = "NestedOptionalityMismatch"
    DUPLICATE_FOLDED_NAME = "DuplicateFoldedName"

    def __str__(self) -> str:
        return self.value


_KIND_ORDER = {kind: i for i, kind in enumerate(DriftKind)}


@dataclass(frozen=True)
class DriftItem:
    kind: DriftKind
    path: tuple
    expected: str
    actual: str
    message: str = ""

    def __post_init__(self) -> None:
        if not self.message:
            object.__setattr__(
                self,
                "message",
                f"{self.kind} at {self.rendered_path or '<root>'}: "
                f"expected {self.expected}, actual {self.actual}",
            )

    @property
    def rendered_path(self) -> str:
        return render_path(self.path)

    def sort_key(self) -> tuple:
        return (self.rendered_path, _KIND_ORDER[self.kind], self.expected, self.actual)

    def to_dict(self) -> dict[str, str]:
        return {
            "kind": self.kind.value,
            "path": self.rendered_path,
            "expected": self.expected,
            "actual": self.actual,
            "message": self.message,
        }


@dataclass(frozen=True)
class DriftReport:
    """Every structural mismatch found for one producer/contract pair."""

    policy: SchemaPolicy
    items: tuple[DriftItem, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.items:
            raise ValueError("a drift report needs at least one item")
        object.__setattr__(self, "items", tuple(sorted(self.items, key=DriftItem.sort_key)))

    def __bool__(self) -> bool:
        return True

    def kinds(self) -> set[DriftKind]:
        return {item.kind for item in self.items}

    def paths(self) -> list[str]:
        return [item.rendered_path for item in self.items]

    def render(self) -> str:
        return "\n".join(item.message for item in self.items)

    def to_dict(self) -> dict[str, Any]:
        return {"policy": self.policy.value, "items": [i.to_dict() for i in self.items]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DriftReport":
        # paths come back as rendered text; a single FieldSeg keeps them printable
        items = []
        for raw in data["items"]:
            path = (FieldSeg(raw["path"]),) if raw["path"] else ()
            items.append(
                DriftItem(DriftKind(raw["kind"]), path, raw["expected"], raw["actual"], raw["message"])
            )
        return cls(SchemaPolicy.parse(data["policy"]), tuple(items))


_MINT = object()


class Witness:
    """Proof that a producer shape conforms to a contract shape under a policy.

    Only :func:`conforms` creates witnesses; sinks re-check the fingerprints
    when the witness is presented.
    """

    __slots__ = ("producer_fingerprint", "contract_fingerprint", "policy")

    def __init__(self, producer_fingerprint: int, contract_fingerprint: int, policy: SchemaPolicy, *, _token=None):
        if _token is not _MINT:
            raise TypeError("witnesses are minted by conforms() or the static gate only")
        object.__setattr__(self, "producer_fingerprint", producer_fingerprint)
        object.__setattr__(self, "contract_fingerprint", contract_fingerprint)
        object.__setattr__(self, "policy", policy)

    def __setattr__(self, name, value):
        raise AttributeError("Witness is immutable")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Witness):
            return NotImplemented
        return (
            self.producer_fingerprint == other.producer_fingerprint
            and self.contract_fingerprint == other.contract_fingerprint
            and self.policy is other.policy
        )

    def __hash__(self) -> int:
        return hash((self.producer_fingerprint, self.contract_fingerprint, self.policy))

    def __bool__(self) -> bool:
        return True

    def __repr__(self) -> str:
        return (
            f"Witness(producer={self.producer_fingerprint:016x}, "
            f"contract={self.contract_fingerprint:016x}, policy={self.policy.value})"
        )


def fold_name(name: str) -> str:
    """Locale-independent simple case folding."""
    return name.lower()


def _field_text(f: FieldShape) -> str:
    text = describe(f.shape)
    if f.is_optional:
        text += " nullable"
    if f.has_default:
        text += " default"
    return text


# Paths are built as linked tuples (parent, tag[, value]) while walking and
# only turned into segment tuples when a drift item is recorded.
_ELEM, _MAPV, _FIELD, _POS = 0, 1, 2, 3


def _segments(link: tuple) -> tuple:
    out = []
    while link:
        tag = link[1]
        if tag == _FIELD:
            out.append(FieldSeg(link[2]))
        elif tag == _POS:
            out.append(PositionSeg(link[2]))
        elif tag == _ELEM:
            out.append(ELEMENT)
        else:
            out.append(MAP_VALUE)
        link = link[0]
    out.reverse()
    return tuple(out)


class _Walker:
    def __init__(self, policy: SchemaPolicy) -> None:
        self.policy = policy
        self.items: list[DriftItem] = []

    def add(self, kind: DriftKind, path: tuple, expected: str, actual: str) -> None:
        self.items.append(DriftItem(kind, _segments(path), expected, actual))

    def compare(self, p: ShapeNode, c: ShapeNode, path: tuple) -> None:
        if isinstance(p, RecordShape) and isinstance(c, RecordShape):
            self.record(p, c, path)
        elif isinstance(p, PrimitiveShape) and isinstance(c, PrimitiveShape):
            if p.kind is not c.kind:
                self.add(DriftKind.SHAPE_MISMATCH, path, describe(c), describe(p))
        elif isinstance(p, SequenceShape) and isinstance(c, SequenceShape):
            self.slot(p.element, c.element, (path, _ELEM))
        elif isinstance(p, MappingShape) and isinstance(c, MappingShape):
            if p.key is not c.key:
                self.add(DriftKind.SHAPE_MISMATCH, path, describe(c), describe(p))
            self.slot(p.value, c.value, (path, _MAPV))
        else:
            self.add(DriftKind.SHAPE_MISMATCH, path, describe(c), describe(p))

    def slot(self, p: ShapeNode, c: ShapeNode, path: tuple) -> None:
        p_opt = isinstance(p, OptionalShape)
        c_opt = isinstance(c, OptionalShape)
        if p_opt != c_opt:
            self.add(DriftKind.NESTED_OPTIONALITY_MISMATCH, path, describe(c), describe(p))
        self.compare(p.inner if p_opt else p, c.inner if c_opt else c, path)

    def record(self, p: RecordShape, c: RecordShape, path: tuple) -> None:
        policy = self.policy
        if policy in (SchemaPolicy.EXACT, SchemaPolicy.EXACT_UNORDERED_CI):
            self.unordered_ci(p, c, path)
        elif policy is SchemaPolicy.EXACT_ORDERED:
            self.ordered(p, c, path, fold=False)
        elif policy is SchemaPolicy.EXACT_ORDERED_CI:
            self.ordered(p, c, path, fold=True)
        elif policy is SchemaPolicy.EXACT_BY_POSITION:
            self.by_position(p, c, path)
        elif policy is SchemaPolicy.BACKWARD:
            self.backward(p, c, path)
        elif policy is SchemaPolicy.FORWARD:
            self.forward(p, c, path)

    def _duplicates(self, rec: RecordShape, side: str, path: tuple) -> bool:
        groups: dict[str, list[str]] = defaultdict(list)
        for f in rec.fields:
            groups[fold_name(f.name)].append(f.name)
        found = False
        for names in groups.values():
            if len(names) > 1:
                found = True
                listed = ", ".join(repr(n) for n in names)
                for repeat in names[1:]:
                    self.add(
                        DriftKind.DUPLICATE_FOLDED_NAME,
                        (path, _FIELD, repeat),
                        "unique case-insensitive names",
                        f"{side} fields {listed}",
                    )
        return found

    def unordered_ci(self, p: RecordShape, c: RecordShape, path: tuple) -> None:
        dup_p = self._duplicates(p, "producer", path)
        dup_c = self._duplicates(c, "contract", path)
        if dup_p or dup_c:
            return
        by_name = {fold_name(f.name): f for f in p.fields}
        matched = set()
        for cf in c.fields:
            key = fold_name(cf.name)
            pf = by_name.get(key)
            if pf is None:
                self.add(DriftKind.MISSING_FIELD, (path, _FIELD, cf.name), _field_text(cf), "absent")
            else:
                matched.add(key)
                self.compare(pf.shape, cf.shape, (path, _FIELD, cf.name))
        for pf in p.fields:
            if fold_name(pf.name) not in matched:
                self.add(DriftKind.EXTRA_FIELD, (path, _FIELD, pf.name), "absent", _field_text(pf))

    def _arity(self, p: RecordShape, c: RecordShape, path: tuple) -> bool:
        if len(p.fields) != len(c.fields):
            self.add(
                DriftKind.ARITY_MISMATCH,
                path,
                f"{len(c.fields)} fields",
                f"{len(p.fields)} fields",
            )
            return False
        return True

    def ordered(self, p: RecordShape, c: RecordShape, path: tuple, fold: bool) -> None:
        if not self._arity(p, c, path):
            return
        for i, (pf, cf) in enumerate(zip(p.fields, c.fields)):
            same = fold_name(pf.name) == fold_name(cf.name) if fold else pf.name == cf.name
            if same:
                sub = (path, _FIELD, cf.name)
            else:
                sub = (path, _POS, i)
                self.add(DriftKind.NAME_MISMATCH, sub, cf.name, pf.name)
            self.compare(pf.shape, cf.shape, sub)

    def by_position(self, p: RecordShape, c: RecordShape, path: tuple) -> None:
        if not self._arity(p, c, path):
            return
        for i, (pf, cf) in enumerate(zip(p.fields, c.fields)):
            self.compare(pf.shape, cf.shape, (path, _POS, i))

    def backward(self, p: RecordShape, c: RecordShape, path: tuple) -> None:
        by_name = {f.name: f for f in p.fields}
        for cf in c.fields:
            pf = by_name.get(cf.name)
            if pf is not None:
                self.compare(pf.shape, cf.shape, (path, _FIELD, cf.name))
            elif not (cf.is_optional or cf.has_default):
                self.add(DriftKind.MISSING_FIELD, (path, _FIELD, cf.name), _field_text(cf), "absent")

    def forward(self, p: RecordShape, c: RecordShape, path: tuple) -> None:
        by_name = {f.name: f for f in c.fields}
        for pf in p.fields:
            cf = by_name.get(pf.name)
            if cf is None:
                self.add(DriftKind.EXTRA_FIELD, (path, _FIELD, pf.name), "absent", _field_text(pf))
            else:
                self.compare(pf.shape, cf.shape, (path, _FIELD, pf.name))


def drift_items(producer: RecordShape, contract: RecordShape, policy: SchemaPolicy) -> list[DriftItem]:
    """All drift between two canonical records, unsorted; empty when they conform."""
    if policy is SchemaPolicy.FULL:
        return []
    walker = _Walker(policy)
    walker.compare(producer, contract, ())
    return walker.items


def conforms(producer: RecordShape, contract: RecordShape, policy: SchemaPolicy) -> Witness | DriftReport:
    """Check ``producer`` against ``contract`` under ``policy``.

    Returns a :class:`Witness` binding both fingerprints and the policy, or a
    :class:`DriftReport` listing every mismatch. Inputs must be canonical.
    """
    policy = SchemaPolicy.parse(policy)
    items = drift_items(producer, contract, policy)
    if items:
        return DriftReport(policy, tuple(items))
    return Witness(fingerprint(producer), fingerprint(contract), policy, _token=_MINT)

