"""Deterministic producer/contract pair universe used by the equivalence tests.

Records reach depth 3 and width 3. Leaves are int64 and string, combined
through field optionality, sequences, maps and optional elements/values.
Pairs come from four families: every pair of small records, every
single-step mutation of every base record (both directions), seeded
two-step mutations, and a case-folding duplicate family.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from shapegate.shapes import (
    INT64,
    STRING,
    FieldShape,
    MappingShape,
    OptionalShape,
    PrimitiveKind,
    RecordShape,
    SequenceShape,
)

S = PrimitiveKind.STRING
I = PrimitiveKind.INT64

LEAVES = (
    INT64,
    STRING,
    SequenceShape(INT64),
    SequenceShape(OptionalShape(INT64)),
    MappingShape(S, STRING),
    MappingShape(S, OptionalShape(STRING)),
)
ALTERNATIVES = (INT64, STRING, SequenceShape(STRING), MappingShape(I, INT64))
FLAGS = ((False, False), (True, False), (False, True))  # (is_optional, has_default)
NAMES = ("id", "name")


def field(name, shape, optional=False, default=False):
    return FieldShape(name, shape, has_default=default, is_optional=optional)


def small_records():
    out = [RecordShape(())]
    slots = [(leaf, o, d) for leaf in LEAVES for o, d in FLAGS]
    for name in NAMES:
        out.extend(RecordShape((field(name, s, o, d),)) for s, o, d in slots)
    for a, b in itertools.permutations(NAMES, 2):
        for (s1, o1, d1), (s2, o2, d2) in itertools.product(slots, repeat=2):
            out.append(RecordShape((field(a, s1, o1, d1), field(b, s2, o2, d2))))
    return out


CONTAINERS = ("direct", "seq", "seq?", "map", "map?")


def _contain(kind, rec):
    if kind == "direct":
        return rec
    if kind == "seq":
        return SequenceShape(rec)
    if kind == "seq?":
        return SequenceShape(OptionalShape(rec))
    if kind == "map":
        return MappingShape(S, rec)
    return MappingShape(S, OptionalShape(rec))


def deep_records():
    """Depth-3 records: root -> middle -> leaf record through every container."""
    out = []
    sibling_leaves = (INT64, SequenceShape(OptionalShape(STRING)), MappingShape(S, OptionalShape(INT64)))
    for outer, inner in itertools.product(CONTAINERS, repeat=2):
        for leaf in sibling_leaves:
            bottom = RecordShape((field("v", INT64), field("tags", leaf, optional=leaf is INT64)))
            middle = RecordShape((field("name", STRING, optional=True), field("items", _contain(inner, bottom))))
            root = RecordShape((field("id", INT64), field("inner", _contain(outer, middle)), field("note", STRING, default=True)))
            out.append(root)
    return out


def duplicate_records():
    out = []
    for shapes in itertools.product((INT64, STRING), repeat=2):
        out.append(RecordShape((field("id", shapes[0]), field("ID", shapes[1]))))
        out.append(RecordShape((field("id", shapes[0]), field("Id", shapes[1]), field("ID", INT64))))
    return out


# -- mutations ----------------------------------------------------------------------


def _fresh(fields):
    taken = {f.name.lower() for f in fields}
    return next(n for n in ("extra", "more", "other", "x1", "x2", "x3") if n not in taken)


def _toggle_slot(node):
    return node.inner if isinstance(node, OptionalShape) else OptionalShape(node)


def _record_in(shape):
    """(inner record, rebuild) when shape holds a record, directly or in a container slot."""
    if isinstance(shape, RecordShape):
        return shape, lambda r: r
    if isinstance(shape, SequenceShape):
        el = shape.element
        if isinstance(el, OptionalShape) and isinstance(el.inner, RecordShape):
            return el.inner, lambda r: SequenceShape(OptionalShape(r))
        if isinstance(el, RecordShape):
            return el, lambda r: SequenceShape(r)
    if isinstance(shape, MappingShape):
        v = shape.value
        if isinstance(v, OptionalShape) and isinstance(v.inner, RecordShape):
            return v.inner, lambda r: MappingShape(shape.key, OptionalShape(r))
        if isinstance(v, RecordShape):
            return v, lambda r: MappingShape(shape.key, r)
    return None, None


def _shape_mutations(shape):
    if isinstance(shape, SequenceShape):
        yield SequenceShape(_toggle_slot(shape.element))
    if isinstance(shape, MappingShape):
        yield MappingShape(shape.key, _toggle_slot(shape.value))
        yield MappingShape(I if shape.key is S else S, shape.value)
    inner, rebuild = _record_in(shape)
    if inner is not None:
        for m in mutations(inner):
            yield rebuild(m)
        return
    for alt in ALTERNATIVES:
        if alt != shape:
            yield alt


def mutations(rec):
    """Every single-step mutation of a record, at any depth."""
    fields = list(rec.fields)

    def with_field(i, f):
        return RecordShape(tuple(fields[:i] + [f] + fields[i + 1 :]))

    for i, f in enumerate(fields):
        yield with_field(i, FieldShape(f.name, f.shape, f.has_default, not f.is_optional))
        yield with_field(i, FieldShape(f.name, f.shape, not f.has_default, f.is_optional))
        for shape in _shape_mutations(f.shape):
            yield with_field(i, FieldShape(f.name, shape, f.has_default, f.is_optional))
        recased = f.name.upper() if f.name != f.name.upper() else f.name.lower()
        if recased not in {g.name for g in fields}:
            yield with_field(i, FieldShape(recased, f.shape, f.has_default, f.is_optional))
        yield with_field(i, FieldShape(_fresh(fields), f.shape, f.has_default, f.is_optional))
        yield RecordShape(tuple(fields[:i] + fields[i + 1 :]))
    if len(fields) < 3:
        name = _fresh(fields)
        for optional, default in FLAGS:
            yield RecordShape(tuple(fields) + (field(name, INT64, optional, default),))
    for i in range(len(fields) - 1):
        swapped = fields[:i] + [fields[i + 1], fields[i]] + fields[i + 2 :]
        yield RecordShape(tuple(swapped))


def _width_ok(shape):
    if isinstance(shape, RecordShape):
        return len(shape.fields) <= 3 and all(_width_ok(f.shape) for f in shape.fields)
    inner, _ = _record_in(shape)
    return inner is None or _width_ok(inner)


@lru_cache(maxsize=1)
def pairs():
    """The full pair corpus, deduplicated, in a fixed order."""
    seen = {}

    def add(p, c):
        if _width_ok(p) and _width_ok(c):
            seen.setdefault((p, c), None)

    small = small_records()
    narrow = [r for r in small if len(r.fields) <= 1]
    for p, c in itertools.product(narrow, repeat=2):
        add(p, c)
    bases = small + deep_records()
    for base in bases:
        add(base, base)
        for m in mutations(base):
            add(base, m)
            add(m, base)
    rng = random.Random(20240601)
    for base in rng.choices(bases, k=1500):
        first = list(mutations(base))
        m1 = rng.choice(first)
        m2 = rng.choice(list(mutations(m1)))
        add(base, m2)
        add(m2, base)
    dups = duplicate_records()
    others = narrow[:12] + deep_records()[:3]
    for d in dups:
        for o in dups + others:
            add(d, o)
            add(o, d)
    return list(seen)


def shapes():
    """Every distinct record appearing in the corpus."""
    out = {}
    for p, c in pairs():
        out.setdefault(p, None)
        out.setdefault(c, None)
    return list(out)


def strip_nested_optional(shape):
    if isinstance(shape, OptionalShape):
        return strip_nested_optional(shape.inner)
    if isinstance(shape, SequenceShape):
        return SequenceShape(strip_nested_optional(shape.element))
    if isinstance(shape, MappingShape):
        return MappingShape(shape.key, strip_nested_optional(shape.value))
    if isinstance(shape, RecordShape):
        return RecordShape(
            tuple(FieldShape(f.name, strip_nested_optional(f.shape), f.has_default, f.is_optional) for f in shape.fields)
        )
    return shape


def nested_only_pairs():
    """Pairs whose only difference is element/value optionality somewhere."""
    return [(p, c) for p, c in pairs() if p != c and strip_nested_optional(p) == strip_nested_optional(c)]
