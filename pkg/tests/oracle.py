"""Naive reference checker for the eight policies.

Written directly from the policy definitions, on its own plain-tuple model,
without importing any comparison helper from the library. It only reads the
library's shape objects to convert them.

Node forms:
    ("prim", kind) | ("opt", node) | ("seq", node) | ("map", key, node)
    ("rec", [(name, node, has_default, is_optional), ...])
"""

from __future__ import annotations


def to_plain(shape):
    cls = type(shape).__name__
    if cls == "PrimitiveShape":
        return ("prim", str(shape.kind.value))
    if cls == "OptionalShape":
        return ("opt", to_plain(shape.inner))
    if cls == "SequenceShape":
        return ("seq", to_plain(shape.element))
    if cls == "MappingShape":
        return ("map", str(shape.key.value), to_plain(shape.value))
    if cls == "RecordShape":
        return ("rec", [(f.name, to_plain(f.shape), f.has_default, f.is_optional) for f in shape.fields])
    raise TypeError(cls)


def _join(path, name):
    if path == "":
        return name
    return path + "." + name


class Oracle:
    def __init__(self, policy):
        self.policy = policy
        self.found = set()

    def report(self, kind, path):
        self.found.add((kind, path))

    def node(self, p, c, path):
        if p[0] == "rec" and c[0] == "rec":
            self.record(p[1], c[1], path)
            return
        if p[0] != c[0]:
            self.report("ShapeMismatch", path)
            return
        if p[0] == "prim":
            if p[1] != c[1]:
                self.report("ShapeMismatch", path)
        elif p[0] == "seq":
            self.inner(p[1], c[1], path + "[]")
        elif p[0] == "map":
            if p[1] != c[1]:
                self.report("ShapeMismatch", path)
            self.inner(p[2], c[2], path + "{value}")
        else:
            raise AssertionError(p)

    def inner(self, p, c, path):
        p_wrapped = p[0] == "opt"
        c_wrapped = c[0] == "opt"
        if p_wrapped != c_wrapped:
            self.report("NestedOptionalityMismatch", path)
        if p_wrapped:
            p = p[1]
        if c_wrapped:
            c = c[1]
        self.node(p, c, path)

    def record(self, pf, cf, path):
        pol = self.policy
        if pol in ("exact", "exact-unordered-ci"):
            self.unordered(pf, cf, path)
        elif pol == "exact-ordered":
            self.ordered(pf, cf, path, lambda a, b: a == b)
        elif pol == "exact-ordered-ci":
            self.ordered(pf, cf, path, lambda a, b: a.lower() == b.lower())
        elif pol == "exact-by-position":
            if len(pf) != len(cf):
                self.report("ArityMismatch", path)
                return
            for i in range(len(pf)):
                self.node(pf[i][1], cf[i][1], path + "#" + str(i))
        elif pol == "backward":
            for cname, cnode, cdefault, coptional in cf:
                hit = [x for x in pf if x[0] == cname]
                if hit:
                    self.node(hit[0][1], cnode, _join(path, cname))
                elif not coptional and not cdefault:
                    self.report("MissingField", _join(path, cname))
        elif pol == "forward":
            for pname, pnode, _, _ in pf:
                hit = [x for x in cf if x[0] == pname]
                if hit:
                    self.node(pnode, hit[0][1], _join(path, pname))
                else:
                    self.report("ExtraField", _join(path, pname))
        else:
            raise AssertionError(pol)

    def unordered(self, pf, cf, path):
        dup = False
        for fields in (pf, cf):
            seen = set()
            for f in fields:
                low = f[0].lower()
                if low in seen:
                    dup = True
                    self.report("DuplicateFoldedName", _join(path, f[0]))
                seen.add(low)
        if dup:
            return
        for cname, cnode, _, _ in cf:
            hit = [x for x in pf if x[0].lower() == cname.lower()]
            if hit:
                self.node(hit[0][1], cnode, _join(path, cname))
            else:
                self.report("MissingField", _join(path, cname))
        for pname, _, _, _ in pf:
            if not any(x[0].lower() == pname.lower() for x in cf):
                self.report("ExtraField", _join(path, pname))

    def ordered(self, pf, cf, path, same):
        if len(pf) != len(cf):
            self.report("ArityMismatch", path)
            return
        for i in range(len(pf)):
            if same(pf[i][0], cf[i][0]):
                sub = _join(path, cf[i][0])
            else:
                sub = path + "#" + str(i)
                self.report("NameMismatch", sub)
            self.node(pf[i][1], cf[i][1], sub)


def check(producer, contract, policy):
    """Return the set of (kind, rendered path) drift findings; empty means conformant."""
    if policy == "full":
        return set()
    oracle = Oracle(policy)
    oracle.node(to_plain(producer), to_plain(contract), "")
    return oracle.found
