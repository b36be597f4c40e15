"""Benchmark harness: build-stage gate overhead and runtime comparator cost.

Published reference snapshots are printed next to measured values for
context only. They come from other machines and are not targets.
"""

from __future__ import annotations

import json
import keyword
import platform
import py_compile
import random
import statistics
import string
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

from .gate import check_paths
from .gate.descriptors import (
    FieldDescriptor,
    MapRef,
    OptionalRef,
    PrimRef,
    RecordRef,
    SeqRef,
    TypeDescriptor,
    TypeRef,
    derive_shape,
)
from .policy import SchemaPolicy
from .schema import (
    RuntimeSchema,
    baseline_ignore_case_and_nullability,
    baseline_structurally,
    schema_for,
    validate,
)
from .shapes import PrimitiveKind

__all__ = [
    "BenchConfig",
    "BenchResult",
    "gen_schema_pair",
    "pair_source",
    "bench_compile",
    "bench_runtime",
    "render_markdown",
    "REFERENCE_COMPILE",
    "REFERENCE_RUNTIME",
]

# pairs -> (local arm64 s, local %, hosted x86_64 s, hosted %)
REFERENCE_COMPILE = {
    10: (0.270, 11.8, 0.847, 12.6),
    25: (0.397, 13.5, 1.000, 11.1),
    50: (0.513, 13.9, 1.880, 16.6),
}
# benchmark -> (local arm64 ns, hosted x86_64 ns)
REFERENCE_RUNTIME = {
    "By-position": (116.82, 180.55),
    "Unordered exact": (4736.41, 8149.74),
    "Baseline ignore-case": (278.92, 331.42),
    "Baseline structural": (332.13, 380.36),
}
REFERENCE_RATIO_BAND = (17.0, 25.0)


@dataclass(frozen=True)
class BenchConfig:
    pair_counts: tuple[int, ...] = (10, 25, 50)
    schema_width: int = 8
    nesting_depth: int = 2
    warmup_iterations: int = 3
    measured_iterations: int = 15
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "pair_counts", tuple(self.pair_counts))
        values = list(self.pair_counts) + [
            self.schema_width,
            self.nesting_depth,
            self.warmup_iterations,
            self.measured_iterations,
        ]
        if not self.pair_counts or any(not isinstance(v, int) or v <= 0 for v in values):
            raise ValueError(f"benchmark configuration values must be positive integers: {self}")


@dataclass
class BenchResult:
    suite: str
    config: dict[str, Any]
    environment: dict[str, str]
    rows: list[dict[str, Any]]
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


def environment() -> dict[str, str]:
    return {
        "os": platform.system(),
        "release": platform.release(),
        "architecture": platform.machine(),
        "python": platform.python_version(),
        "implementation": platform.python_implementation(),
    }


# -- synthetic schemas -------------------------------------------------------------


def _name(rng: random.Random, taken: set[str]) -> str:
    while True:
        n = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(6, 10)))
        if n not in taken and not keyword.iskeyword(n):
            taken.add(n)
            return n


def _prim(rng: random.Random) -> PrimRef:
    return PrimRef(rng.choice(list(PrimitiveKind)))


def _maybe_optional(rng: random.Random, ref: TypeRef) -> TypeRef:
    return OptionalRef(ref) if rng.random() < 0.5 else ref


def _gen_record(rng: random.Random, width: int, level: int, depth: int, tag: str) -> TypeDescriptor:
    specials = ["seq", "map"]
    if level < depth:
        specials.insert(0, "record")
    kinds = specials[:width] + ["prim"] * max(0, width - len(specials))
    rng.shuffle(kinds)
    taken: set[str] = set()
    fields = []
    for kind in kinds:
        name = _name(rng, taken)
        if kind == "record":
            ref: TypeRef = RecordRef(_gen_record(rng, width, level + 1, depth, tag))
        elif kind == "seq":
            ref = SeqRef(_maybe_optional(rng, _prim(rng)))
        elif kind == "map":
            key = PrimRef(rng.choice([PrimitiveKind.STRING, PrimitiveKind.INT64, PrimitiveKind.INT32]))
            ref = MapRef(key, _maybe_optional(rng, _prim(rng)))
        else:
            ref = _prim(rng)
        if kind != "record" and rng.random() < 0.25:
            ref = OptionalRef(ref)
        fields.append(FieldDescriptor(name, ref, has_default=rng.random() < 0.2))
    return TypeDescriptor(f"{tag}L{level}", tuple(fields))


def _recase(rng: random.Random, desc: TypeDescriptor, tag: str) -> TypeDescriptor:
    def ref(r: TypeRef) -> TypeRef:
        if isinstance(r, RecordRef):
            return RecordRef(_recase(rng, r.descriptor, tag))
        return r

    fields = []
    for f in desc.fields:
        name = "".join(c.upper() if rng.random() < 0.3 else c for c in f.name)
        if keyword.iskeyword(name):
            name = f.name
        fields.append(FieldDescriptor(name, ref(f.type), f.has_default))
    level = desc.name.rsplit("L", 1)[1]
    return TypeDescriptor(f"{tag}L{level}", tuple(fields))


def gen_schema_pair(seed: int, width: int = 8, depth: int = 2) -> tuple[TypeDescriptor, TypeDescriptor]:
    """A deterministic producer/contract pair that conforms under Exact.

    Every record has one sequence field, one map field and, above the
    deepest level, one nested record; the remaining fields are primitives.
    The contract repeats the producer in the same order with some name
    letters upper-cased.
    """
    rng = random.Random(f"shapegate-bench-{seed}")
    producer = _gen_record(rng, width, 1, depth, f"Producer{seed}")
    contract = _recase(rng, producer, f"Contract{seed}")
    return producer, contract


_ANNOTATIONS = {
    PrimitiveKind.BOOLEAN: "bool",
    PrimitiveKind.INT32: "Int32",
    PrimitiveKind.INT64: "int",
    PrimitiveKind.FLOAT64: "float",
    PrimitiveKind.STRING: "str",
    PrimitiveKind.BINARY: "bytes",
    PrimitiveKind.DATE: "date",
    PrimitiveKind.TIMESTAMP: "datetime",
}


def _annotation(ref: TypeRef) -> str:
    if isinstance(ref, PrimRef):
        return _ANNOTATIONS[ref.kind]
    if isinstance(ref, OptionalRef):
        return f"Optional[{_annotation(ref.inner)}]"
    if isinstance(ref, SeqRef):
        return f"list[{_annotation(ref.element)}]"
    if isinstance(ref, MapRef):
        return f"dict[{_annotation(ref.key)}, {_annotation(ref.value)}]"
    if isinstance(ref, RecordRef):
        return ref.descriptor.name
    raise TypeError(ref)


def _default(ref: TypeRef) -> str:
    if isinstance(ref, OptionalRef):
        return "None"
    if isinstance(ref, SeqRef):
        return "field(default_factory=list)"
    if isinstance(ref, MapRef):
        return "field(default_factory=dict)"
    if isinstance(ref, RecordRef):
        return f"field(default_factory={ref.descriptor.name})"
    return {
        "bool": "False",
        "Int32": "0",
        "int": "0",
        "float": "0.0",
        "str": '""',
        "bytes": 'b""',
        "date": "date(1970, 1, 1)",
        "datetime": "datetime(1970, 1, 1)",
    }[_annotation(ref)]


def _nested(ref: TypeRef):
    if isinstance(ref, RecordRef):
        yield ref.descriptor
    elif isinstance(ref, OptionalRef):
        yield from _nested(ref.inner)
    elif isinstance(ref, SeqRef):
        yield from _nested(ref.element)
    elif isinstance(ref, MapRef):
        yield from _nested(ref.value)


def _emit_class(desc: TypeDescriptor, out: list[str]) -> None:
    for f in desc.fields:
        for nested in _nested(f.type):
            _emit_class(nested, out)
    out.append("@dataclass(kw_only=True)")
    out.append(f"class {desc.name}:")
    if not desc.fields:
        out.append("    pass")
    for f in desc.fields:
        line = f"    {f.name}: {_annotation(f.type)}"
        if f.has_default:
            line += f" = {_default(f.type)}"
        out.append(line)
    out.append("")
    out.append("")


def pair_source(producer: TypeDescriptor, contract: TypeDescriptor, policy: SchemaPolicy = SchemaPolicy.EXACT) -> str:
    """Python module text declaring both types and gating the pair."""
    out = [
        "from dataclasses import dataclass, field",
        "from datetime import date, datetime",
        "from typing import Optional",
        "",
        "from shapegate import Int32, Policy, static_assert_conforms",
        "",
        "",
    ]
    _emit_class(producer, out)
    _emit_class(contract, out)
    out.append(f"WITNESS = static_assert_conforms({producer.name}, {contract.name}, Policy.{policy.name})")
    return "\n".join(out) + "\n"


# -- compile suite ----------------------------------------------------------------------


def _write_corpus(directory: Path, count: int, config: BenchConfig) -> list[Path]:
    paths = []
    for i in range(count):
        producer, contract = gen_schema_pair(config.seed + i, config.schema_width, config.nesting_depth)
        path = directory / f"pair_{i:03d}.py"
        path.write_text(pair_source(producer, contract), encoding="utf-8")
        paths.append(path)
    return paths


def build_corpus(paths: list[Path], gate: bool) -> None:
    """Byte-compile every file; with ``gate`` also run the build-stage gate."""
    for p in paths:
        py_compile.compile(str(p), doraise=True)
    if gate:
        diagnostics = check_paths(paths)
        if diagnostics:
            raise RuntimeError("gate rejected the benchmark corpus:\n" + "\n".join(d.render() for d in diagnostics))


def _timed_clean_build(count: int, config: BenchConfig, gate: bool) -> float:
    with tempfile.TemporaryDirectory(prefix="shapegate-bench-") as tmp:
        paths = _write_corpus(Path(tmp), count, config)
        start = time.perf_counter()
        build_corpus(paths, gate)
        return time.perf_counter() - start


def bench_compile(config: BenchConfig = BenchConfig()) -> BenchResult:
    rows = []
    for count in config.pair_counts:
        for _ in range(config.warmup_iterations):
            _timed_clean_build(count, config, gate=True)
        without, with_gate = [], []
        for rep in range(config.measured_iterations):
            # alternate order so drift in machine state hits both sides
            order = (False, True) if rep % 2 == 0 else (True, False)
            for gate in order:
                (with_gate if gate else without).append(_timed_clean_build(count, config, gate))
        base = statistics.median(without)
        gated = statistics.median(with_gate)
        delta = gated - base
        rows.append(
            {
                "pairs": count,
                "without_gate_s": base,
                "with_gate_s": gated,
                "delta_s": delta,
                "delta_pct": 100.0 * delta / base if base > 0 else float("nan"),
                "without_gate_std_s": statistics.stdev(without) if len(without) > 1 else 0.0,
                "with_gate_std_s": statistics.stdev(with_gate) if len(with_gate) > 1 else 0.0,
            }
        )
    notes = [
        f"clean build per measurement (fresh temporary directory); {config.measured_iterations} "
        f"repetitions per side, {config.warmup_iterations} warmup builds; median reported",
        "build = byte-compile every generated module; gate = build plus the source-level static gate",
    ]
    deltas = [r["delta_s"] for r in rows]
    if any(b <= a for a, b in zip(deltas, deltas[1:])):
        notes.append("flag: delta did not grow monotonically with pair count in this run")
    return BenchResult("compile", _config_dict(config), environment(), rows, notes)


# -- runtime suite ----------------------------------------------------------------------


def _schemas(config: BenchConfig, count: int = 8) -> list[tuple[RuntimeSchema, RuntimeSchema]]:
    out = []
    for i in range(count):
        p, c = gen_schema_pair(config.seed + i, config.schema_width, config.nesting_depth)
        out.append((schema_for(derive_shape(p)), schema_for(derive_shape(c))))
    return out


def _comparators() -> dict[str, Callable[[RuntimeSchema, RuntimeSchema], object]]:
    return {
        "By-position": lambda a, b: validate(a, b, SchemaPolicy.EXACT_BY_POSITION),
        "Unordered exact": lambda a, b: validate(a, b, SchemaPolicy.EXACT),
        "Baseline ignore-case": baseline_ignore_case_and_nullability,
        "Baseline structural": baseline_structurally,
    }


def _batch(fn, pairs, loops: int) -> int:
    start = time.perf_counter_ns()
    for _ in range(loops):
        for a, b in pairs:
            fn(a, b)
    return time.perf_counter_ns() - start


def _time_comparator(fn, pairs, config: BenchConfig) -> dict[str, float]:
    loops = 1
    # size each batch above 1 ms so timer resolution is negligible
    while _batch(fn, pairs, loops) < 1_000_000:
        loops *= 2
    for _ in range(config.warmup_iterations):
        _batch(fn, pairs, loops)
    per_op = [_batch(fn, pairs, loops) / (loops * len(pairs)) for _ in range(config.measured_iterations)]
    return {
        "mean_ns": statistics.fmean(per_op),
        "median_ns": statistics.median(per_op),
        "std_ns": statistics.stdev(per_op) if len(per_op) > 1 else 0.0,
        "ops_per_batch": loops * len(pairs),
        "batches": len(per_op),
    }


def bench_runtime(config: BenchConfig = BenchConfig()) -> BenchResult:
    pairs = _schemas(config)
    for a, b in pairs:
        # the corpus must be green for every comparator, or we would time report building
        assert validate(a, b, SchemaPolicy.EXACT) is None
        assert validate(a, b, SchemaPolicy.EXACT_BY_POSITION) is None
        assert baseline_ignore_case_and_nullability(a, b) and baseline_structurally(a, b)
    rows = []
    for name, fn in _comparators().items():
        stats = _time_comparator(fn, pairs, config)
        rows.append({"benchmark": name, **stats})
    by_name = {r["benchmark"]: r for r in rows}
    ratio = by_name["Unordered exact"]["mean_ns"] / by_name["Baseline ignore-case"]["mean_ns"]
    notes = [
        f"unordered exact / baseline ignore-case = {ratio:.2f}x "
        f"(published reference band {REFERENCE_RATIO_BAND[0]:.0f}-{REFERENCE_RATIO_BAND[1]:.0f}x)",
        f"{len(pairs)} schema pairs, width {config.schema_width}, depth {config.nesting_depth}; "
        f"monotonic clock, batches above 1 ms, {config.warmup_iterations} warmup and "
        f"{config.measured_iterations} measured batches",
    ]
    result = BenchResult("runtime", _config_dict(config), environment(), rows, notes)
    result.config["ratio_unordered_over_ignore_case"] = ratio
    return result


def _config_dict(config: BenchConfig) -> dict[str, Any]:
    d = asdict(config)
    d["pair_counts"] = list(config.pair_counts)
    return d


# -- reporting --------------------------------------------------------------------------


def render_markdown(result: BenchResult) -> str:
    env = result.environment
    lines = [f"Environment: {env['os']} {env['architecture']}, Python {env['python']}", ""]
    if result.suite == "compile":
        lines += [
            "**Compile-time overhead**",
            "",
            "| Pairs | This run (s) | This run (%) | Ref local arm64 (s) | Ref local arm64 (%) | Ref Ubuntu x86_64 (s) | Ref Ubuntu x86_64 (%) |",
            "|---:|---:|---:|---:|---:|---:|---:|",
        ]
        for row in result.rows:
            ref = REFERENCE_COMPILE.get(row["pairs"])
            ref_cells = [f"{ref[0]:.3f}", f"{ref[1]:.1f}", f"{ref[2]:.3f}", f"{ref[3]:.1f}"] if ref else ["n/a"] * 4
            lines.append(
                f"| {row['pairs']} | {row['delta_s']:+.3f} | {row['delta_pct']:.1f} | " + " | ".join(ref_cells) + " |"
            )
    else:
        lines += [
            "**Runtime comparator averages**",
            "",
            "| Benchmark | This run (ns) | Std (ns) | Median (ns) | Ref local arm64 (ns) | Ref Ubuntu x86_64 (ns) |",
            "|---|---:|---:|---:|---:|---:|",
        ]
        for row in result.rows:
            ref = REFERENCE_RUNTIME[row["benchmark"]]
            lines.append(
                f"| {row['benchmark']} | {row['mean_ns']:.2f} | {row['std_ns']:.2f} | {row['median_ns']:.2f} "
                f"| {ref[0]:.2f} | {ref[1]:.2f} |"
            )
    lines.append("")
    lines.append("Reference columns are published snapshots from other machines, shown for context only.")
    lines += [f"- {note}" for note in result.notes]
    return "\n".join(lines) + "\n"

