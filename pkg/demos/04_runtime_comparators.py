"""
Runtime comparators
===================

Validation against a contract next to the common ad hoc equality checks.
The ad hoc checks pass cases that the policy-aware check reports.
"""

from shapegate import (
    ArrayType,
    Atomic,
    Policy,
    PrimitiveKind,
    RecordType,
    RuntimeField,
    RuntimeSchema,
    baseline_ignore_case_and_nullability,
    baseline_structurally,
    validate,
)
from shapegate.bench import BenchConfig, bench_runtime, render_markdown


def schema(*fields):
    return RuntimeSchema(RecordType(fields))


contract = schema(
    RuntimeField("id", Atomic(PrimitiveKind.INT64)),
    RuntimeField("tags", ArrayType(Atomic(PrimitiveKind.STRING), False)),
)
actual = schema(
    RuntimeField("id", Atomic(PrimitiveKind.INT64)),
    RuntimeField("tags", ArrayType(Atomic(PrimitiveKind.STRING), True)),
)

print("ignore case and nulls:", baseline_ignore_case_and_nullability(actual, contract))
print("structural:", baseline_structurally(actual, contract))
print("exact:", validate(actual, contract, Policy.EXACT).render())

# a short timing run; use `shapegate bench` for the full suite
result = bench_runtime(BenchConfig(measured_iterations=5, warmup_iterations=1))
print(render_markdown(result))
