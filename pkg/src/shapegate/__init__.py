"""Structural schema contracts checked at build time and at the sink boundary.

The same contract type drives two checks. The static gate proves that a
declared producer type conforms to a contract type under a policy and mints
a :class:`Witness`. The pipeline builder demands that witness when a sink is
attached, then re-validates the actual data schema before writing.
"""

from .dataset import Dataset, infer_schema, read_jsonl, read_jsonl_path, write_jsonl, write_jsonl_path
from .errors import (
    BuilderStateError,
    GateError,
    InferenceError,
    ParseError,
    SchemaDriftError,
    ShapeError,
    ShapegateError,
    WitnessMismatch,
)
from .gate import (
    Int32,
    Int64,
    Diagnostic,
    TypeDescriptor,
    check_file,
    check_paths,
    check_source,
    derive_shape,
    descriptor_of,
    shape_for,
    static_assert_conforms,
)
from .pipeline import PipelineBuilder, RunReport, new_pipeline, run
from .policy import DriftItem, DriftKind, DriftReport, Policy, SchemaPolicy, Witness, conforms, fold_name
from .schema import (
    ArrayType,
    Atomic,
    MapType,
    RecordType,
    RuntimeField,
    RuntimeSchema,
    assert_valid,
    baseline_ignore_case_and_nullability,
    baseline_structurally,
    baseline_structurally_by_name,
    load_schema,
    parse_schema,
    schema_for,
    serialize_schema,
    shape_of,
    validate,
)
from .shapes import (
    FieldShape,
    MappingShape,
    OptionalShape,
    PrimitiveKind,
    PrimitiveShape,
    RecordShape,
    SequenceShape,
    canonicalize,
    fingerprint,
    render_path,
)

__version__ = "0.1.0"
