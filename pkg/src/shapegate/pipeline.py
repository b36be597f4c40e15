"""Typed pipeline builder that fuses the static witness with the runtime pin.

Builders are immutable; every method returns a new builder. The legal order
is ``new_pipeline() -> source -> (transform | add_sink)* -> run``. Calls out
of order raise :class:`BuilderStateError`, and the build-stage gate reports
them for literal ``new_pipeline()`` chains before anything runs.

At run time each transform's output is pinned against its declared shape
with the unordered case-insensitive comparator, and each sink re-validates
the actual schema under its own policy before a single byte is written.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Union

from .dataset import Dataset, read_jsonl, read_jsonl_path, write_jsonl
from .errors import BuilderStateError, WitnessMismatch
from .gate import shape_for
from .policy import DriftReport, SchemaPolicy, Witness
from .schema import RuntimeSchema, schema_for, validate
from .shapes import RecordShape, fingerprint

__all__ = [
    "Phase",
    "PipelineBuilder",
    "SourceStage",
    "TransformStage",
    "SinkStage",
    "StageOutcome",
    "SinkOutcome",
    "RunReport",
    "new_pipeline",
    "run",
]

Reader = Union[str, os.PathLike, Dataset, Callable[[], Dataset], Any]
Writer = Union[str, os.PathLike, Callable[[Dataset], int], Any]

MID_PIPELINE_POLICY = SchemaPolicy.EXACT


class Phase(Enum):
    EMPTY = "empty"
    HAS_SOURCE = "has-source"


@dataclass(frozen=True)
class SourceStage:
    reader: Reader
    declared_shape: RecordShape


@dataclass(frozen=True)
class TransformStage:
    fn: Callable[[Dataset], Dataset]
    declared_out_shape: RecordShape
    pin_schema: RuntimeSchema


@dataclass(frozen=True)
class SinkStage:
    writer: Writer
    contract_shape: RecordShape
    contract_schema: RuntimeSchema
    policy: SchemaPolicy
    witness: Witness


Stage = Union[SourceStage, TransformStage, SinkStage]


@dataclass
class StageOutcome:
    index: int
    kind: str
    status: str
    rows: int = 0
    drift: DriftReport | None = None
    error: str | None = None


@dataclass
class SinkOutcome:
    index: int
    status: str
    rows_written: int = 0
    drift: DriftReport | None = None
    error: str | None = None
    actual_schema: RuntimeSchema | None = None


@dataclass
class RunReport:
    status: str
    stages: list[StageOutcome] = field(default_factory=list)
    sinks: list[SinkOutcome] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def summary(self) -> str:
        lines = [f"run: {self.status}"]
        for s in self.stages:
            lines.append(f"  stage {s.index} {s.kind}: {s.status} ({s.rows} rows)")
            if s.drift is not None:
                lines.extend("    " + line for line in s.drift.render().splitlines())
            if s.error:
                lines.append(f"    {s.error}")
        for k in self.sinks:
            lines.append(f"  sink {k.index}: {k.status} ({k.rows_written} rows written)")
            if k.drift is not None:
                lines.extend("    " + line for line in k.drift.render().splitlines())
            if k.error:
                lines.append(f"    {k.error}")
        return "\n".join(lines)


def _read(reader: Reader) -> Dataset:
    if isinstance(reader, Dataset):
        return reader
    if isinstance(reader, (str, os.PathLike)):
        return read_jsonl_path(reader)
    if hasattr(reader, "read"):
        return read_jsonl(reader)
    if callable(reader):
        return reader()
    raise TypeError(f"unsupported reader {reader!r}")


def _write(writer: Writer, data: Dataset) -> int:
    if isinstance(writer, (str, os.PathLike)):
        with open(writer, "wb") as fh:
            return write_jsonl(data, fh)
    if hasattr(writer, "write"):
        return write_jsonl(data, writer)
    if callable(writer):
        return int(writer(data))
    raise TypeError(f"unsupported writer {writer!r}")


@dataclass(frozen=True)
class PipelineBuilder:
    phase: Phase = Phase.EMPTY
    current_out_shape: RecordShape | None = None
    stages: tuple[Stage, ...] = ()

    def _require_source(self, method: str) -> None:
        if self.phase is not Phase.HAS_SOURCE:
            raise BuilderStateError(f"{method}() needs a source; call source() first")

    def source(self, reader: Reader, shape: Any) -> "PipelineBuilder":
        """Attach the single source; ``shape`` is the declared record type."""
        if self.phase is not Phase.EMPTY:
            raise BuilderStateError("source() may be called once, on an empty builder")
        declared = shape_for(shape)
        return PipelineBuilder(Phase.HAS_SOURCE, declared, self.stages + (SourceStage(reader, declared),))

    def transform(self, fn: Callable[[Dataset], Dataset], shape: Any) -> "PipelineBuilder":
        self._require_source("transform")
        declared = shape_for(shape)
        stage = TransformStage(fn, declared, schema_for(declared))
        return replace(self, current_out_shape=declared, stages=self.stages + (stage,))

    def add_sink(self, writer: Writer, contract: Any, policy: SchemaPolicy | str, witness: Witness) -> "PipelineBuilder":
        """Attach a sink guarded by ``witness``.

        The witness must bind the builder's current output shape, this
        contract and this policy; anything else raises :class:`WitnessMismatch`.
        """
        self._require_source("add_sink")
        policy = SchemaPolicy.parse(policy)
        contract_shape = shape_for(contract)
        if not isinstance(witness, Witness):
            raise WitnessMismatch(f"add_sink requires a Witness, got {type(witness).__name__}")
        assert self.current_out_shape is not None
        problems = []
        if witness.producer_fingerprint != fingerprint(self.current_out_shape):
            problems.append("producer fingerprint does not match the builder's current output shape")
        if witness.contract_fingerprint != fingerprint(contract_shape):
            problems.append("contract fingerprint does not match the sink contract")
        if witness.policy is not policy:
            problems.append(f"witness policy {witness.policy} differs from sink policy {policy}")
        if problems:
            raise WitnessMismatch("WitnessMismatch at add_sink: " + "; ".join(problems))
        stage = SinkStage(writer, contract_shape, schema_for(contract_shape), policy, witness)
        return replace(self, stages=self.stages + (stage,))

    def run(self) -> RunReport:
        return run(self)


def new_pipeline() -> PipelineBuilder:
    return PipelineBuilder()


def run(builder: PipelineBuilder) -> RunReport:
    """Execute the pipeline and report per-stage and per-sink outcomes.

    A failed source or transform pin aborts the run and nothing is written.
    Each sink is pinned independently; a sink whose pin fails writes nothing
    while the remaining sinks still run.
    """
    sinks = [s for s in builder.stages if isinstance(s, SinkStage)]
    if builder.phase is not Phase.HAS_SOURCE or not sinks:
        raise BuilderStateError("run() needs a source and at least one sink")

    report = RunReport(status="ok")
    data: Dataset | None = None
    sink_index = 0
    for index, stage in enumerate(builder.stages):
        if isinstance(stage, SourceStage):
            try:
                data = _read(stage.reader)
            except Exception as exc:  # captured into the report
                report.stages.append(StageOutcome(index, "source", "error", error=f"{type(exc).__name__}: {exc}"))
                return _abort(report, len(sinks))
            report.stages.append(StageOutcome(index, "source", "ok", rows=len(data)))
        elif isinstance(stage, TransformStage):
            assert data is not None
            try:
                data = stage.fn(data)
            except Exception as exc:
                report.stages.append(StageOutcome(index, "transform", "error", error=f"{type(exc).__name__}: {exc}"))
                return _abort(report, len(sinks))
            drift = validate(data.schema, stage.pin_schema, MID_PIPELINE_POLICY)
            if drift is not None:
                report.stages.append(StageOutcome(index, "transform", "drift", rows=len(data), drift=drift))
                return _abort(report, len(sinks))
            report.stages.append(StageOutcome(index, "transform", "ok", rows=len(data)))
        else:
            assert data is not None
            outcome = SinkOutcome(sink_index, "written", actual_schema=data.schema)
            sink_index += 1
            outcome.drift = validate(data.schema, stage.contract_schema, stage.policy)
            if outcome.drift is not None:
                outcome.status = "drift"
            else:
                try:
                    outcome.rows_written = _write(stage.writer, data)
                except Exception as exc:
                    outcome.status = "error"
                    outcome.error = f"{type(exc).__name__}: {exc}"
            report.sinks.append(outcome)
    statuses = {s.status for s in report.sinks}
    if "error" in statuses:
        report.status = "error"
    elif "drift" in statuses:
        report.status = "drift"
    return report


def _abort(report: RunReport, sink_count: int) -> RunReport:
    report.status = "aborted"
    report.sinks = [SinkOutcome(i, "skipped") for i in range(sink_count)]
    return report
