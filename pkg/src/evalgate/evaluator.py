"""Orchestrates metric routing, execution, aggregation, and the gate verdict.

Records route by type: steps to CASCADE, tool calls to TOOL, output events
to DISTRIBUTION (and, when they carry a quality signal, into TOOL's quality
series), attribution cases to EXPLANATION, request pairs to CONSISTENCY.
Dimensions with no input are absent from the report rather than scored zero.
Evaluation is sequential in fixed dimension order, so a given (stream,
config) always produces the same report.

MetricResult.confidence is the filled fraction of the dimension's evaluation
window (calls/window_size for TOOL, fill/capacity for DISTRIBUTION) and 1.0
for the dimensions that evaluate complete supplied units.
"""

from __future__ import annotations

import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

from .cascade import CascadeResult, InsufficientTraceError, evaluate_cascade
from .consistency import EmbeddingProvider, HashEmbeddingProvider, consistency_score
from .distribution import DistributionSnapshot, DistributionWindow, snapshot
from .explanation import ProbeContext, evaluate_explanation
from .model import (
    AttributionCase,
    Dimension,
    EvalConfig,
    EvalReport,
    EvaluationError,
    MetricResult,
    OutputEvent,
    RequestPair,
    StepResult,
    ToolCallRecord,
    TraceParseError,
    TraceRecord,
    ValidationError,
    parse_trace_record,
)
from .reliability import LATENCY_BUCKET_COUNT, bucket_indices, evaluate_reliability
from .stats import UndefinedStatisticError

_DIMENSION_ORDER = (
    Dimension.CASCADE,
    Dimension.TOOL,
    Dimension.DISTRIBUTION,
    Dimension.EXPLANATION,
    Dimension.CONSISTENCY,
)


@dataclass
class StreamDiagnostics:
    """Parse and evaluation problems collected while processing a stream."""

    parse_errors: list[dict[str, Any]] = field(default_factory=list)
    evaluation_notes: list[str] = field(default_factory=list)
    record_counts: dict[str, int] = field(default_factory=dict)


def split_pipelines(steps: Sequence[StepResult]) -> list[list[StepResult]]:
    """Split a flat step stream into pipelines at step_index resets.

    Step indices are strictly increasing within one pipeline, so a
    non-increasing index starts a new one.
    """
    pipelines: list[list[StepResult]] = []
    current: list[StepResult] = []
    for step in steps:
        if current and step.step_index <= current[-1].step_index:
            pipelines.append(current)
            current = []
        current.append(step)
    if current:
        pipelines.append(current)
    return pipelines


def _metric_result(
    dimension: Dimension,
    score: float,
    confidence: float,
    latency_ms: float,
    metadata: dict[str, Any],
    config: EvalConfig,
) -> MetricResult:
    return MetricResult(
        dimension=dimension,
        score=score,
        confidence=confidence,
        latency_ms=latency_ms,
        passed=score >= config.threshold(dimension),
        metadata=metadata,
    )


def _evaluate_cascade_dimension(
    steps: Sequence[StepResult], config: EvalConfig, diagnostics: StreamDiagnostics
) -> tuple[float, float, dict[str, Any]] | None:
    results: list[CascadeResult] = []
    for pipeline in split_pipelines(steps):
        try:
            results.append(evaluate_cascade(pipeline, config))
        except InsufficientTraceError as exc:
            diagnostics.evaluation_notes.append(f"cascade: {exc}")
    if not results:
        return None
    score = sum(r.score for r in results) / len(results)
    worst = min(results, key=lambda r: r.score)
    return score, 1.0, worst.metadata()


def _quality_series_for_calls(
    calls: Sequence[ToolCallRecord], events: Sequence[OutputEvent]
) -> tuple[list[float] | None, float | None]:
    """Bucket quality-carrying events over the calls' tick span.

    Buckets with no quality event inherit the previous bucket's value
    (leading gaps take the first observed value). Returns (series, baseline)
    or (None, None) when no event carries a quality signal.
    """
    tagged = [e for e in events if e.quality_signal is not None]
    if not tagged:
        return None, None
    call_ticks = [c.timestamp for c in calls]
    lo, hi = min(call_ticks), max(call_ticks)
    assignments = bucket_indices(
        [e.timestamp for e in tagged], LATENCY_BUCKET_COUNT, lo=lo, hi=hi
    )
    sums = [0.0] * LATENCY_BUCKET_COUNT
    counts = [0] * LATENCY_BUCKET_COUNT
    for event, b in zip(tagged, assignments):
        sums[b] += event.quality_signal  # type: ignore[operator]
        counts[b] += 1
    means = [sums[b] / counts[b] if counts[b] else None for b in range(LATENCY_BUCKET_COUNT)]
    first_known = next(m for m in means if m is not None)
    series: list[float] = []
    last = first_known
    for mean in means:
        if mean is not None:
            last = mean
        series.append(last)
    return series, first_known


def _evaluate_distribution_dimension(
    events: Sequence[OutputEvent], config: EvalConfig
) -> tuple[float, float, dict[str, Any]]:
    window = DistributionWindow(capacity=config.window_size)
    snapshots: list[DistributionSnapshot] = []
    since_snapshot = 0
    for event in events:
        window.observe(event)
        since_snapshot += 1
        if since_snapshot == config.window_size:
            snapshots.append(snapshot(window, config))
            since_snapshot = 0
    if since_snapshot or not snapshots:
        snapshots.append(snapshot(window, config))
    current = snapshots[-1]
    metadata = current.metadata()
    metadata["windows"] = [
        {"window": i + 1, **snap.metadata(), "score": snap.score}
        for i, snap in enumerate(snapshots)
    ]
    confidence = current.window_fill / config.window_size
    return current.score, confidence, metadata


def _evaluate_explanation_dimension(
    cases: Sequence[AttributionCase],
    probe_context: ProbeContext | None,
    config: EvalConfig,
) -> tuple[float, float, dict[str, Any]]:
    if probe_context is None:
        raise EvaluationError(
            "attribution records present but no probe context supplied; "
            "pass a ProbeContext to evaluate the EXPLANATION dimension"
        )
    results = [
        evaluate_explanation(
            probe_context.probe,
            case,
            probe_context.baseline_values,
            probe_context.original_values,
            config,
        )
        for case in cases
    ]
    score = sum(r.acs for r in results) / len(results)
    worst = min(results, key=lambda r: r.acs)
    return score, 1.0, worst.metadata()


def evaluate_records(
    records: Iterable[TraceRecord],
    config: EvalConfig | None = None,
    probe_context: ProbeContext | None = None,
    embedding_provider: EmbeddingProvider | None = None,
    diagnostics: StreamDiagnostics | None = None,
) -> EvalReport:
    """Evaluate parsed records and return the report.

    Raises EvaluationError when nothing in the stream is evaluable.
    """
    config = config or EvalConfig()
    diagnostics = diagnostics if diagnostics is not None else StreamDiagnostics()
    provider = embedding_provider or HashEmbeddingProvider()

    steps: list[StepResult] = []
    calls: list[ToolCallRecord] = []
    events: list[OutputEvent] = []
    cases: list[AttributionCase] = []
    pairs: list[RequestPair] = []
    for record in records:
        if isinstance(record, StepResult):
            steps.append(record)
        elif isinstance(record, ToolCallRecord):
            calls.append(record)
        elif isinstance(record, OutputEvent):
            events.append(record)
        elif isinstance(record, AttributionCase):
            cases.append(record)
        else:
            pairs.append(record)
    diagnostics.record_counts = {
        "step": len(steps),
        "tool_call": len(calls),
        "output": len(events),
        "attribution": len(cases),
        "request_pair": len(pairs),
    }

    per_dimension: dict[Dimension, MetricResult] = {}
    total_start = time.perf_counter()

    for dimension in _DIMENSION_ORDER:
        start = time.perf_counter()
        outcome: tuple[float, float, dict[str, Any]] | None = None
        try:
            if dimension is Dimension.CASCADE and steps:
                outcome = _evaluate_cascade_dimension(steps, config, diagnostics)
            elif dimension is Dimension.TOOL and calls:
                quality, baseline = _quality_series_for_calls(calls, events)
                result = evaluate_reliability(calls, quality, baseline, config)
                if result.rho_fallback is not None:
                    diagnostics.evaluation_notes.append(f"tool: {result.rho_fallback}")
                confidence = min(1.0, len(calls) / config.window_size)
                outcome = result.score, confidence, result.metadata()
            elif dimension is Dimension.DISTRIBUTION and events:
                outcome = _evaluate_distribution_dimension(events, config)
            elif dimension is Dimension.EXPLANATION and cases:
                outcome = _evaluate_explanation_dimension(cases, probe_context, config)
            elif dimension is Dimension.CONSISTENCY and pairs:
                result = consistency_score(pairs, provider, config)
                outcome = result.score, 1.0, result.metadata()
        except UndefinedStatisticError as exc:
            diagnostics.evaluation_notes.append(f"{dimension.value.lower()}: {exc}")
        if outcome is None:
            continue
        score, confidence, metadata = outcome
        latency_ms = (time.perf_counter() - start) * 1000.0
        per_dimension[dimension] = _metric_result(
            dimension, score, confidence, latency_ms, metadata, config
        )

    if not per_dimension:
        raise EvaluationError("no evaluable records")

    overall_score, passed = aggregate(per_dimension, config)
    return EvalReport(
        per_dimension=per_dimension,
        overall_score=overall_score,
        passed=passed,
        total_latency_ms=(time.perf_counter() - total_start) * 1000.0,
    )


def evaluate_stream(
    lines: Iterable[str],
    config: EvalConfig | None = None,
    probe_context: ProbeContext | None = None,
    embedding_provider: EmbeddingProvider | None = None,
) -> tuple[EvalReport, StreamDiagnostics]:
    """Parse a line stream and evaluate whatever parses cleanly.

    Parse failures are collected per line in the diagnostics; a stream with
    records but none parseable raises EvaluationError.
    """
    diagnostics = StreamDiagnostics()
    records: list[TraceRecord] = []
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            records.append(parse_trace_record(stripped, number))
        except (TraceParseError, ValidationError) as exc:
            diagnostics.parse_errors.append({"line": number, "message": str(exc)})
    if not records and diagnostics.parse_errors:
        raise EvaluationError(
            f"no evaluable records: all {len(diagnostics.parse_errors)} line(s) failed "
            f"to parse (first: {diagnostics.parse_errors[0]['message']})"
        )
    report = evaluate_records(
        records,
        config,
        probe_context=probe_context,
        embedding_provider=embedding_provider,
        diagnostics=diagnostics,
    )
    return report, diagnostics


def aggregate(
    results: dict[Dimension, MetricResult], config: EvalConfig | None = None
) -> tuple[float, bool]:
    """Weight-normalized mean over present dimensions; gate is their conjunction."""
    if not results:
        raise EvaluationError("cannot aggregate zero dimension results")
    config = config or EvalConfig()
    total_weight = sum(config.weight(d) for d in results)
    if total_weight > 0:
        overall = sum(config.weight(d) * r.score for d, r in results.items()) / total_weight
    else:
        overall = sum(r.score for r in results.values()) / len(results)
    return overall, all(r.passed for r in results.values())
