"""Core domain types: trace records, metric results, reports, configuration.

Trace records arrive as a line-delimited JSON stream, one record per line,
discriminated by a ``type`` field. All domain types are immutable value
objects. Timestamps are integer ticks supplied by the trace; the engine
never reads a wall clock while evaluating, so replays are deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union


class ValidationError(ValueError):
    """A record or configuration value violates a domain invariant."""


class TraceParseError(ValueError):
    """A trace line could not be parsed into a record."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EvaluationError(RuntimeError):
    """A metric could not be evaluated (probe failure, missing dependency)."""


class ToolCallState(str, Enum):
    SUCCESS = "SUCCESS"
    PARTIAL = "PARTIAL"
    FAILED = "FAILED"


class Dimension(str, Enum):
    CASCADE = "CASCADE"
    TOOL = "TOOL"
    DISTRIBUTION = "DISTRIBUTION"
    EXPLANATION = "EXPLANATION"
    CONSISTENCY = "CONSISTENCY"


def _require_unit(name: str, value: float) -> float:
    value = _require_real(name, value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must be in [0, 1], got {value}")
    return value


def _require_real(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True, slots=True)
class StepResult:
    """One pipeline step with its self-reported confidence."""

    step_index: int
    step_name: str
    confidence: float

    def __post_init__(self) -> None:
        if isinstance(self.step_index, bool) or not isinstance(self.step_index, int):
            raise ValidationError("step_index must be an integer")
        if self.step_index < 1:
            raise ValidationError(f"step_index must be >= 1, got {self.step_index}")
        if not isinstance(self.step_name, str):
            raise ValidationError("step_name must be a string")
        object.__setattr__(self, "confidence", _require_unit("confidence", self.confidence))


@dataclass(frozen=True, slots=True)
class ToolCallRecord:
    """One tool invocation outcome. PARTIAL means schema-valid but incomplete."""

    tool_name: str
    state: ToolCallState
    latency_ms: float
    timestamp: int

    def __post_init__(self) -> None:
        if not isinstance(self.tool_name, str):
            raise ValidationError("tool_name must be a string")
        if not isinstance(self.state, ToolCallState):
            raise ValidationError(f"state must be one of {[s.value for s in ToolCallState]}")
        latency = _require_real("latency_ms", self.latency_ms)
        if latency < 0:
            raise ValidationError(f"latency_ms must be >= 0, got {latency}")
        object.__setattr__(self, "latency_ms", latency)
        if isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int):
            raise ValidationError("timestamp must be an integer tick")


@dataclass(frozen=True, slots=True)
class OutputEvent:
    """One categorized output, optionally tagged with an external quality signal."""

    category: str
    session_id: str
    timestamp: int
    quality_signal: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.category, str) or not self.category:
            raise ValidationError("category must be a non-empty string")
        if not isinstance(self.session_id, str):
            raise ValidationError("session_id must be a string")
        if isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int):
            raise ValidationError("timestamp must be an integer tick")
        if self.quality_signal is not None:
            object.__setattr__(
                self, "quality_signal", _require_unit("quality_signal", self.quality_signal)
            )


@dataclass(frozen=True, slots=True)
class AttributionCase:
    """A decision's claimed feature attribution, ranked by descending weight."""

    feature_names: tuple[str, ...]
    claimed_weights: tuple[float, ...]
    decision_value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        weights = tuple(_require_real("claimed_weights", w) for w in self.claimed_weights)
        object.__setattr__(self, "claimed_weights", weights)
        if len(self.feature_names) != len(weights):
            raise ValidationError("feature_names and claimed_weights must have equal length")
        if len(weights) < 2:
            raise ValidationError("an attribution case needs at least 2 features")
        if any(not isinstance(f, str) or not f for f in self.feature_names):
            raise ValidationError("feature_names must be non-empty strings")
        if any(w < 0 for w in weights):
            raise ValidationError("claimed_weights must be >= 0")
        if any(a < b for a, b in zip(weights, weights[1:])):
            raise ValidationError("claimed_weights must be non-increasing")
        object.__setattr__(self, "decision_value", _require_real("decision_value", self.decision_value))


@dataclass(frozen=True, slots=True)
class RequestPair:
    """Two surface forms of one request, with the decision each received."""

    text_a: str
    text_b: str
    decision_a: str
    decision_b: str

    def __post_init__(self) -> None:
        for name in ("text_a", "text_b", "decision_a", "decision_b"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValidationError(f"{name} must be a non-empty string")


TraceRecord = Union[StepResult, ToolCallRecord, OutputEvent, AttributionCase, RequestPair]


@dataclass(frozen=True, slots=True)
class MetricResult:
    """One dimension's normalized score plus its gate verdict and sub-signals."""

    dimension: Dimension
    score: float
    confidence: float
    latency_ms: float
    passed: bool
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "score", _require_unit("score", self.score))
        object.__setattr__(self, "confidence", _require_unit("confidence", self.confidence))


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Per-dimension results, the aggregate score, and the gate verdict."""

    per_dimension: dict[Dimension, MetricResult]
    overall_score: float
    passed: bool
    total_latency_ms: float


DIMENSION_KEYS = tuple(d.value.lower() for d in Dimension)


@dataclass(frozen=True)
class EvalConfig:
    """Every threshold and weight the engine consumes.

    ``lambda_`` is spelled ``lambda`` in config files. ``dimension_thresholds``
    and ``aggregate_weights`` are keyed by lowercase dimension name.
    """

    tau_u: float = 0.5
    lambda_: float = 0.5
    alpha: float = 0.5
    beta: float = 0.25
    gamma: float = 0.25
    k_top: int = 20
    window_size: int = 100
    theta_acs: float = 0.5
    delta_min: float = 0.05
    theta_ar: float = 0.9
    theta_prr: float = 0.20
    acc_stability_band: float = 0.02
    acc_delta_cumulative: bool = False
    dimension_thresholds: dict[str, float] = field(
        default_factory=lambda: {k: 0.6 for k in DIMENSION_KEYS}
    )
    aggregate_weights: dict[str, float] = field(
        default_factory=lambda: {k: 1.0 for k in DIMENSION_KEYS}
    )

    def __post_init__(self) -> None:
        for name in ("tau_u", "theta_acs", "delta_min", "theta_ar", "theta_prr",
                     "acc_stability_band", "alpha", "beta", "gamma"):
            _require_unit(name, getattr(self, name))
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-9:
            raise ValidationError(
                f"alpha + beta + gamma must equal 1, got {self.alpha + self.beta + self.gamma}"
            )
        if _require_real("lambda", self.lambda_) < 0:
            raise ValidationError("lambda must be >= 0")
        if not isinstance(self.k_top, int) or self.k_top < 1:
            raise ValidationError("k_top must be an integer >= 1")
        if not isinstance(self.window_size, int) or self.window_size < 1:
            raise ValidationError("window_size must be an integer >= 1")
        for key, value in self.dimension_thresholds.items():
            if key not in DIMENSION_KEYS:
                raise ValidationError(f"unknown dimension in thresholds: {key!r}")
            _require_unit(f"dimension_thresholds[{key}]", value)
        total = 0.0
        for key, value in self.aggregate_weights.items():
            if key not in DIMENSION_KEYS:
                raise ValidationError(f"unknown dimension in weights: {key!r}")
            if _require_real(f"aggregate_weights[{key}]", value) < 0:
                raise ValidationError(f"aggregate_weights[{key}] must be >= 0")
            total += value
        if total <= 0:
            raise ValidationError("aggregate_weights must sum to a positive value")

    def threshold(self, dimension: Dimension) -> float:
        return self.dimension_thresholds.get(dimension.value.lower(), 0.6)

    def weight(self, dimension: Dimension) -> float:
        return self.aggregate_weights.get(dimension.value.lower(), 1.0)

    def to_payload(self) -> dict[str, Any]:
        return {
            "tau_u": self.tau_u,
            "lambda": self.lambda_,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "k_top": self.k_top,
            "window_size": self.window_size,
            "theta_acs": self.theta_acs,
            "delta_min": self.delta_min,
            "theta_ar": self.theta_ar,
            "theta_prr": self.theta_prr,
            "acc_stability_band": self.acc_stability_band,
            "acc_delta_cumulative": self.acc_delta_cumulative,
            "dimension_thresholds": {k: self.dimension_thresholds.get(k, 0.6) for k in DIMENSION_KEYS},
            "aggregate_weights": {k: self.aggregate_weights.get(k, 1.0) for k in DIMENSION_KEYS},
        }


# Wire schema: required/optional fields per record type. Unknown fields such
# as "reasoning" or "context" are accepted and ignored; unknown types are not.
_RECORD_FIELDS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "step": (("step_index", "step_name", "confidence"), ()),
    "tool_call": (("tool_name", "state", "latency_ms", "timestamp"), ()),
    "output": (("category", "session_id", "timestamp"), ("quality_signal",)),
    "attribution": (("feature_names", "claimed_weights", "decision_value"), ()),
    "request_pair": (("text_a", "text_b", "decision_a", "decision_b"), ()),
}


def parse_trace_record(line: str, line_number: int | None = None) -> TraceRecord:
    """Parse one trace line into its record type.

    Raises TraceParseError for malformed JSON, unknown types, or missing
    fields, and ValidationError (with line context) for invariant violations.
    """
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"invalid JSON: {exc.msg}", line_number) from exc
    if not isinstance(payload, dict):
        raise TraceParseError("record must be a JSON object", line_number)
    record_type = payload.get("type")
    if record_type not in _RECORD_FIELDS:
        raise TraceParseError(f"unknown record type: {record_type!r}", line_number)
    required, _ = _RECORD_FIELDS[record_type]
    for name in required:
        if name not in payload:
            raise TraceParseError(f"{record_type} record missing field {name!r}", line_number)
    try:
        if record_type == "step":
            return StepResult(
                step_index=payload["step_index"],
                step_name=payload["step_name"],
                confidence=payload["confidence"],
            )
        if record_type == "tool_call":
            state_raw = payload["state"]
            try:
                state = ToolCallState(state_raw)
            except ValueError:
                raise ValidationError(
                    f"state must be one of {[s.value for s in ToolCallState]}, got {state_raw!r}"
                ) from None
            return ToolCallRecord(
                tool_name=payload["tool_name"],
                state=state,
                latency_ms=payload["latency_ms"],
                timestamp=payload["timestamp"],
            )
        if record_type == "output":
            return OutputEvent(
                category=payload["category"],
                session_id=payload["session_id"],
                timestamp=payload["timestamp"],
                quality_signal=payload.get("quality_signal"),
            )
        if record_type == "attribution":
            names = payload["feature_names"]
            weights = payload["claimed_weights"]
            if not isinstance(names, list) or not isinstance(weights, list):
                raise ValidationError("feature_names and claimed_weights must be lists")
            return AttributionCase(
                feature_names=tuple(names),
                claimed_weights=tuple(weights),
                decision_value=payload["decision_value"],
            )
        return RequestPair(
            text_a=payload["text_a"],
            text_b=payload["text_b"],
            decision_a=payload["decision_a"],
            decision_b=payload["decision_b"],
        )
    except ValidationError as exc:
        if line_number is not None:
            raise ValidationError(f"line {line_number}: {exc}") from exc
        raise


def serialize_trace_record(record: TraceRecord) -> str:
    """Serialize a record to its one-line wire form. Round-trips via parse."""
    if isinstance(record, StepResult):
        payload: dict[str, Any] = {
            "type": "step",
            "step_index": record.step_index,
            "step_name": record.step_name,
            "confidence": record.confidence,
        }
    elif isinstance(record, ToolCallRecord):
        payload = {
            "type": "tool_call",
            "tool_name": record.tool_name,
            "state": record.state.value,
            "latency_ms": record.latency_ms,
            "timestamp": record.timestamp,
        }
    elif isinstance(record, OutputEvent):
        payload = {
            "type": "output",
            "category": record.category,
            "session_id": record.session_id,
            "timestamp": record.timestamp,
        }
        if record.quality_signal is not None:
            payload["quality_signal"] = record.quality_signal
    elif isinstance(record, AttributionCase):
        payload = {
            "type": "attribution",
            "feature_names": list(record.feature_names),
            "claimed_weights": list(record.claimed_weights),
            "decision_value": record.decision_value,
        }
    elif isinstance(record, RequestPair):
        payload = {
            "type": "request_pair",
            "text_a": record.text_a,
            "text_b": record.text_b,
            "decision_a": record.decision_a,
            "decision_b": record.decision_b,
        }
    else:
        raise TypeError(f"not a trace record: {type(record).__name__}")
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)
