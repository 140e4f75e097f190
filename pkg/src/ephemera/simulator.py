"""Batch scenario replay with fault-injection sweeps.

Replays run the full pipeline tick by tick (window, infer, build context,
blend) and accumulate the session metrics.  Output files use a canonical
JSON form: sorted keys, floats fixed to six decimal places, so equal values
serialize to equal bytes and diffs stay stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .context_builder import (
    ContextVocabulary,
    EphemeralContext,
    build_context,
    context_from_json,
    context_to_json,
    vocabulary_from_json,
    vocabulary_to_json,
)
from .feature_inference import UserProfile, infer_features
from .recommenders import (
    Catalog,
    HybridWeights,
    MetricsReport,
    RecommendationList,
    RecommenderSpec,
    blend_hybrid,
    metrics_to_json,
    recommendations_from_json,
    recommendations_to_json,
    session_metrics,
    spec_to_json,
    specs_from_json,
    weights_to_json,
)
from .sensor_model import Drop, FaultPlan, Scenario, apply_fault_plan, window_readings


@dataclass(frozen=True)
class TickRecord:
    tick_ts: int
    context: EphemeralContext
    recommendations: RecommendationList


@dataclass(frozen=True)
class SessionTrace:
    records: tuple[TickRecord, ...]
    weights: HybridWeights
    specs: tuple[RecommenderSpec, ...]
    vocab: ContextVocabulary
    seed: int
    top_n: int

    def pairs(self) -> list[tuple[EphemeralContext, RecommendationList]]:
        return [(rec.context, rec.recommendations) for rec in self.records]


def replay(scenario: Scenario,
           catalog: Catalog,
           profile: UserProfile,
           weights: HybridWeights,
           specs: Sequence[RecommenderSpec],
           vocab: ContextVocabulary,
           plan: Optional[FaultPlan] = None,
           seed: int = 0,
           top_n: int = 10,
           history: Sequence[str] = (),
           ) -> tuple[SessionTrace, MetricsReport]:
    """Replay a scenario end to end; deterministic for fixed inputs and seed."""
    if plan is not None:
        scenario = apply_fault_plan(scenario, plan)
    trust = scenario.trust_map()

    records: list[TickRecord] = []
    tick = scenario.tick_seconds
    for tick_ts in range(tick, scenario.duration_seconds + 1, tick):
        window = window_readings(scenario, tick_ts, tick)
        estimates = infer_features(window, profile, tick_ts=tick_ts,
                                   trust=trust, vocab=vocab.values)
        context = build_context(estimates, vocab, tick_ts)
        recommendations = blend_hybrid(specs, weights, estimates, catalog,
                                       n=top_n, tick_ts=tick_ts)
        records.append(TickRecord(tick_ts=tick_ts, context=context,
                                  recommendations=recommendations))

    trace = SessionTrace(records=tuple(records), weights=weights,
                         specs=tuple(specs), vocab=vocab,
                         seed=seed, top_n=top_n)
    report = session_metrics(trace.pairs(), catalog, history=history)
    return trace, report


def dropout_sweep(scenario: Scenario,
                  catalog: Catalog,
                  profile: UserProfile,
                  weights: HybridWeights,
                  specs: Sequence[RecommenderSpec],
                  vocab: ContextVocabulary,
                  seed: int = 0,
                  top_n: int = 10,
                  ) -> dict[str, MetricsReport]:
    """Baseline plus one full-duration single-source drop per source."""
    if not scenario.sources:
        raise ValueError("scenario has no sources")
    reports: dict[str, MetricsReport] = {}
    _, baseline = replay(scenario, catalog, profile, weights, specs, vocab,
                         plan=None, seed=seed, top_n=top_n)
    reports["baseline"] = baseline
    for source in scenario.sources:
        plan = FaultPlan(drops=(Drop(source_id=source.source_id, from_ts=0,
                                     to_ts=scenario.duration_seconds),))
        _, report = replay(scenario, catalog, profile, weights, specs, vocab,
                           plan=plan, seed=seed, top_n=top_n)
        reports[source.source_id] = report
    return reports


# ---------------------------------------------------------------------------
# Canonical JSON

def canonical_json(value, indent: int = 0) -> str:
    """Render JSON with sorted keys and all floats fixed to 6 decimals."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = [f"{inner}{json.dumps(str(k))}: {canonical_json(value[k], indent + 1)}"
                 for k in sorted(value, key=str)]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        parts = [f"{inner}{canonical_json(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    raise TypeError(f"cannot canonicalize {type(value)!r}")


def trace_to_json(trace: SessionTrace) -> dict:
    return {
        "config": {
            "weights": weights_to_json(trace.weights),
            "specs": [spec_to_json(s) for s in trace.specs],
            "vocab": vocabulary_to_json(trace.vocab),
            "seed": trace.seed,
            "top_n": trace.top_n,
        },
        "ticks": [
            {
                "tick_ts": rec.tick_ts,
                "context": context_to_json(rec.context),
                "recommendations": recommendations_to_json(rec.recommendations),
            }
            for rec in trace.records
        ],
    }


def trace_from_json(obj: Mapping) -> SessionTrace:
    config = obj["config"]
    records = tuple(
        TickRecord(
            tick_ts=int(entry["tick_ts"]),
            context=context_from_json(entry["context"]),
            recommendations=recommendations_from_json(entry["recommendations"]),
        )
        for entry in obj["ticks"]
    )
    user_weights = {str(k): float(v)
                    for k, v in config["weights"]["user_weights"].items()}
    return SessionTrace(
        records=records,
        weights=HybridWeights(user_weights=user_weights),
        specs=tuple(specs_from_json(config["specs"])),
        vocab=vocabulary_from_json(config["vocab"]),
        seed=int(config["seed"]),
        top_n=int(config["top_n"]),
    )


def render_trace(trace: SessionTrace) -> str:
    return canonical_json(trace_to_json(trace)) + "\n"


def render_report(report: MetricsReport) -> str:
    return canonical_json(metrics_to_json(report)) + "\n"


def render_sweep(sweep: Mapping[str, MetricsReport]) -> str:
    return canonical_json({name: metrics_to_json(r)
                           for name, r in sweep.items()}) + "\n"


def emit_report(report_or_sweep, path) -> None:
    """Write a metrics report or a sweep to path in canonical form."""
    if isinstance(report_or_sweep, MetricsReport):
        text = render_report(report_or_sweep)
    else:
        text = render_sweep(report_or_sweep)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
