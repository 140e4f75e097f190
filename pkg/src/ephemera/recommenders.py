"""Individual recommenders, hybrid blending, and session metrics.

Each individual recommender watches a subset of the eight features and
scores tracks by their tagged affinity to the current feature values.  The
hybrid blend weights every active recommender by the user's preference times
the reliability of its features (product of fused confidences) and omits any
recommender whose features are conflicted or missing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .context_builder import EphemeralContext
from .feature_inference import FEATURE_ORDER, FeatureEstimate, FeatureKind, Status


@dataclass(frozen=True)
class Track:
    track_id: str
    title: str
    artist: str
    affinities: Mapping[str, float]  # "feature=value" -> fit in [0, 1]

    def __post_init__(self):
        for key, value in self.affinities.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"track {self.track_id}: affinity {key}={value} "
                                 f"outside [0, 1]")


@dataclass(frozen=True)
class Catalog:
    tracks: tuple[Track, ...]

    def __post_init__(self):
        ids = [t.track_id for t in self.tracks]
        if len(set(ids)) != len(ids):
            raise ValueError("catalog: duplicate track_id")

    def __len__(self) -> int:
        return len(self.tracks)


@dataclass(frozen=True)
class RecommenderSpec:
    rec_id: str
    features: frozenset[FeatureKind]

    def __post_init__(self):
        if not self.features:
            raise ValueError(f"recommender {self.rec_id}: empty feature set")


@dataclass(frozen=True)
class HybridWeights:
    user_weights: Mapping[str, float]

    def __post_init__(self):
        positive = False
        for rec_id, w in self.user_weights.items():
            if not math.isfinite(w):
                raise ValueError(f"weight for {rec_id} is not finite")
            if w < 0:
                raise ValueError(f"weight for {rec_id} is negative")
            positive = positive or w > 0
        if not positive:
            raise ValueError("at least one weight must be > 0")


@dataclass(frozen=True)
class RecommendationList:
    tick_ts: int
    entries: tuple[tuple[str, float], ...]  # (track_id, score), best first
    active_rec_ids: tuple[str, ...]


@dataclass(frozen=True)
class StatusCounts:
    ok: int = 0
    conflict: int = 0
    missing: int = 0


@dataclass(frozen=True)
class MetricsReport:
    ticks: int
    distinct_contexts: int
    availability: float
    mean_consecutive_jaccard: float
    catalog_coverage: float
    mean_novelty: float
    per_feature_status_counts: Mapping[FeatureKind, StatusCounts] = field(default_factory=dict)


# Exploratory survey over 103 listeners: 97 pick music by mood, 92 by
# activity, 38 by ambience (mapped to weather and time of day), 32 by
# location (mapped to location and social).  Speed and physical state ride
# the activity rate.  Kept as exact rationals so weight ratios stay exact.
SURVEY_TOTAL = 103
SURVEY_COUNTS: dict[FeatureKind, int] = {
    FeatureKind.MOOD: 97,
    FeatureKind.ACTIVITY: 92,
    FeatureKind.SPEED: 92,
    FeatureKind.PHYSICAL_STATE: 92,
    FeatureKind.WEATHER: 38,
    FeatureKind.TIME_OF_DAY: 38,
    FeatureKind.LOCATION: 32,
    FeatureKind.SOCIAL: 32,
}


def default_specs() -> list[RecommenderSpec]:
    """One singleton recommender per feature plus the ambience triple."""
    specs = [RecommenderSpec(rec_id=f"rec_{f.value}", features=frozenset({f}))
             for f in FEATURE_ORDER]
    specs.append(RecommenderSpec(
        rec_id="rec_ambience",
        features=frozenset({FeatureKind.LOCATION, FeatureKind.WEATHER,
                            FeatureKind.TIME_OF_DAY})))
    return specs


def default_weights_from_survey(specs: Sequence[RecommenderSpec]) -> HybridWeights:
    """Weight each recommender by the mean survey rate of its features."""
    weights: dict[str, float] = {}
    for spec in specs:
        rates = [Fraction(SURVEY_COUNTS[f], SURVEY_TOTAL) for f in spec.features]
        weights[spec.rec_id] = sum(rates) / len(rates)
    return HybridWeights(user_weights=weights)


def _affinity_mean(features: frozenset[FeatureKind],
                   values: Mapping[FeatureKind, str],
                   track: Track) -> float:
    total = 0.0
    for feature in features:
        total += track.affinities.get(f"{feature.value}={values[feature]}", 0.0)
    return total / len(features)


def score_individual(spec: RecommenderSpec,
                     context: EphemeralContext,
                     track: Track) -> float:
    """Mean affinity of the track to the spec's current feature values."""
    values: dict[FeatureKind, str] = {}
    for feature in spec.features:
        est = context.estimate(feature)
        if est.status is not Status.OK:
            raise ValueError(f"recommender {spec.rec_id}: feature "
                             f"{feature.value} is {est.status.value}, not OK")
        values[feature] = est.value
    return _affinity_mean(spec.features, values, track)


def active_recommenders(specs: Sequence[RecommenderSpec],
                        estimates: Mapping[FeatureKind, FeatureEstimate],
                        ) -> set[str]:
    """Recommenders whose every feature has status OK."""
    return {
        spec.rec_id for spec in specs
        if all(estimates[f].status is Status.OK for f in spec.features)
    }


def blend_hybrid(specs: Sequence[RecommenderSpec],
                 weights: HybridWeights,
                 estimates: Mapping[FeatureKind, FeatureEstimate],
                 catalog: Catalog,
                 n: int,
                 tick_ts: int = 0) -> RecommendationList:
    """Normalized (user weight x reliability)-weighted sum of active scorers."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not catalog.tracks:
        raise ValueError("catalog is empty")

    active_ids = active_recommenders(specs, estimates)
    active = sorted(active_ids)
    if not active:
        return RecommendationList(tick_ts=tick_ts, entries=(), active_rec_ids=())

    by_id = {spec.rec_id: spec for spec in specs}
    values = {f: est.value for f, est in estimates.items()
              if est.status is Status.OK}

    raw: dict[str, float] = {}
    for rec_id in active:
        reliability = 1.0
        for feature in by_id[rec_id].features:
            reliability *= estimates[feature].confidence
        raw[rec_id] = weights.user_weights.get(rec_id, 0.0) * reliability
    total = sum(raw.values())
    if total == 0:
        return RecommendationList(tick_ts=tick_ts, entries=(),
                                  active_rec_ids=tuple(active))
    norm = {rec_id: w / total for rec_id, w in raw.items()}

    scored: list[tuple[str, float]] = []
    for track in catalog.tracks:
        score = 0.0
        for rec_id in active:
            score += norm[rec_id] * _affinity_mean(by_id[rec_id].features,
                                                   values, track)
        scored.append((track.track_id, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return RecommendationList(tick_ts=tick_ts, entries=tuple(scored[:n]),
                              active_rec_ids=tuple(active))


# ---------------------------------------------------------------------------
# Session metrics

def _jaccard(a: set[str], b: set[str]) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def session_metrics(trace: Sequence[tuple[EphemeralContext, RecommendationList]],
                    catalog: Catalog,
                    history: Sequence[str] = ()) -> MetricsReport:
    """Fault-tolerance and discovery metrics over one replayed session.

    Ratios are quantized to 1e-6 so reports survive the canonical 6-decimal
    file format byte-for-byte.
    """
    if not trace:
        raise ValueError("trace is empty")

    ticks = len(trace)
    context_ids = {ctx.id for ctx, _ in trace if ctx.id != "∅"}
    nonempty = [recs for _, recs in trace if recs.entries]
    availability = len(nonempty) / ticks

    jaccards: list[float] = []
    for (_, prev), (_, cur) in zip(trace, trace[1:]):
        if prev.entries and cur.entries:
            jaccards.append(_jaccard({tid for tid, _ in prev.entries},
                                     {tid for tid, _ in cur.entries}))
    mean_jaccard = sum(jaccards) / len(jaccards) if jaccards else 0.0

    recommended: set[str] = set()
    for recs in nonempty:
        recommended.update(tid for tid, _ in recs.entries)
    coverage = len(recommended) / len(catalog)

    known = set(history)
    novelties = [
        sum(1 for tid, _ in recs.entries if tid not in known) / len(recs.entries)
        for recs in nonempty
    ]
    mean_novelty = sum(novelties) / len(novelties) if novelties else 0.0

    counts: dict[FeatureKind, StatusCounts] = {}
    for feature in FEATURE_ORDER:
        ok = conflict = missing = 0
        for ctx, _ in trace:
            status = ctx.estimate(feature).status
            if status is Status.OK:
                ok += 1
            elif status is Status.CONFLICT:
                conflict += 1
            else:
                missing += 1
        counts[feature] = StatusCounts(ok=ok, conflict=conflict, missing=missing)

    return MetricsReport(
        ticks=ticks,
        distinct_contexts=len(context_ids),
        availability=round(availability, 6),
        mean_consecutive_jaccard=round(mean_jaccard, 6),
        catalog_coverage=round(coverage, 6),
        mean_novelty=round(mean_novelty, 6),
        per_feature_status_counts=counts,
    )


# ---------------------------------------------------------------------------
# File formats

def load_catalog(text: str) -> Catalog:
    obj = json.loads(text)
    tracks = []
    for entry in obj.get("tracks", []):
        tracks.append(Track(
            track_id=str(entry["track_id"]),
            title=str(entry.get("title", "")),
            artist=str(entry.get("artist", "")),
            affinities={str(k): float(v)
                        for k, v in entry.get("affinities", {}).items()},
        ))
    return Catalog(tracks=tuple(tracks))


def catalog_to_json(catalog: Catalog) -> dict:
    return {
        "tracks": [
            {"track_id": t.track_id, "title": t.title, "artist": t.artist,
             "affinities": dict(t.affinities)}
            for t in catalog.tracks
        ],
    }


def load_weights(text: str) -> HybridWeights:
    obj = json.loads(text)
    user_weights = {str(k): float(v)
                    for k, v in obj.get("user_weights", {}).items()}
    return HybridWeights(user_weights=user_weights)


def weights_to_json(weights: HybridWeights) -> dict:
    return {"user_weights": {k: float(v)
                             for k, v in weights.user_weights.items()}}


def spec_to_json(spec: RecommenderSpec) -> dict:
    ordered = [f.value for f in FEATURE_ORDER if f in spec.features]
    return {"rec_id": spec.rec_id, "features": ordered}


def specs_from_json(items: Sequence[Mapping]) -> list[RecommenderSpec]:
    specs = []
    for entry in items:
        specs.append(RecommenderSpec(
            rec_id=str(entry["rec_id"]),
            features=frozenset(FeatureKind(f) for f in entry["features"]),
        ))
    if len({s.rec_id for s in specs}) != len(specs):
        raise ValueError("duplicate rec_id")
    return specs


def recommendations_to_json(recs: RecommendationList) -> dict:
    return {
        "tick_ts": recs.tick_ts,
        "entries": [{"track_id": tid, "score": score}
                    for tid, score in recs.entries],
        "active_rec_ids": list(recs.active_rec_ids),
    }


def recommendations_from_json(obj: Mapping) -> RecommendationList:
    return RecommendationList(
        tick_ts=int(obj["tick_ts"]),
        entries=tuple((str(e["track_id"]), float(e["score"]))
                      for e in obj["entries"]),
        active_rec_ids=tuple(str(r) for r in obj["active_rec_ids"]),
    )


def metrics_to_json(report: MetricsReport) -> dict:
    return {
        "ticks": report.ticks,
        "distinct_contexts": report.distinct_contexts,
        "availability": report.availability,
        "mean_consecutive_jaccard": report.mean_consecutive_jaccard,
        "catalog_coverage": report.catalog_coverage,
        "mean_novelty": report.mean_novelty,
        "per_feature_status_counts": {
            f.value: {"ok": c.ok, "conflict": c.conflict, "missing": c.missing}
            for f, c in report.per_feature_status_counts.items()
        },
    }


def metrics_from_json(obj: Mapping) -> MetricsReport:
    counts = {
        FeatureKind(name): StatusCounts(ok=int(c["ok"]),
                                        conflict=int(c["conflict"]),
                                        missing=int(c["missing"]))
        for name, c in obj.get("per_feature_status_counts", {}).items()
    }
    return MetricsReport(
        ticks=int(obj["ticks"]),
        distinct_contexts=int(obj["distinct_contexts"]),
        availability=float(obj["availability"]),
        mean_consecutive_jaccard=float(obj["mean_consecutive_jaccard"]),
        catalog_coverage=float(obj["catalog_coverage"]),
        mean_novelty=float(obj["mean_novelty"]),
        per_feature_status_counts=counts,
    )
