"""Assemble feature estimates into an ephemeral context.

A context has a canonical identity string (vocabulary-scoped, so the
discovery metrics can count distinct contexts) and a human-readable sentence
rendered from a fixed clause template.  The free-text location instance only
enriches the sentence; identity always uses the location category.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .feature_inference import (
    DEFAULT_VOCABULARY,
    FEATURE_ORDER,
    FeatureEstimate,
    FeatureKind,
    Status,
)

EMPTY_CONTEXT_ID = "∅"
EMPTY_CONTEXT_SENTENCE = "Unknown context"


@dataclass(frozen=True)
class ContextVocabulary:
    values: Mapping[FeatureKind, tuple[str, ...]]

    def __post_init__(self):
        for feature in FEATURE_ORDER:
            items = self.values.get(feature)
            if not items:
                raise ValueError(f"vocabulary: no values for {feature.value}")
            if len(set(items)) != len(items):
                raise ValueError(f"vocabulary: duplicate values for {feature.value}")

    @classmethod
    def default(cls) -> "ContextVocabulary":
        return cls(values=dict(DEFAULT_VOCABULARY))


@dataclass(frozen=True)
class EphemeralContext:
    tick_ts: int
    estimates: tuple[FeatureEstimate, ...]  # canonical feature order
    sentence: str
    id: str

    def estimate(self, feature: FeatureKind) -> FeatureEstimate:
        return self.estimates[list(FEATURE_ORDER).index(feature)]


def empty_context(tick_ts: int = 0) -> EphemeralContext:
    estimates = tuple(FeatureEstimate(feature=f, status=Status.MISSING)
                      for f in FEATURE_ORDER)
    return EphemeralContext(tick_ts=tick_ts, estimates=estimates,
                            sentence=EMPTY_CONTEXT_SENTENCE, id=EMPTY_CONTEXT_ID)


def build_context(estimates: Mapping[FeatureKind, FeatureEstimate],
                  vocab: ContextVocabulary,
                  tick_ts: int) -> EphemeralContext:
    missing = [f.value for f in FEATURE_ORDER if f not in estimates]
    if missing:
        raise ValueError(f"estimates missing features: {missing}")
    ordered = tuple(estimates[f] for f in FEATURE_ORDER)
    for est in ordered:
        if est.status is Status.OK and est.value not in vocab.values[est.feature]:
            raise ValueError(
                f"{est.feature.value} value {est.value!r} not in vocabulary")
    context = EphemeralContext(tick_ts=tick_ts, estimates=ordered,
                               sentence="", id="")
    sentence = render_sentence(context)
    identity = context_id(context)
    return EphemeralContext(tick_ts=tick_ts, estimates=ordered,
                            sentence=sentence, id=identity)


_SOCIAL_PHRASES = {"alone": "alone", "with_friends": "with friends",
                   "in_crowd": "in a crowd"}
# Weather values that read as countable nouns take an article.
_WEATHER_WITH_ARTICLE = {"heavy_rain", "light_rain", "storm"}


def _weather_clause(value: str) -> str:
    phrase = value.replace("_", " ")
    if value in _WEATHER_WITH_ARTICLE:
        return f"under a {phrase}"
    return f"under {phrase}"


def render_sentence(context: EphemeralContext) -> str:
    """Render the OK features as one fixed-template sentence."""
    ok = {est.feature: est for est in context.estimates
          if est.status is Status.OK}
    clauses: list[str] = []
    if FeatureKind.ACTIVITY in ok:
        clauses.append(ok[FeatureKind.ACTIVITY].value.capitalize())
    if FeatureKind.SPEED in ok:
        clauses.append(ok[FeatureKind.SPEED].value)
    if FeatureKind.SOCIAL in ok:
        value = ok[FeatureKind.SOCIAL].value
        clauses.append(_SOCIAL_PHRASES.get(value, value.replace("_", " ")))
    if FeatureKind.LOCATION in ok:
        est = ok[FeatureKind.LOCATION]
        clauses.append(f"in {est.instance_label or est.value}")
    if FeatureKind.WEATHER in ok:
        clauses.append(_weather_clause(ok[FeatureKind.WEATHER].value))
    if FeatureKind.TIME_OF_DAY in ok:
        clauses.append(f"at {ok[FeatureKind.TIME_OF_DAY].value}")
    if FeatureKind.PHYSICAL_STATE in ok:
        clauses.append(f"being {ok[FeatureKind.PHYSICAL_STATE].value}")
    if FeatureKind.MOOD in ok:
        clauses.append(f"and {ok[FeatureKind.MOOD].value}")
    if not clauses:
        return EMPTY_CONTEXT_SENTENCE
    return " ".join(clauses)


def context_id(context: EphemeralContext) -> str:
    """Vocabulary-scoped identity: feature=value pairs for the OK features."""
    parts = [f"{est.feature.value}={est.value}"
             for est in context.estimates if est.status is Status.OK]
    if not parts:
        return EMPTY_CONTEXT_ID
    return "|".join(parts)


def context_cardinality(vocab: ContextVocabulary) -> int:
    return math.prod(len(vocab.values[f]) for f in FEATURE_ORDER)


def context_to_json(context: EphemeralContext) -> dict:
    return {
        "tick_ts": context.tick_ts,
        "sentence": context.sentence,
        "id": context.id,
        "estimates": [
            {
                "feature": est.feature.value,
                "status": est.status.value,
                "value": est.value,
                "instance_label": est.instance_label,
                "confidence": est.confidence,
                "supporting_sources": list(est.supporting_sources),
            }
            for est in context.estimates
        ],
    }


def context_from_json(obj: Mapping) -> EphemeralContext:
    estimates = tuple(
        FeatureEstimate(
            feature=FeatureKind(e["feature"]),
            status=Status(e["status"]),
            value=e.get("value"),
            instance_label=e.get("instance_label"),
            confidence=float(e.get("confidence", 0.0)),
            supporting_sources=tuple(e.get("supporting_sources", [])),
        )
        for e in obj["estimates"]
    )
    return EphemeralContext(tick_ts=int(obj["tick_ts"]),
                            estimates=estimates,
                            sentence=str(obj["sentence"]),
                            id=str(obj["id"]))


def vocabulary_to_json(vocab: ContextVocabulary) -> dict:
    return {f.value: list(vocab.values[f]) for f in FEATURE_ORDER}


def vocabulary_from_json(obj: Mapping) -> ContextVocabulary:
    values: dict[FeatureKind, tuple[str, ...]] = dict(DEFAULT_VOCABULARY)
    for key, items in obj.items():
        values[FeatureKind(key)] = tuple(str(v) for v in items)
    return ContextVocabulary(values=values)
