"""Evidence extraction and fusion: windowed readings in, feature estimates out.

Each of the eight high-level features has an extraction rule that turns the
relevant readings into (value, confidence, source) evidence votes.  Fusion
aggregates the votes per feature into a single estimate with an OK, CONFLICT,
or MISSING status.  Cross-source disagreement without a clear winner yields
CONFLICT, which downstream scoring treats the same as MISSING: the feature is
simply not used.

Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

from .sensor_model import (
    CalendarEntry,
    EmotionLabel,
    HeartRate,
    LocalTime,
    MoistureLevel,
    MotionSignature,
    PeerList,
    PlaceLabel,
    Position,
    RespirationLabel,
    SensorReading,
    SentimentLabel,
    VoicePresence,
    WeatherLabel,
)


class FeatureKind(str, Enum):
    """The eight high-level features, in canonical order."""

    ACTIVITY = "activity"
    SPEED = "speed"
    SOCIAL = "social"
    LOCATION = "location"
    WEATHER = "weather"
    TIME_OF_DAY = "time_of_day"
    PHYSICAL_STATE = "physical_state"
    MOOD = "mood"


FEATURE_ORDER: tuple[FeatureKind, ...] = tuple(FeatureKind)

DEFAULT_VOCABULARY: dict[FeatureKind, tuple[str, ...]] = {
    FeatureKind.ACTIVITY: ("jogging", "walking", "biking", "driving",
                           "commuting", "working", "studying", "resting"),
    FeatureKind.SPEED: ("slow", "normal", "fast"),
    FeatureKind.SOCIAL: ("alone", "with_friends", "in_crowd"),
    FeatureKind.LOCATION: ("downtown", "park", "beach", "campus", "home",
                           "office", "gym", "transit"),
    FeatureKind.WEATHER: ("clear", "cloudy", "light_rain", "heavy_rain",
                          "snow", "fog", "windy", "storm"),
    FeatureKind.TIME_OF_DAY: ("morning", "afternoon", "evening", "night"),
    FeatureKind.PHYSICAL_STATE: ("energetic", "normal", "tired", "exhausted"),
    FeatureKind.MOOD: ("happy", "calm", "sad", "angry", "anxious", "excited",
                       "bored", "focused"),
}


def load_vocabulary(text: str) -> dict[FeatureKind, tuple[str, ...]]:
    """Parse a vocabulary file: JSON map of feature name to value list."""
    obj = json.loads(text)
    if not isinstance(obj, dict):
        raise ValueError("vocabulary: expected a JSON object")
    vocab = dict(DEFAULT_VOCABULARY)
    for key, values in obj.items():
        feature = FeatureKind(key)
        if not isinstance(values, list) or not values:
            raise ValueError(f"vocabulary: {key} needs a non-empty list")
        ordered = tuple(str(v) for v in values)
        if len(set(ordered)) != len(ordered):
            raise ValueError(f"vocabulary: duplicate values for {key}")
        vocab[feature] = ordered
    return vocab


class Status(str, Enum):
    OK = "OK"
    CONFLICT = "CONFLICT"
    MISSING = "MISSING"


@dataclass(frozen=True)
class Evidence:
    feature: FeatureKind
    value: str
    confidence: float
    source_id: str
    instance: Optional[str] = None  # free-text label, location only


@dataclass(frozen=True)
class FeatureEstimate:
    feature: FeatureKind
    status: Status
    value: Optional[str] = None
    instance_label: Optional[str] = None
    confidence: float = 0.0
    supporting_sources: tuple[str, ...] = ()


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    activity_speed_baselines: Mapping[str, float]
    resting_bpm: int
    friend_device_ids: tuple[str, ...] = ()
    home_timezone: str = "UTC"

    def __post_init__(self):
        if not self.user_id:
            raise ValueError("profile: user_id must be non-empty")
        for activity, kmh in self.activity_speed_baselines.items():
            if kmh <= 0:
                raise ValueError(f"profile: baseline for {activity!r} must be > 0")
        if not 30 <= self.resting_bpm <= 120:
            raise ValueError(f"profile: resting_bpm {self.resting_bpm} outside [30, 120]")


def profile_from_json(obj: Mapping) -> UserProfile:
    return UserProfile(
        user_id=str(obj["user_id"]),
        activity_speed_baselines={str(k): float(v) for k, v in
                                  obj.get("activity_speed_baselines", {}).items()},
        resting_bpm=int(obj.get("resting_bpm", 60)),
        friend_device_ids=tuple(str(d) for d in obj.get("friend_device_ids", [])),
        home_timezone=str(obj.get("home_timezone", "UTC")),
    )


def profile_to_json(profile: UserProfile) -> dict:
    return {
        "user_id": profile.user_id,
        "activity_speed_baselines": dict(profile.activity_speed_baselines),
        "resting_bpm": profile.resting_bpm,
        "friend_device_ids": list(profile.friend_device_ids),
        "home_timezone": profile.home_timezone,
    }


# ---------------------------------------------------------------------------
# Tuning constants.  Calendar entries are plans, not observations, so they
# vote at a reduced weight.  The conflict margin demands a 1.5x support lead
# before a disputed value may win.

CALENDAR_CONFIDENCE_FACTOR = 0.7
CONFLICT_MARGIN = 1.5
RESPIRATION_TIRED_CONFIDENCE = 0.6
MOISTURE_RAIN_THRESHOLD = 0.6

# Heart rate is interpreted relative to the expected rate for the current
# activity (resting rate times an intensity factor).
ACTIVITY_INTENSITY_FACTORS = {
    "resting": 1.0, "working": 1.0, "studying": 1.0,
    "walking": 1.3,
    "jogging": 1.7, "biking": 1.7,
    "driving": 1.1, "commuting": 1.1,
}
HEART_RATIO_EXHAUSTED = 1.4
HEART_RATIO_TIRED = 1.2
HEART_RATIO_ENERGETIC = 0.9


def classify_relative_speed(speed_kmh: float, baseline_kmh: float) -> str:
    """Bucket a speed against the user's baseline for the activity."""
    if baseline_kmh <= 0:
        raise ValueError(f"baseline_kmh must be > 0, got {baseline_kmh}")
    if speed_kmh < 0:
        raise ValueError(f"speed_kmh must be >= 0, got {speed_kmh}")
    ratio = speed_kmh / baseline_kmh
    if ratio <= 0.9:
        return "slow"
    if ratio >= 1.1:
        return "fast"
    return "normal"


def classify_time_of_day(local_time: str) -> str:
    """Map HH:MM to morning/afternoon/evening/night."""
    parts = local_time.split(":")
    if len(parts) != 2:
        raise ValueError(f"unparseable time {local_time!r}")
    try:
        hh, mm = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"unparseable time {local_time!r}") from None
    if not (0 <= hh <= 23 and 0 <= mm <= 59):
        raise ValueError(f"time {local_time!r} out of range")
    if 6 <= hh < 12:
        return "morning"
    if 12 <= hh < 18:
        return "afternoon"
    if 18 <= hh < 22:
        return "evening"
    return "night"


def _motion_label_to_activity(label: str) -> str:
    if label.endswith("_pattern"):
        return label[:-len("_pattern")]
    return label


def _place_to_category(place: str, categories: Sequence[str]) -> str:
    """Map free calendar place text onto a location category."""
    text = place.strip().lower()
    for category in categories:
        if text == category:
            return category
    for category in categories:
        if category in text:
            return category
    return text.replace(" ", "_")


def _trust_of(trust: Mapping[str, float], source_id: str) -> float:
    return trust.get(source_id, 1.0)


def extract_evidence(feature: FeatureKind,
                     readings: Sequence[SensorReading],
                     profile: UserProfile,
                     *,
                     tick_ts: Optional[int] = None,
                     trust: Optional[Mapping[str, float]] = None,
                     activity_value: Optional[str] = None,
                     location_categories: Optional[Sequence[str]] = None,
                     ) -> list[Evidence]:
    """Apply one feature's extraction rule to a tick's windowed readings.

    tick_ts anchors calendar range checks and defaults to the newest reading
    timestamp.  activity_value is the already-fused activity, consumed by the
    speed and physical-state rules; when absent they fall back to the
    profile's first declared baseline / a neutral intensity factor.
    """
    if tick_ts is None:
        tick_ts = max((r.timestamp for r in readings), default=0)
    trust = trust or {}
    if location_categories is None:
        location_categories = DEFAULT_VOCABULARY[FeatureKind.LOCATION]

    out: list[Evidence] = []

    if feature is FeatureKind.ACTIVITY:
        for r in readings:
            p = r.payload
            if isinstance(p, MotionSignature):
                out.append(Evidence(feature, _motion_label_to_activity(p.label),
                                    p.confidence * r.quality, r.source_id))
            elif isinstance(p, CalendarEntry) and p.from_ts <= tick_ts <= p.to_ts:
                conf = CALENDAR_CONFIDENCE_FACTOR * _trust_of(trust, r.source_id) * r.quality
                out.append(Evidence(feature, p.activity.strip().lower(), conf, r.source_id))

    elif feature is FeatureKind.SPEED:
        baselines = profile.activity_speed_baselines
        baseline = None
        if activity_value is not None:
            baseline = baselines.get(activity_value)
        if baseline is None and baselines:
            baseline = next(iter(baselines.values()))
        if baseline is not None:
            for r in readings:
                if isinstance(r.payload, Position):
                    label = classify_relative_speed(r.payload.speed_kmh, baseline)
                    out.append(Evidence(feature, label, r.quality, r.source_id))

    elif feature is FeatureKind.SOCIAL:
        peer_readings = [r for r in readings if isinstance(r.payload, PeerList)]
        voice_readings = [r for r in readings if isinstance(r.payload, VoicePresence)]
        friends = set(profile.friend_device_ids)
        seen_peers: set[str] = set()
        for r in peer_readings:
            seen_peers.update(r.payload.device_ids)
        overlap = seen_peers & friends
        voice = None
        if voice_readings:
            voice = max(voice_readings,
                        key=lambda r: (r.payload.confidence * r.quality, r.source_id))
        if overlap:
            witness = max((r for r in peer_readings if set(r.payload.device_ids) & friends),
                          key=lambda r: (r.quality, r.source_id))
            out.append(Evidence(feature, "with_friends", witness.quality, witness.source_id))
        elif voice is not None and voice.payload.present:
            out.append(Evidence(feature, "in_crowd",
                                voice.payload.confidence * voice.quality, voice.source_id))
        elif voice is not None and peer_readings:
            # Alone needs both signals: no friend devices around and no voices.
            voice_conf = voice.payload.confidence * voice.quality
            peer_best = max(peer_readings, key=lambda r: (r.quality, r.source_id))
            if voice_conf <= peer_best.quality:
                conf, source = voice_conf, voice.source_id
            else:
                conf, source = peer_best.quality, peer_best.source_id
            out.append(Evidence(feature, "alone", conf, source))

    elif feature is FeatureKind.LOCATION:
        for r in readings:
            p = r.payload
            if isinstance(p, PlaceLabel):
                out.append(Evidence(feature, p.category, r.quality, r.source_id,
                                    instance=p.name))
            elif isinstance(p, CalendarEntry) and p.from_ts <= tick_ts <= p.to_ts:
                category = _place_to_category(p.place, location_categories)
                conf = CALENDAR_CONFIDENCE_FACTOR * _trust_of(trust, r.source_id) * r.quality
                out.append(Evidence(feature, category, conf, r.source_id))

    elif feature is FeatureKind.WEATHER:
        for r in readings:
            p = r.payload
            if isinstance(p, MoistureLevel) and p.value >= MOISTURE_RAIN_THRESHOLD:
                out.append(Evidence(feature, "heavy_rain", p.value * r.quality, r.source_id))
            elif isinstance(p, WeatherLabel):
                out.append(Evidence(feature, p.label, p.confidence * r.quality, r.source_id))

    elif feature is FeatureKind.TIME_OF_DAY:
        for r in readings:
            if isinstance(r.payload, LocalTime):
                out.append(Evidence(feature, classify_time_of_day(r.payload.value),
                                    1.0 * r.quality, r.source_id))

    elif feature is FeatureKind.PHYSICAL_STATE:
        factor = ACTIVITY_INTENSITY_FACTORS.get(activity_value, 1.0) if activity_value else 1.0
        expected_bpm = profile.resting_bpm * factor
        for r in readings:
            p = r.payload
            if isinstance(p, HeartRate):
                ratio = p.bpm / expected_bpm
                if ratio >= HEART_RATIO_EXHAUSTED:
                    label = "exhausted"
                elif ratio >= HEART_RATIO_TIRED:
                    label = "tired"
                elif ratio <= HEART_RATIO_ENERGETIC:
                    label = "energetic"
                else:
                    label = "normal"
                out.append(Evidence(feature, label, r.quality, r.source_id))
            elif isinstance(p, RespirationLabel) and p.value == "labored":
                out.append(Evidence(feature, "tired",
                                    RESPIRATION_TIRED_CONFIDENCE * r.quality, r.source_id))

    elif feature is FeatureKind.MOOD:
        for r in readings:
            p = r.payload
            if isinstance(p, (EmotionLabel, SentimentLabel)):
                out.append(Evidence(feature, p.label, p.confidence * r.quality, r.source_id))

    return out


def fuse_evidence(feature: FeatureKind,
                  evidence: Sequence[Evidence]) -> FeatureEstimate:
    """Aggregate one feature's evidence votes into a single estimate.

    support(v) is the summed confidence behind value v.  The winner needs a
    CONFLICT_MARGIN lead over the best rival backed by a source that is not
    already one of its own supporters; otherwise the feature is CONFLICT.
    A winner's confidence is the noisy-OR of its supporters scaled by its
    share of the total support.
    """
    for ev in evidence:
        if ev.feature is not feature:
            raise ValueError(f"evidence for {ev.feature.value} passed to "
                             f"{feature.value} fusion")
    # Canonical order keeps float accumulation identical under permutation.
    votes = sorted((ev for ev in evidence if ev.confidence > 0),
                   key=lambda ev: (ev.value, ev.confidence, ev.source_id,
                                   ev.instance or ""))
    if not votes:
        return FeatureEstimate(feature=feature, status=Status.MISSING)

    support: dict[str, float] = defaultdict(float)
    by_value: dict[str, list[Evidence]] = defaultdict(list)
    for ev in votes:
        support[ev.value] += ev.confidence
        by_value[ev.value].append(ev)

    # Ties on support go to the lexicographically smaller value so fusion is
    # order-independent.
    best_value = min(support, key=lambda v: (-support[v], v))
    s1 = support[best_value]
    best_sources = {ev.source_id for ev in by_value[best_value]}

    s2 = 0.0
    for value, total in support.items():
        if value == best_value:
            continue
        has_distinct_source = any(ev.source_id not in best_sources
                                  for ev in by_value[value])
        if has_distinct_source and total > s2:
            s2 = total

    if s2 > 0 and s1 < CONFLICT_MARGIN * s2:
        return FeatureEstimate(feature=feature, status=Status.CONFLICT)

    miss = 1.0
    for ev in by_value[best_value]:
        miss *= 1.0 - ev.confidence
    share = s1 / sum(support.values())
    confidence = (1.0 - miss) * share

    instance = None
    if feature is FeatureKind.LOCATION:
        labelled = [ev for ev in by_value[best_value] if ev.instance]
        if labelled:
            top = min(labelled, key=lambda ev: (-ev.confidence, ev.source_id))
            instance = top.instance

    return FeatureEstimate(
        feature=feature,
        status=Status.OK,
        value=best_value,
        instance_label=instance,
        confidence=confidence,
        supporting_sources=tuple(sorted(best_sources)),
    )


def infer_features(readings: Sequence[SensorReading],
                   profile: UserProfile,
                   *,
                   tick_ts: Optional[int] = None,
                   trust: Optional[Mapping[str, float]] = None,
                   vocab: Optional[Mapping[FeatureKind, Sequence[str]]] = None,
                   ) -> dict[FeatureKind, FeatureEstimate]:
    """Extract and fuse all eight features for one tick's window.

    Activity is fused first because the speed and physical-state rules depend
    on the activity in effect.
    """
    if tick_ts is None:
        tick_ts = max((r.timestamp for r in readings), default=0)
    trust = trust or {}
    categories = (vocab or DEFAULT_VOCABULARY)[FeatureKind.LOCATION]

    activity = fuse_evidence(
        FeatureKind.ACTIVITY,
        extract_evidence(FeatureKind.ACTIVITY, readings, profile,
                         tick_ts=tick_ts, trust=trust))
    activity_value = activity.value if activity.status is Status.OK else None

    estimates = {FeatureKind.ACTIVITY: activity}
    for feature in FEATURE_ORDER:
        if feature is FeatureKind.ACTIVITY:
            continue
        evidence = extract_evidence(
            feature, readings, profile,
            tick_ts=tick_ts, trust=trust,
            activity_value=activity_value,
            location_categories=categories)
        estimates[feature] = fuse_evidence(feature, evidence)
    return estimates
