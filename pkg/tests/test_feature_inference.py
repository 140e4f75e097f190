import random

import pytest
from hypothesis import given, strategies as st

from ephemera.feature_inference import (
    Evidence,
    FeatureKind,
    Status,
    UserProfile,
    classify_relative_speed,
    classify_time_of_day,
    extract_evidence,
    fuse_evidence,
    infer_features,
)
from ephemera.sensor_model import (
    CalendarEntry,
    EmotionLabel,
    HeartRate,
    MoistureLevel,
    MotionSignature,
    PeerList,
    Position,
    RespirationLabel,
    SensorReading,
    VoicePresence,
    WeatherLabel,
    window_readings,
)

PROFILE = UserProfile(
    user_id="anna",
    activity_speed_baselines={"jogging": 13.0, "walking": 5.0},
    resting_bpm=60,
    friend_device_ids=("bt-lena", "bt-marco"),
)


# ---------------------------------------------------------------------------
# classifiers

@pytest.mark.parametrize("speed,baseline,expected", [
    (15.0, 13.0, "fast"),
    (13.0, 13.0, "normal"),
    (11.7, 13.0, "slow"),
    (9.0, 10.0, "slow"),    # exact boundary ratio 0.9
    (11.0, 10.0, "fast"),   # exact boundary ratio 1.1
    (0.0, 13.0, "slow"),
])
def test_classify_relative_speed(speed, baseline, expected):
    assert classify_relative_speed(speed, baseline) == expected


def test_classify_relative_speed_rejects_bad_inputs():
    with pytest.raises(ValueError):
        classify_relative_speed(5.0, 0.0)
    with pytest.raises(ValueError):
        classify_relative_speed(-1.0, 10.0)


@pytest.mark.parametrize("time,expected", [
    ("23:56", "night"),
    ("06:00", "morning"),
    ("05:59", "night"),
    ("11:59", "morning"),
    ("12:00", "afternoon"),
    ("17:59", "afternoon"),
    ("18:00", "evening"),
    ("21:59", "evening"),
    ("22:00", "night"),
    ("00:00", "night"),
])
def test_classify_time_of_day(time, expected):
    assert classify_time_of_day(time) == expected


@pytest.mark.parametrize("bad", ["25:00", "aa:bb", "1200", "12:60", ""])
def test_classify_time_of_day_rejects_garbage(bad):
    with pytest.raises(ValueError):
        classify_time_of_day(bad)


def test_classify_time_of_day_total_over_all_minutes():
    labels = {"morning", "afternoon", "evening", "night"}
    seen = set()
    for minute in range(24 * 60):
        label = classify_time_of_day(f"{minute // 60:02d}:{minute % 60:02d}")
        assert label in labels
        seen.add(label)
    assert seen == labels


# ---------------------------------------------------------------------------
# extraction

def test_activity_evidence_from_motion_and_calendar():
    readings = [
        SensorReading("accel", 55, MotionSignature("jogging_pattern", 0.9)),
        SensorReading("cal", 45, CalendarEntry("jogging", "downtown", 0, 3600)),
    ]
    out = extract_evidence(FeatureKind.ACTIVITY, readings, PROFILE, tick_ts=60)
    assert [(e.value, e.confidence) for e in out] == [("jogging", 0.9), ("jogging", 0.7)]


def test_calendar_outside_range_gives_no_activity_evidence():
    readings = [SensorReading("cal", 45, CalendarEntry("jogging", "downtown", 0, 50))]
    assert extract_evidence(FeatureKind.ACTIVITY, readings, PROFILE, tick_ts=60) == []


def test_calendar_confidence_scales_with_trust():
    readings = [SensorReading("cal", 45, CalendarEntry("jogging", "downtown", 0, 3600))]
    out = extract_evidence(FeatureKind.ACTIVITY, readings, PROFILE,
                           tick_ts=60, trust={"cal": 0.5})
    assert out[0].confidence == pytest.approx(0.35)


def test_social_alone_needs_both_signals_and_takes_min_confidence():
    readings = [
        SensorReading("bt", 50, PeerList(("bt-stranger",)), quality=0.9),
        SensorReading("mic", 50, VoicePresence(False, 0.8)),
    ]
    out = extract_evidence(FeatureKind.SOCIAL, readings, PROFILE)
    assert [(e.value, e.confidence) for e in out] == [("alone", 0.8)]


def test_social_with_friends_on_peer_overlap():
    readings = [
        SensorReading("bt", 50, PeerList(("bt-lena",)), quality=0.85),
        SensorReading("mic", 50, VoicePresence(True, 0.9)),
    ]
    out = extract_evidence(FeatureKind.SOCIAL, readings, PROFILE)
    assert [(e.value, e.confidence) for e in out] == [("with_friends", 0.85)]


def test_social_in_crowd_on_voices_without_known_peers():
    readings = [
        SensorReading("bt", 50, PeerList(())),
        SensorReading("mic", 50, VoicePresence(True, 0.75)),
    ]
    out = extract_evidence(FeatureKind.SOCIAL, readings, PROFILE)
    assert [(e.value, e.confidence) for e in out] == [("in_crowd", 0.75)]


def test_social_missing_one_signal_gives_no_evidence():
    only_voice = [SensorReading("mic", 50, VoicePresence(False, 0.8))]
    only_peers = [SensorReading("bt", 50, PeerList(()))]
    assert extract_evidence(FeatureKind.SOCIAL, only_voice, PROFILE) == []
    assert extract_evidence(FeatureKind.SOCIAL, only_peers, PROFILE) == []


def test_mood_empty_window_gives_empty_evidence():
    assert extract_evidence(FeatureKind.MOOD, [], PROFILE) == []


def test_speed_uses_activity_baseline():
    readings = [SensorReading("gps", 55, Position(0, 0, 15.0), quality=0.95)]
    out = extract_evidence(FeatureKind.SPEED, readings, PROFILE,
                           activity_value="jogging")
    assert [(e.value, e.confidence) for e in out] == [("fast", 0.95)]
    # without a fused activity the first declared baseline applies
    out = extract_evidence(FeatureKind.SPEED, readings, PROFILE)
    assert out[0].value == "fast"  # 15 vs 13 again


def test_physical_state_thresholds():
    def state(bpm, activity=None):
        readings = [SensorReading("hr", 54, HeartRate(bpm))]
        out = extract_evidence(FeatureKind.PHYSICAL_STATE, readings, PROFILE,
                               activity_value=activity)
        return out[0].value

    # resting expectation is 60 bpm
    assert state(50) == "energetic"
    assert state(54) == "energetic"   # ratio 0.9 boundary
    assert state(60) == "normal"
    assert state(72) == "tired"       # ratio 1.2 boundary
    assert state(84) == "exhausted"   # ratio 1.4 boundary
    # jogging raises the expectation to 102 bpm
    assert state(130, activity="jogging") == "tired"
    assert state(100, activity="jogging") == "normal"


def test_labored_respiration_votes_tired():
    readings = [SensorReading("resp", 54, RespirationLabel("labored"))]
    out = extract_evidence(FeatureKind.PHYSICAL_STATE, readings, PROFILE)
    assert [(e.value, e.confidence) for e in out] == [("tired", 0.6)]


def test_weather_moisture_threshold():
    wet = [SensorReading("m", 52, MoistureLevel(0.8))]
    dry = [SensorReading("m", 52, MoistureLevel(0.5))]
    out = extract_evidence(FeatureKind.WEATHER, wet, PROFILE)
    assert [(e.value, e.confidence) for e in out] == [("heavy_rain", 0.8)]
    assert extract_evidence(FeatureKind.WEATHER, dry, PROFILE) == []


def test_calendar_place_maps_to_category():
    readings = [SensorReading("cal", 45, CalendarEntry("jogging", "Downtown of Sydney", 0, 3600))]
    out = extract_evidence(FeatureKind.LOCATION, readings, PROFILE, tick_ts=60)
    assert out[0].value == "downtown"


def test_quality_scales_every_confidence():
    readings = [
        SensorReading("cam", 58, EmotionLabel("angry", 0.8), quality=0.5),
        SensorReading("w", 56, WeatherLabel("fog", 0.6), quality=0.5),
    ]
    mood = extract_evidence(FeatureKind.MOOD, readings, PROFILE)
    weather = extract_evidence(FeatureKind.WEATHER, readings, PROFILE)
    assert mood[0].confidence == pytest.approx(0.4)
    assert weather[0].confidence == pytest.approx(0.3)


# ---------------------------------------------------------------------------
# fusion

def _ev(value, conf, source, feature=FeatureKind.LOCATION):
    return Evidence(feature, value, conf, source)


def test_fuse_gps_vs_calendar_disagreement_is_conflict():
    est = fuse_evidence(FeatureKind.LOCATION, [
        _ev("downtown", 0.9, "gps"), _ev("campus", 0.9, "calendar")])
    assert est.status is Status.CONFLICT
    assert est.confidence == 0.0
    assert est.value is None


def test_fuse_empty_is_missing():
    est = fuse_evidence(FeatureKind.MOOD, [])
    assert est.status is Status.MISSING
    assert est.confidence == 0.0


def test_fuse_agreeing_evidence_noisy_or_times_share():
    # (1 - 0.1*0.3) * (1.6/1.6) = 0.97, checked by direct evaluation
    est = fuse_evidence(FeatureKind.ACTIVITY, [
        _ev("jogging", 0.9, "accel", FeatureKind.ACTIVITY),
        _ev("jogging", 0.7, "calendar", FeatureKind.ACTIVITY)])
    assert est.status is Status.OK
    assert est.value == "jogging"
    assert est.confidence == pytest.approx(0.97, abs=1e-12)
    assert est.supporting_sources == ("accel", "calendar")


def test_fuse_outvoted_rival_keeps_ok_with_reduced_share():
    # s1=0.9, s2=0.3, margin 3x >= 1.5 -> OK; conf = 0.9 * (0.9/1.2) = 0.675
    est = fuse_evidence(FeatureKind.WEATHER, [
        _ev("heavy_rain", 0.9, "moisture", FeatureKind.WEATHER),
        _ev("light_rain", 0.3, "weather_api", FeatureKind.WEATHER)])
    assert est.status is Status.OK
    assert est.value == "heavy_rain"
    assert est.confidence == pytest.approx(0.675, abs=1e-12)


def test_fuse_rejects_mismatched_feature():
    with pytest.raises(ValueError):
        fuse_evidence(FeatureKind.MOOD, [_ev("x", 0.5, "s", FeatureKind.WEATHER)])


def test_fuse_same_source_disagreement_does_not_conflict():
    # a rival needs at least one source that is not already a supporter
    est = fuse_evidence(FeatureKind.WEATHER, [
        _ev("heavy_rain", 0.6, "api", FeatureKind.WEATHER),
        _ev("light_rain", 0.5, "api", FeatureKind.WEATHER)])
    assert est.status is Status.OK
    assert est.value == "heavy_rain"


def test_fuse_tie_breaks_to_lexicographically_smaller_value():
    est = fuse_evidence(FeatureKind.MOOD, [
        _ev("sad", 0.4, "a", FeatureKind.MOOD),
        _ev("angry", 0.4, "a", FeatureKind.MOOD)])
    assert est.value == "angry"


def test_fuse_zero_confidence_evidence_is_ignored():
    est = fuse_evidence(FeatureKind.MOOD, [_ev("sad", 0.0, "a", FeatureKind.MOOD)])
    assert est.status is Status.MISSING


def test_fuse_location_instance_from_strongest_supporter():
    est = fuse_evidence(FeatureKind.LOCATION, [
        Evidence(FeatureKind.LOCATION, "downtown", 0.9, "place", instance="downtown of Sydney"),
        Evidence(FeatureKind.LOCATION, "downtown", 0.7, "cal"),
    ])
    assert est.instance_label == "downtown of Sydney"


_values = st.sampled_from(["a", "b", "c"])
_sources = st.sampled_from(["s1", "s2", "s3", "s4"])
_evidence_lists = st.lists(
    st.builds(lambda v, c, s: Evidence(FeatureKind.MOOD, v, c, s),
              _values, st.floats(0.01, 1.0), _sources),
    min_size=1, max_size=8)


@given(_evidence_lists, st.randoms())
def test_fuse_permutation_invariant(evidence, rng):
    shuffled = list(evidence)
    rng.shuffle(shuffled)
    assert fuse_evidence(FeatureKind.MOOD, shuffled) == \
        fuse_evidence(FeatureKind.MOOD, evidence)


@given(_evidence_lists, st.floats(0.01, 1.0))
def test_fuse_agreeing_evidence_never_decreases_confidence(evidence, extra_conf):
    before = fuse_evidence(FeatureKind.MOOD, evidence)
    if before.status is not Status.OK:
        return
    extra = Evidence(FeatureKind.MOOD, before.value, extra_conf, "fresh_source")
    after = fuse_evidence(FeatureKind.MOOD, list(evidence) + [extra])
    assert after.status is Status.OK
    assert after.confidence >= before.confidence - 1e-12


@given(_evidence_lists, st.floats(0.01, 1.0))
def test_fuse_disagreeing_evidence_never_increases_confidence(evidence, extra_conf):
    """The confidence behind the original winner can only fall.

    A strong rival may take over as the new winner or force CONFLICT; either
    way the sway of the value it disagreed with drops to zero.
    """
    before = fuse_evidence(FeatureKind.MOOD, evidence)
    if before.status is not Status.OK:
        return
    extra = Evidence(FeatureKind.MOOD, "zz_rival", extra_conf, "fresh_source")
    after = fuse_evidence(FeatureKind.MOOD, list(evidence) + [extra])
    original_value_conf = (after.confidence
                           if after.status is Status.OK and after.value == before.value
                           else 0.0)
    assert original_value_conf <= before.confidence + 1e-12


@given(_evidence_lists)
def test_fuse_ok_requires_conflict_margin(evidence):
    """Independent recheck: an OK verdict implies the margin held."""
    est = fuse_evidence(FeatureKind.MOOD, evidence)
    if est.status is not Status.OK:
        return
    assert 0.0 < est.confidence <= 1.0
    support = {}
    for ev in evidence:
        if ev.confidence > 0:
            support[ev.value] = support.get(ev.value, 0.0) + ev.confidence
    winner_sources = {ev.source_id for ev in evidence
                      if ev.value == est.value and ev.confidence > 0}
    rivals = [
        total for value, total in support.items()
        if value != est.value and any(
            ev.source_id not in winner_sources
            for ev in evidence if ev.value == value and ev.confidence > 0)
    ]
    if rivals:
        assert support[est.value] >= 1.5 * max(rivals) - 1e-12


# ---------------------------------------------------------------------------
# infer_features

def test_infer_features_golden_tick(golden_scenario, anna_profile):
    window = window_readings(golden_scenario, 60, 60)
    est = infer_features(window, anna_profile, tick_ts=60,
                         trust=golden_scenario.trust_map())
    assert len(est) == 8
    values = {f.value: e.value for f, e in est.items()}
    assert all(e.status is Status.OK for e in est.values())
    assert values == {
        "activity": "jogging", "speed": "fast", "social": "alone",
        "location": "downtown", "weather": "heavy_rain",
        "time_of_day": "night", "physical_state": "tired", "mood": "angry",
    }
    assert est[FeatureKind.LOCATION].instance_label == "downtown of Sydney"


def test_infer_features_empty_window_all_missing(anna_profile):
    est = infer_features([], anna_profile)
    assert len(est) == 8
    assert all(e.status is Status.MISSING for e in est.values())


def test_infer_features_without_location_sources(golden_scenario, anna_profile):
    window = [r for r in window_readings(golden_scenario, 60, 60)
              if r.source_id not in ("place_stub", "calendar")]
    est = infer_features(window, anna_profile, tick_ts=60,
                         trust=golden_scenario.trust_map())
    assert est[FeatureKind.LOCATION].status is Status.MISSING
    ok = [e for e in est.values() if e.status is Status.OK]
    assert len(ok) == 7


def test_infer_features_speed_falls_back_when_activity_unknown(anna_profile):
    readings = [SensorReading("gps", 55, Position(0, 0, 15.0))]
    est = infer_features(readings, anna_profile, tick_ts=60)
    assert est[FeatureKind.ACTIVITY].status is Status.MISSING
    # jogging is the first declared baseline: 15 vs 13 -> fast
    assert est[FeatureKind.SPEED].value == "fast"


def test_profile_validation():
    with pytest.raises(ValueError):
        UserProfile("u", {"jogging": 0.0}, 60)
    with pytest.raises(ValueError):
        UserProfile("u", {}, 20)


def test_random_fuzz_fusion_is_deterministic():
    rng = random.Random(1234)
    for _ in range(200):
        evidence = [
            Evidence(FeatureKind.MOOD, rng.choice("abc"), rng.random(), f"s{rng.randrange(4)}")
            for _ in range(rng.randrange(7))
        ]
        assert fuse_evidence(FeatureKind.MOOD, evidence) == \
            fuse_evidence(FeatureKind.MOOD, evidence)
