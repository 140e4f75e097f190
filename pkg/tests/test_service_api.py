import json

import pytest
from fastapi.testclient import TestClient

from ephemera.recommenders import blend_hybrid, default_specs, default_weights_from_survey
from ephemera.feature_inference import FeatureKind, infer_features, profile_from_json
from ephemera.sensor_model import reading_to_json
from ephemera.service_api import create_app

ANNA_SENTENCE = ("Jogging fast alone in downtown of Sydney under a heavy rain "
                 "at night being tired and angry")

PROFILE = {
    "user_id": "anna",
    "activity_speed_baselines": {"jogging": 13.0, "walking": 5.0},
    "resting_bpm": 60,
    "friend_device_ids": ["bt-lena", "bt-marco"],
    "home_timezone": "Australia/Sydney",
}


@pytest.fixture()
def client(catalog, tmp_path):
    app = create_app(catalog=catalog, data_dir=tmp_path)
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def anna_readings(golden_scenario):
    return [reading_to_json(r) for r in golden_scenario.readings]


def _open(client, **overrides):
    body = {"profile": PROFILE}
    body.update(overrides)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()["session_id"]


def test_open_session_defaults(client):
    sid = _open(client)
    config = client.get(f"/sessions/{sid}/config").json()
    assert len(config["specs"]) == 9
    assert config["weights"]["user_weights"]["rec_mood"] == pytest.approx(97 / 103)
    assert set(config["vocab"]) == {f.value for f in FeatureKind}


def test_open_session_echoes_explicit_weights(client):
    weights = {"user_weights": {"rec_mood": 0.5, "rec_speed": 0.25}}
    sid = _open(client, weights=weights)
    config = client.get(f"/sessions/{sid}/config").json()
    assert config["weights"]["user_weights"] == weights["user_weights"]


def test_open_session_duplicate_id_rejected(client):
    _open(client, session_id="dup")
    resp = client.post("/sessions", json={"profile": PROFILE, "session_id": "dup"})
    assert resp.status_code == 422
    assert resp.json()["error"] == "validation_error"


def test_open_session_invalid_profile_rejected(client):
    resp = client.post("/sessions", json={"profile": {"user_id": "x", "resting_bpm": 5}})
    assert resp.status_code == 422


def test_unknown_session_is_404(client):
    resp = client.get("/sessions/nope/context")
    assert resp.status_code == 404
    body = resp.json()
    assert body["error"] == "unknown_session"
    assert "detail" in body


def test_context_before_any_ingest(client):
    sid = _open(client)
    ctx = client.get(f"/sessions/{sid}/context").json()
    assert ctx["sentence"] == "Unknown context"
    assert ctx["id"] == "∅"
    recs = client.get(f"/sessions/{sid}/recommendations").json()
    assert recs["entries"] == []


def test_ingest_anna_reproduces_sentence(client, anna_readings):
    sid = _open(client)
    resp = client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    assert resp.status_code == 200
    assert resp.json()["tick_ts"] == 58
    ctx = client.get(f"/sessions/{sid}/context").json()
    assert ctx["sentence"] == ANNA_SENTENCE
    statuses = {e["feature"]: e["status"] for e in ctx["estimates"]}
    assert set(statuses.values()) == {"OK"}


def test_ingest_empty_batch_changes_nothing(client, anna_readings):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    before = client.get(f"/sessions/{sid}/context").json()
    resp = client.post(f"/sessions/{sid}/events", json={"readings": []})
    assert resp.status_code == 200
    assert client.get(f"/sessions/{sid}/context").json() == before


def test_ingest_conflicting_locations_sets_conflict(client, anna_readings):
    sid = _open(client)
    conflicted = []
    for obj in anna_readings:
        if "calendar_entry" in obj["payload"]:
            obj = json.loads(json.dumps(obj))
            obj["payload"]["calendar_entry"]["place"] = "campus"
        conflicted.append(obj)
    client.post(f"/sessions/{sid}/events", json={"readings": conflicted})
    ctx = client.get(f"/sessions/{sid}/context").json()
    statuses = {e["feature"]: e["status"] for e in ctx["estimates"]}
    assert statuses["location"] == "CONFLICT"
    recs = client.get(f"/sessions/{sid}/recommendations").json()
    assert "rec_location" not in recs["active_rec_ids"]
    assert "rec_ambience" not in recs["active_rec_ids"]
    assert recs["entries"]


def test_recommendations_match_pure_blend(client, anna_readings, catalog,
                                          golden_scenario, anna_profile):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    got = client.get(f"/sessions/{sid}/recommendations", params={"n": 5}).json()

    estimates = infer_features(
        [r for r in golden_scenario.readings], anna_profile, tick_ts=58)
    specs = default_specs()
    pure = blend_hybrid(specs, default_weights_from_survey(specs), estimates,
                        catalog, n=5, tick_ts=58)
    assert got["entries"] == [
        {"track_id": tid, "score": score} for tid, score in pure.entries]
    assert [s["score"] for s in got["entries"]] == sorted(
        (s["score"] for s in got["entries"]), reverse=True)
    assert len(got["entries"]) == 5


def test_recommendations_n_validvia(client):
    sid = _open(client)
    resp = client.get(f"/sessions/{sid}/recommendations", params={"n": 0})
    assert resp.status_code == 422


def test_update_weights_zeroing_mood_matches_engine(client, anna_readings, catalog):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    resp = client.put(f"/sessions/{sid}/weights",
                      json={"user_weights": {"rec_mood": 0.0}})
    assert resp.status_code == 200
    got = client.get(f"/sessions/{sid}/recommendations", params={"n": 12}).json()

    specs = default_specs()
    weights = default_weights_from_survey(specs).user_weights
    merged = {k: (0.0 if k == "rec_mood" else float(v)) for k, v in weights.items()}
    from ephemera.recommenders import HybridWeights
    from ephemera.feature_inference import infer_features as infer
    estimates = infer([r for r in anna_readings_to_objects(anna_readings)],
                      profile_from_json(PROFILE), tick_ts=58)
    pure = blend_hybrid(specs, HybridWeights(merged), estimates, catalog,
                        n=12, tick_ts=58)
    assert got["entries"] == [
        {"track_id": tid, "score": score} for tid, score in pure.entries]


def anna_readings_to_objects(readings_json):
    from ephemera.sensor_model import reading_from_json
    return [reading_from_json(obj) for obj in readings_json]


def test_update_weights_uniform_scaling_keeps_ranking(client, anna_readings):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    before = client.get(f"/sessions/{sid}/recommendations", params={"n": 12}).json()
    config = client.get(f"/sessions/{sid}/config").json()
    doubled = {k: 2 * v for k, v in config["weights"]["user_weights"].items()}
    client.put(f"/sessions/{sid}/weights", json={"user_weights": doubled})
    after = client.get(f"/sessions/{sid}/recommendations", params={"n": 12}).json()
    assert after == before


@pytest.mark.parametrize("bad", [
    {"rec_mood": -0.5},
    {"rec_unheard_of": 1.0},
])
def test_update_weights_rejects_bad_entries(client, bad):
    sid = _open(client)
    resp = client.put(f"/sessions/{sid}/weights", json={"user_weights": bad})
    assert resp.status_code == 422


def test_update_weights_rejects_all_zero(client):
    sid = _open(client)
    zeros = {f"rec_{f.value}": 0.0 for f in FeatureKind}
    zeros["rec_ambience"] = 0.0
    resp = client.put(f"/sessions/{sid}/weights", json={"user_weights": zeros})
    assert resp.status_code == 422


def test_fault_injection_drops_future_readings(client, anna_readings):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    resp = client.post(f"/sessions/{sid}/faults", json={
        "drops": [{"source_id": "place_stub", "from_ts": 0, "to_ts": 10_000},
                  {"source_id": "calendar", "from_ts": 0, "to_ts": 10_000}]})
    assert resp.status_code == 200
    # re-send the same tick's readings; location sources now get dropped
    shifted = []
    for obj in anna_readings:
        obj = json.loads(json.dumps(obj))
        obj["ts"] += 60
        if "calendar_entry" in obj["payload"]:
            obj["payload"]["calendar_entry"]["to_ts"] += 3600
        shifted.append(obj)
    client.post(f"/sessions/{sid}/events", json={"readings": shifted})
    ctx = client.get(f"/sessions/{sid}/context").json()
    statuses = {e["feature"]: e["status"] for e in ctx["estimates"]}
    assert statuses["location"] == "MISSING"
    assert statuses["activity"] == "OK"  # accelerometer still covers it


def test_fault_injection_empty_plan_is_noop(client, anna_readings):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    before = client.get(f"/sessions/{sid}/context").json()
    resp = client.post(f"/sessions/{sid}/faults", json={"drops": [], "corruptions": []})
    assert resp.status_code == 200
    assert client.get(f"/sessions/{sid}/context").json() == before


def test_fault_injection_unknown_source_rejected(client, anna_readings):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    resp = client.post(f"/sessions/{sid}/faults", json={
        "drops": [{"source_id": "ghost", "from_ts": 0, "to_ts": 1}]})
    assert resp.status_code == 422


def test_fault_injection_drop_all_sources(client, anna_readings, golden_scenario):
    sid = _open(client)
    client.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
    drops = [{"source_id": s, "from_ts": 0, "to_ts": 10_000}
             for s in golden_scenario.source_ids()]
    client.post(f"/sessions/{sid}/faults", json={"drops": drops})
    shifted = []
    for obj in anna_readings:
        obj = json.loads(json.dumps(obj))
        obj["ts"] += 120
        shifted.append(obj)
    client.post(f"/sessions/{sid}/events", json={"readings": shifted})
    # everything in the new window was dropped, so the old context stands;
    # there is no new tick at all
    ctx = client.get(f"/sessions/{sid}/context").json()
    assert ctx["tick_ts"] == 58


def test_sessions_are_isolated(client, anna_readings):
    a = _open(client, session_id="a")
    b = _open(client, session_id="b")
    client.post(f"/sessions/{a}/events", json={"readings": anna_readings})
    ctx_b = client.get(f"/sessions/{b}/context").json()
    assert ctx_b["sentence"] == "Unknown context"
    client.put(f"/sessions/{a}/weights", json={"user_weights": {"rec_mood": 0.0}})
    config_b = client.get(f"/sessions/{b}/config").json()
    assert config_b["weights"]["user_weights"]["rec_mood"] == pytest.approx(97 / 103)


def test_play_events_append_history_and_persist(client, anna_readings, tmp_path):
    sid = _open(client)
    plays = [{"source_id": "player", "ts": 1,
              "payload": {"play_event": {"track_id": "t03"}}},
             {"source_id": "player", "ts": 2,
              "payload": {"play_event": {"track_id": "t10"}}}]
    resp = client.post(f"/sessions/{sid}/events", json={"readings": plays})
    assert resp.json()["played"] == 2
    stored = json.loads((tmp_path / "users" / "anna.json").read_text())
    assert stored["history"] == ["t03", "t10"]
    assert stored["profile"]["user_id"] == "anna"


def test_restart_reproduces_recommendations(catalog, tmp_path, anna_readings):
    app1 = create_app(catalog=catalog, data_dir=tmp_path)
    with TestClient(app1) as c1:
        sid = c1.post("/sessions", json={"profile": PROFILE}).json()["session_id"]
        c1.post(f"/sessions/{sid}/events", json={"readings": [
            {"source_id": "player", "ts": 1,
             "payload": {"play_event": {"track_id": "t05"}}}]})
        c1.post(f"/sessions/{sid}/events", json={"readings": anna_readings})
        first = c1.get(f"/sessions/{sid}/recommendations", params={"n": 8}).json()

    app2 = create_app(catalog=catalog, data_dir=tmp_path)
    with TestClient(app2) as c2:
        sid2 = c2.post("/sessions", json={"profile": PROFILE}).json()["session_id"]
        c2.post(f"/sessions/{sid2}/events", json={"readings": anna_readings})
        second = c2.get(f"/sessions/{sid2}/recommendations", params={"n": 8}).json()
    assert first == second


def test_malformed_reading_rejected(client):
    sid = _open(client)
    resp = client.post(f"/sessions/{sid}/events", json={
        "readings": [{"source_id": "x", "ts": -5,
                      "payload": {"moisture_level": {"value": 0.5}}}]})
    assert resp.status_code == 422
    assert "readings[0]" in resp.json()["detail"]


def test_catalog_endpoint(client, catalog):
    body = client.get("/catalog").json()
    assert len(body["tracks"]) == len(catalog)
