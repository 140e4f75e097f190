"""Session-based HTTP service over the inference and recommendation engine.

The engine core is pure; all state lives in per-session objects guarded by a
lock, so a concurrent read sees either the old or the new snapshot, never a
mix.  Profiles and listening history persist as JSON files under the data
directory, keyed by user id.

Endpoints (JSON in and out):
  POST /sessions                      open a session, returns {session_id}
  POST /sessions/{id}/events          ingest readings, recompute latest tick
  GET  /sessions/{id}/context         current ephemeral context
  GET  /sessions/{id}/recommendations?n=10
  PUT  /sessions/{id}/weights         merge user weights
  POST /sessions/{id}/faults          set the session fault plan
  GET  /sessions/{id}/config          vocab, specs, weights
  GET  /catalog

Errors: 404 {"error","detail"} for unknown sessions, 422 for validation.
"""

from __future__ import annotations

import json
import os
import re
import threading
import uuid
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .context_builder import (
    ContextVocabulary,
    EphemeralContext,
    build_context,
    context_to_json,
    empty_context,
    vocabulary_from_json,
    vocabulary_to_json,
)
from .feature_inference import (
    FeatureEstimate,
    FeatureKind,
    UserProfile,
    infer_features,
    profile_from_json,
    profile_to_json,
)
from .recommenders import (
    Catalog,
    HybridWeights,
    RecommendationList,
    RecommenderSpec,
    blend_hybrid,
    catalog_to_json,
    default_specs,
    default_weights_from_survey,
    load_catalog,
    recommendations_to_json,
    spec_to_json,
    specs_from_json,
    weights_to_json,
)
from .sensor_model import (
    FaultPlan,
    PlayEvent,
    ScenarioError,
    SensorReading,
    apply_plan_to_readings,
    fault_plan_from_json,
    reading_from_json,
    window_readings,
)

DEFAULT_TICK_SECONDS = 60
_USER_ID_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class ApiError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


def _bad_request(detail: str) -> ApiError:
    return ApiError(422, "validation_error", detail)


def _unknown_session(session_id: str) -> ApiError:
    return ApiError(404, "unknown_session", f"no session {session_id!r}")


@dataclass
class Session:
    session_id: str
    profile: UserProfile
    weights: HybridWeights
    vocab: ContextVocabulary
    specs: tuple[RecommenderSpec, ...]
    tick_seconds: int = DEFAULT_TICK_SECONDS
    buffer: list[SensorReading] = field(default_factory=list)
    seen_sources: set[str] = field(default_factory=set)
    fault_plan: Optional[FaultPlan] = None
    last_estimates: Optional[dict[FeatureKind, FeatureEstimate]] = None
    last_context: Optional[EphemeralContext] = None
    history: list[str] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class UserStore:
    """JSON-file persistence for profiles and listening history."""

    def __init__(self, root: Path):
        self.root = Path(root) / "users"
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, user_id: str) -> Path:
        return self.root / f"{user_id}.json"

    def load_history(self, user_id: str) -> list[str]:
        path = self._path(user_id)
        if not path.exists():
            return []
        data = json.loads(path.read_text(encoding="utf-8"))
        return [str(t) for t in data.get("history", [])]

    def save(self, profile: UserProfile, history: list[str]) -> None:
        payload = {"profile": profile_to_json(profile), "history": history}
        self._path(profile.user_id).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")


def _bundled_catalog() -> Catalog:
    text = resources.files("ephemera.data").joinpath("catalog.json").read_text("utf-8")
    return load_catalog(text)


def resolve_catalog(path: Optional[str] = None) -> Catalog:
    path = path or os.environ.get("EPHEMERA_CATALOG")
    if path:
        return load_catalog(Path(path).read_text(encoding="utf-8"))
    return _bundled_catalog()


def resolve_data_dir(path=None) -> Path:
    return Path(path or os.environ.get("EPHEMERA_DATA_DIR") or "ephemera_data")


def create_app(catalog: Optional[Catalog] = None, data_dir=None) -> FastAPI:
    app = FastAPI(title="ephemera", docs_url=None, redoc_url=None)
    # the browser control panel is served statically from anywhere
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.catalog = catalog if catalog is not None else resolve_catalog()
    app.state.store = UserStore(resolve_data_dir(data_dir))
    app.state.sessions = {}
    app.state.registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.error, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"error": "validation_error",
                                     "detail": str(exc.errors())})

    def get_session(session_id: str) -> Session:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise _unknown_session(session_id)
        return session

    @app.post("/sessions")
    def open_session(body: dict):
        profile_obj = body.get("profile")
        if not isinstance(profile_obj, dict):
            raise _bad_request("body must include a profile object")
        try:
            profile = profile_from_json(profile_obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise _bad_request(f"invalid profile: {exc}") from exc
        if not _USER_ID_RE.match(profile.user_id):
            raise _bad_request(f"invalid user_id {profile.user_id!r}")

        try:
            if body.get("vocab") is not None:
                vocab = vocabulary_from_json(body["vocab"])
            else:
                vocab = ContextVocabulary.default()
            if body.get("specs") is not None:
                specs = tuple(specs_from_json(body["specs"]))
            else:
                specs = tuple(default_specs())
            if body.get("weights") is not None:
                user_weights = {str(k): float(v) for k, v in
                                body["weights"].get("user_weights", {}).items()}
                _check_rec_ids(user_weights, specs)
                weights = HybridWeights(user_weights=user_weights)
            else:
                weights = default_weights_from_survey(specs)
        except (KeyError, TypeError, ValueError) as exc:
            raise _bad_request(str(exc)) from exc

        session_id = body.get("session_id") or uuid.uuid4().hex[:12]
        session_id = str(session_id)
        with app.state.registry_lock:
            if session_id in app.state.sessions:
                raise _bad_request(f"session {session_id!r} already exists")
            session = Session(session_id=session_id, profile=profile,
                              weights=weights, vocab=vocab, specs=specs)
            session.history = app.state.store.load_history(profile.user_id)
            app.state.sessions[session_id] = session
        app.state.store.save(profile, session.history)
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/events")
    def ingest_events(session_id: str, body: dict):
        session = get_session(session_id)
        raw = body.get("readings")
        if not isinstance(raw, list):
            raise _bad_request("body must include a readings list")
        readings: list[SensorReading] = []
        for i, obj in enumerate(raw):
            try:
                readings.append(reading_from_json(obj, where=f"readings[{i}]"))
            except ScenarioError as exc:
                raise _bad_request(str(exc)) from exc

        with session.lock:
            if session.fault_plan is not None:
                readings = list(apply_plan_to_readings(readings, session.fault_plan))
            plays = [r.payload.track_id for r in readings
                     if isinstance(r.payload, PlayEvent)]
            sensed = [r for r in readings if not isinstance(r.payload, PlayEvent)]
            if sensed:
                # compute the new snapshot fully before touching session state
                buffer = session.buffer + sensed
                tick_ts = max(r.timestamp for r in buffer)
                window = [r for r in buffer
                          if tick_ts - session.tick_seconds < r.timestamp <= tick_ts]
                deduped = window_readings(window, tick_ts, session.tick_seconds)
                estimates = infer_features(deduped, session.profile,
                                           tick_ts=tick_ts,
                                           vocab=session.vocab.values)
                try:
                    context = build_context(estimates, session.vocab, tick_ts)
                except ValueError as exc:
                    raise _bad_request(str(exc)) from exc
                session.buffer = window
                session.last_estimates = estimates
                session.last_context = context
            session.seen_sources.update(r.source_id for r in readings)
            if plays:
                session.history.extend(plays)
                app.state.store.save(session.profile, session.history)
            tick = session.last_context.tick_ts if session.last_context else 0
        return {"tick_ts": tick, "buffered": len(sensed), "played": len(plays)}

    @app.get("/sessions/{session_id}/context")
    def current_context(session_id: str):
        session = get_session(session_id)
        with session.lock:
            context = session.last_context or empty_context()
            return context_to_json(context)

    @app.get("/sessions/{session_id}/recommendations")
    def current_recommendations(session_id: str, n: int = 10):
        session = get_session(session_id)
        if n < 1:
            raise _bad_request(f"n must be >= 1, got {n}")
        with session.lock:
            if session.last_estimates is None:
                return recommendations_to_json(
                    RecommendationList(tick_ts=0, entries=(), active_rec_ids=()))
            recs = blend_hybrid(session.specs, session.weights,
                                session.last_estimates, app.state.catalog,
                                n=n, tick_ts=session.last_context.tick_ts)
            return recommendations_to_json(recs)

    @app.put("/sessions/{session_id}/weights")
    def update_weights(session_id: str, body: dict):
        session = get_session(session_id)
        incoming = body.get("user_weights")
        if not isinstance(incoming, dict) or not incoming:
            raise _bad_request("body must include a non-empty user_weights map")
        with session.lock:
            merged = dict(session.weights.user_weights)
            for rec_id, value in incoming.items():
                try:
                    merged[str(rec_id)] = float(value)
                except (TypeError, ValueError) as exc:
                    raise _bad_request(f"weight for {rec_id!r}: {exc}") from exc
            _check_rec_ids(merged, session.specs)
            try:
                session.weights = HybridWeights(user_weights=merged)
            except ValueError as exc:
                raise _bad_request(str(exc)) from exc
        return {"ok": True, "user_weights": weights_to_json(session.weights)["user_weights"]}

    @app.post("/sessions/{session_id}/faults")
    def inject_faults(session_id: str, body: dict):
        session = get_session(session_id)
        try:
            plan = fault_plan_from_json(body)
        except (KeyError, TypeError, ValueError, ScenarioError) as exc:
            raise _bad_request(str(exc)) from exc
        with session.lock:
            known = session.seen_sources
            for entry in (*plan.drops, *plan.corruptions):
                if entry.source_id not in known:
                    raise _bad_request(f"unknown source_id {entry.source_id!r} "
                                       f"(not seen in this session)")
            session.fault_plan = plan
        return {"ok": True, "drops": len(plan.drops),
                "corruptions": len(plan.corruptions)}

    @app.get("/sessions/{session_id}/config")
    def session_config(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {
                "vocab": vocabulary_to_json(session.vocab),
                "specs": [spec_to_json(s) for s in session.specs],
                "weights": weights_to_json(session.weights),
            }

    @app.get("/catalog")
    def get_catalog():
        return catalog_to_json(app.state.catalog)

    return app


def _check_rec_ids(user_weights, specs) -> None:
    known = {spec.rec_id for spec in specs}
    unknown = sorted(set(user_weights) - known)
    if unknown:
        raise _bad_request(f"unknown rec_id: {', '.join(unknown)}")
