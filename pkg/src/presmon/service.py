"""HTTP service exposing a trained model for interactive what-if use.

Stateless recommendation calls return exactly the in-process generator's
JSON; stateful sessions let a client build an ongoing case event by event
and watch the advice update. The model is immutable shared state; each
session guards its prefix with its own lock.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import NoPositivePath
from .model import ModelBundle
from .recommender import generate, positive_paths
from .schemas import AppendEventRequest, ModelInfo, RecommendRequest, SessionView

log = logging.getLogger(__name__)

NO_POSITIVE_PATH_MESSAGE = "no recoverable positive path"


class Session:
    def __init__(self):
        self.id = uuid.uuid4().hex
        self.prefix: list[str] = []
        now = datetime.now(timezone.utc).isoformat()
        self.created_at = now
        self.updated_at = now
        self.lock = threading.Lock()


def create_app(
    model: ModelBundle | None = None,
    model_path: str | Path | None = None,
    cors_origins: tuple[str, ...] = ("*",),
    sessions_file: str | Path | None = None,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        _snapshot_sessions(app)

    app = FastAPI(
        title="presmon",
        description="temporal-relation recommendations for ongoing cases",
        lifespan=lifespan,
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    if model is None and model_path is not None:
        model = ModelBundle.load(model_path)
    app.state.model = model
    app.state.sessions: dict[str, Session] = {}
    app.state.sessions_file = Path(sessions_file) if sessions_file else None

    if app.state.sessions_file and app.state.sessions_file.exists():
        for entry in json.loads(app.state.sessions_file.read_text()):
            session = Session()
            session.id = entry["id"]
            session.prefix = list(entry["prefix"])
            session.created_at = entry["created_at"]
            session.updated_at = entry["updated_at"]
            app.state.sessions[session.id] = session

    def require_model() -> ModelBundle:
        if app.state.model is None:
            raise HTTPException(status_code=503, detail="no model loaded")
        return app.state.model

    def recommend_payload(bundle: ModelBundle, activities: list[str]) -> dict:
        result = generate(activities, bundle.tree, bundle.weights, bundle.min_path_samples)
        return result.to_json()

    @app.get("/model")
    def model_info() -> ModelInfo:
        bundle = require_model()
        return ModelInfo(
            dataset=bundle.metadata.get("dataset", ""),
            trained_at=bundle.metadata.get("trained_at", ""),
            alphabet=bundle.alphabet,
            families=bundle.families,
            lambda_weights=list(bundle.weights.as_tuple()),
            th_fit=bundle.th_fit,
            tree_depth=bundle.tree.depth,
            path_count=bundle.tree.leaf_count(),
            positive_path_count=len(positive_paths(bundle.tree, bundle.min_path_samples)),
            min_path_samples=bundle.min_path_samples,
        )

    @app.post("/recommend")
    def recommend(body: RecommendRequest):
        bundle = require_model()
        if not body.activities:
            raise HTTPException(status_code=400, detail="empty prefix")
        unknown = sorted({a for a in body.activities if a not in set(bundle.alphabet)})
        try:
            payload = recommend_payload(bundle, body.activities)
        except NoPositivePath:
            raise HTTPException(status_code=409, detail=NO_POSITIVE_PATH_MESSAGE) from None
        if unknown:
            # processed anyway: unknown activities never match any constraint
            payload = {
                **payload,
                "unknown_activities": unknown,
                "warning": f"activities outside the model alphabet: {', '.join(unknown)}",
            }
            return JSONResponse(status_code=422, content=payload)
        return JSONResponse(content=payload)

    def session_view(session: Session, bundle: ModelBundle) -> tuple[dict, int]:
        error = None
        result = None
        status = 200
        if session.prefix:
            try:
                result = recommend_payload(bundle, session.prefix)
            except NoPositivePath:
                error = NO_POSITIVE_PATH_MESSAGE
                status = 409
        unknown = sorted({a for a in session.prefix if a not in set(bundle.alphabet)})
        view = SessionView(
            id=session.id,
            prefix=list(session.prefix),
            created_at=session.created_at,
            updated_at=session.updated_at,
            result=result,
            error=error,
            unknown_activities=unknown,
        )
        return view.model_dump(), status

    def get_session(session_id: str) -> Session:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session():
        bundle = require_model()
        session = Session()
        app.state.sessions[session.id] = session
        view, _ = session_view(session, bundle)
        return JSONResponse(status_code=201, content=view)

    @app.post("/sessions/{session_id}/events")
    def append_event(session_id: str, body: AppendEventRequest):
        bundle = require_model()
        session = get_session(session_id)
        with session.lock:
            session.prefix.append(body.activity)
            session.updated_at = datetime.now(timezone.utc).isoformat()
            view, status = session_view(session, bundle)
        return JSONResponse(status_code=status, content=view)

    @app.get("/sessions/{session_id}")
    def read_session(session_id: str):
        bundle = require_model()
        session = get_session(session_id)
        with session.lock:
            view, status = session_view(session, bundle)
        return JSONResponse(status_code=status, content=view)

    return app


def _snapshot_sessions(app: FastAPI) -> None:
    if app.state.sessions_file is None:
        return
    entries = [
        {
            "id": s.id,
            "prefix": s.prefix,
            "created_at": s.created_at,
            "updated_at": s.updated_at,
        }
        for s in app.state.sessions.values()
    ]
    app.state.sessions_file.write_text(json.dumps(entries, indent=2))
    log.info("snapshotted %d sessions to %s", len(entries), app.state.sessions_file)
