"""Stateful HTTP session service over the engine.

A session holds one observation vector. Posting findings mutates it (and
returns the recomputed differential); what-if previews and text extraction
are observably pure. All scoring happens here on the server, never in a
client: the UI renders responses verbatim.

Endpoints (JSON bodies, UTF-8):
    POST /v1/sessions                             create a session
    GET  /v1/codex                                codex metadata and listings
    GET  /v1/sessions/{sid}/differential?k=K      current ranked differential
    POST /v1/sessions/{sid}/findings              assert a finding, rerank
    POST /v1/sessions/{sid}/whatif                preview without mutating
    GET  /v1/sessions/{sid}/explanations/{hid}    trace + templated text
    POST /v1/sessions/{sid}/extract               mention/match proposals

Errors use {"error": {"code", "message"}} with the matching HTTP status.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .codex import Codex, EvokingMatrix
from .errors import (
    ExtractorContractError,
    ExtractorTimeoutError,
    UnembeddableMentionError,
)
from .extraction import (
    ExtractorConfig,
    Mention,
    Polarity,
    extract_mentions,
    fetch_external_mentions,
)
from .normalization import (
    DEFAULT_MATCH_THRESHOLD,
    EmbeddingStore,
    MatchOutcome,
    MentionEmbedder,
    exact_feature_match,
    match_mention,
)
from .observation import (
    FindingStatus,
    ObservationVector,
    assert_finding,
    new_observation,
    observation_from_findings,
)
from .reasoning import (
    Differential,
    ScoringPolicy,
    differential_to_dict,
    rank_differential,
    render_hypothesis_explanation,
)


@dataclass
class EngineContext:
    """Everything the service needs to score and normalize."""

    codex: Codex
    policy: ScoringPolicy
    matrix: EvokingMatrix
    match_threshold: float = DEFAULT_MATCH_THRESHOLD
    embeddings: EmbeddingStore | None = None
    mention_embedder: MentionEmbedder | None = None
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)


@dataclass
class Session:
    id: str
    codex_version: str
    created_at: str
    obs: ObservationVector
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """In-memory session registry with optional JSON snapshots.

    Mutations within one session are serialized by its lock; sessions are
    independent of each other.
    """

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._guard = threading.Lock()

    def create(self, codex: Codex) -> Session:
        session = Session(
            id=secrets.token_hex(16),
            codex_version=codex.version,
            created_at=datetime.now(timezone.utc).isoformat(),
            obs=new_observation(codex),
        )
        with self._guard:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._guard:
            return self._sessions.get(session_id)

    def __len__(self) -> int:
        with self._guard:
            return len(self._sessions)

    def save(self, path: str | Path) -> None:
        with self._guard:
            sessions = list(self._sessions.values())
        doc = [
            {
                "id": s.id,
                "codex_version": s.codex_version,
                "created_at": s.created_at,
                "findings": [
                    {"feature": fid, "status": status.value}
                    for fid, status in sorted(s.obs.statuses.items())
                ],
            }
            for s in sessions
        ]
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    def load(self, path: str | Path, codex: Codex) -> int:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        restored = 0
        for entry in doc:
            if entry.get("codex_version") != codex.version:
                continue
            obs = observation_from_findings(
                codex, [(f["feature"], f["status"]) for f in entry.get("findings", [])]
            )
            session = Session(
                id=entry["id"],
                codex_version=entry["codex_version"],
                created_at=entry["created_at"],
                obs=obs,
            )
            with self._guard:
                self._sessions[session.id] = session
            restored += 1
        return restored


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class FindingBody(BaseModel):
    feature: str
    status: str


class ExtractBody(BaseModel):
    text: str


def _mention_dict(m: Mention) -> dict:
    return {"surface": m.surface, "start": m.start, "end": m.end, "polarity": m.polarity.value}


def _outcome_dict(outcome: MatchOutcome | None) -> dict:
    if outcome is None:
        return {"matched": False, "score": None, "feature": None, "method": None}
    return {
        "matched": outcome.matched,
        "score": outcome.score,
        "feature": outcome.feature_id,
        "method": outcome.method,
    }


def create_app(context: EngineContext, store: SessionStore | None = None) -> FastAPI:
    """Build the service application around one loaded codex."""
    app = FastAPI(title="abductor", version="0.1.0")
    # the explorer UI is served from a different origin than the API
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions = store if store is not None else SessionStore()
    app.state.sessions = sessions
    app.state.context = context
    codex, policy, matrix = context.codex, context.policy, context.matrix

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status, content={"error": {"code": exc.code, "message": exc.message}}
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "validation_error", "message": str(exc.errors())}},
        )

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return session

    def parse_status(value: str) -> FindingStatus:
        try:
            return FindingStatus(value)
        except ValueError:
            raise ApiError(
                422, "invalid_status", f"status must be present/absent/unknown, got {value!r}"
            ) from None

    def check_feature(feature_id: str) -> None:
        if not codex.has_feature(feature_id):
            raise ApiError(422, "unknown_feature", f"no feature {feature_id!r} in codex")

    def differential_for(obs: ObservationVector) -> Differential:
        return rank_differential(codex, obs, matrix, policy)

    @app.post("/v1/sessions", status_code=201)
    def create_session() -> dict:
        session = sessions.create(codex)
        return {
            "id": session.id,
            "codex_version": session.codex_version,
            "created_at": session.created_at,
        }

    @app.get("/v1/codex")
    def codex_metadata() -> dict:
        return {
            "codex_version": codex.version,
            "domain_label": codex.domain_label,
            "n": codex.n,
            "m": codex.m,
            "features": [
                {"id": f.id, "name": f.name, "synonyms": list(f.synonyms)} for f in codex.features
            ],
            "hypotheses": [
                {
                    "id": h.id,
                    "name": h.name,
                    "features": [f.id for f in codex.features if f.id in h.feature_ids],
                }
                for h in codex.hypotheses
            ],
            "policy": policy.to_dict(),
        }

    @app.get("/v1/sessions/{session_id}/differential")
    def get_differential(session_id: str, k: int | None = None) -> dict:
        session = get_session(session_id)
        if k is not None and k < 1:
            raise ApiError(422, "invalid_k", f"k must be >= 1, got {k}")
        return differential_to_dict(differential_for(session.obs), top_k=k)

    @app.post("/v1/sessions/{session_id}/findings")
    def post_finding(session_id: str, body: FindingBody) -> dict:
        session = get_session(session_id)
        check_feature(body.feature)
        status = parse_status(body.status)
        with session.lock:
            session.obs = assert_finding(codex, session.obs, body.feature, status)
            obs = session.obs
        return differential_to_dict(differential_for(obs))

    @app.post("/v1/sessions/{session_id}/whatif")
    def what_if(session_id: str, body: FindingBody) -> dict:
        session = get_session(session_id)
        check_feature(body.feature)
        status = parse_status(body.status)
        preview = assert_finding(codex, session.obs, body.feature, status)
        return differential_to_dict(differential_for(preview))

    @app.get("/v1/sessions/{session_id}/explanations/{hypothesis_id}")
    def get_explanation(session_id: str, hypothesis_id: str) -> dict:
        session = get_session(session_id)
        if not codex.has_hypothesis(hypothesis_id):
            raise ApiError(404, "unknown_hypothesis", f"no hypothesis {hypothesis_id!r} in codex")
        d = differential_for(session.obs)
        entry = d.entry(hypothesis_id)
        return {
            "hypothesis": hypothesis_id,
            "rank": d.rank_of(hypothesis_id),
            "raw_score": entry.raw_score,
            "confidence": entry.confidence,
            "contributions": [
                {"feature": c.feature_id, "term": c.term.value, "delta": c.delta}
                for c in entry.contributions
            ],
            "text": render_hypothesis_explanation(d, codex, hypothesis_id),
        }

    @app.post("/v1/sessions/{session_id}/extract")
    def post_extract(session_id: str, body: ExtractBody) -> dict:
        get_session(session_id)  # 404 check only; extraction never mutates
        if context.extractor.mode == "external":
            try:
                mentions = fetch_external_mentions(body.text, context.extractor)
            except (ExtractorTimeoutError, ExtractorContractError) as exc:
                raise ApiError(502, "extractor_failure", str(exc)) from exc
        else:
            mentions = extract_mentions(body.text, codex, context.extractor)

        proposals = []
        for mention in mentions:
            outcome: MatchOutcome | None
            if context.embeddings is not None:
                try:
                    outcome = match_mention(
                        mention,
                        context.embeddings,
                        codex,
                        threshold=context.match_threshold,
                        embedder=context.mention_embedder,
                    )
                except UnembeddableMentionError:
                    outcome = None
            else:
                feature_id = exact_feature_match(mention.surface, codex)
                outcome = (
                    MatchOutcome(mention=mention, feature_id=feature_id, score=1.0, method="exact")
                    if feature_id is not None
                    else None
                )
            suggested = (
                ("absent" if mention.polarity is Polarity.NEGATED else "present")
                if outcome is not None and outcome.matched
                else None
            )
            proposals.append(
                {
                    "mention": _mention_dict(mention),
                    "match": _outcome_dict(outcome),
                    "suggested_status": suggested,
                }
            )
        return {"proposals": proposals}

    return app
