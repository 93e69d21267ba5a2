"""HTTP facade for interactive sessions.

Endpoints (all under /v1, JSON):

  GET  /v1/health                                -> {entities, edges, users}
  POST /v1/users/{uid}/feedback                  -> 204, body {predicate, target}
  GET  /v1/users/{uid}/recommendations?k=10      -> [ApiRecommendation]
  GET  /v1/users/{uid}/explanations/{movie}      -> [reason]
  GET  /v1/entities?q=<prefix>&kind=<kind>       -> [{id, name, kind}]

The knowledge graph is loaded once at startup; feedback is appended to a
JSONL log before it is acknowledged, so replaying the log reproduces the
service state byte for byte. Unknown users simply have no feedback yet:
reads return empty lists, the first feedback POST creates the user.
"""

from __future__ import annotations

import threading
import time

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from .kg import (
    FEEDBACK_PREDICATES,
    MOVIE_PREDICATES,
    FeedbackFact,
    KnowledgeGraph,
    append_feedback_log,
)
from .recommend import SolverParams, Reason, explain, recommend, to_api
from .rules import RuleSet, default_rules

MAX_K = 100
MAX_SEARCH_RESULTS = 20


def create_app(
    kg: KnowledgeGraph,
    rules: RuleSet | None = None,
    params: SolverParams = SolverParams(),
    feedback_log: str | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    """Build the service app around a loaded graph.

    When ``feedback_log`` is None the append log is skipped (in-memory only);
    the serve command always passes a path. ``static_dir``, when given, is
    served at the root so the web client can run same-origin.
    """
    rules = rules or default_rules()
    app = FastAPI(title="kgrec", version="0.1.0")
    write_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request"})

    @app.get("/v1/health")
    def health():
        users = sum(1 for e in kg.entities.values() if e.kind == "user")
        return {"entities": len(kg.entities), "edges": kg.edge_count, "users": users}

    @app.post("/v1/users/{uid}/feedback", status_code=204)
    async def post_feedback(uid: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body is not valid JSON")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        predicate = body.get("predicate")
        target = body.get("target")
        if not isinstance(predicate, str) or not isinstance(target, str):
            raise HTTPException(status_code=400, detail="predicate and target are required")
        if predicate not in FEEDBACK_PREDICATES:
            raise HTTPException(status_code=400, detail=f"unknown predicate {predicate!r}")
        if target not in kg.entities:
            raise HTTPException(status_code=404, detail=f"unknown target {target!r}")
        if predicate in MOVIE_PREDICATES and not kg.entities[target].is_movie:
            raise HTTPException(
                status_code=422,
                detail=f"{predicate} requires a movie target, "
                f"{target!r} has kind {kg.entities[target].kind!r}",
            )
        fact = FeedbackFact(user=uid, predicate=predicate, target=target, ts=time.time())
        with write_lock:
            kg.ensure_user(uid)
            if feedback_log is not None:
                append_feedback_log(feedback_log, fact)  # logged before the 204
            kg.record_feedback(fact)
        return Response(status_code=204)

    @app.get("/v1/users/{uid}/recommendations")
    def get_recommendations(uid: str, k: int = 10):
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        k = min(k, MAX_K)
        if uid not in kg.entities:
            return []  # a new user has no feedback
        return to_api(kg, recommend(uid, k, kg, rules, params))

    @app.get("/v1/users/{uid}/explanations/{movie}")
    def get_explanations(uid: str, movie: str):
        if movie not in kg.entities:
            raise HTTPException(status_code=404, detail=f"unknown movie {movie!r}")
        if not kg.entities[movie].is_movie:
            raise HTTPException(
                status_code=422, detail=f"{movie!r} has kind {kg.entities[movie].kind!r}"
            )
        if uid not in kg.entities:
            return []
        reasons = explain(uid, movie, kg, rules, params)
        return [_reason_json(kg, r) for r in reasons]

    @app.get("/v1/entities")
    def search_entities(q: str, kind: str | None = None):
        if not q:
            raise HTTPException(status_code=400, detail="q must be non-empty")
        prefix = q.lower()
        hits = [
            e
            for e in kg.entities.values()
            if e.name.lower().startswith(prefix) and (kind is None or e.kind == kind)
        ]
        hits.sort(key=lambda e: (e.name, e.id))
        return [{"id": e.id, "name": e.name, "kind": e.kind} for e in hits[:MAX_SEARCH_RESULTS]]

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so the /v1 routes keep precedence
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _reason_json(kg: KnowledgeGraph, reason: Reason) -> dict:
    return {
        "entity": reason.entity,
        "name": kg.entity(reason.entity).name,
        "contribution": reason.contribution,
        "polarity": reason.polarity,
    }
