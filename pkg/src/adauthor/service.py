"""HTTP surface for drafts, on-demand queries, and rating capture.

Author identity is an opaque X-Author-Id header; there is no auth layer.
All draft writes go through the store's compare-and-set, so a stale
expected_version surfaces as 409 and the caller refetches.
"""

from __future__ import annotations

import logging
from typing import Optional

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .config import PipelineConfig
from .drafts import (AI_AUTHOR, DraftStore, FileStorage, Revision, RevisionOp,
                     compute_attribution, event_to_dict)
from .errors import (AdAuthorError, Conflict, Forbidden, NotFound,
                     RejectedWithViolations, Unavailable, ValidationFailed)
from .evaluation import RatingRecord, RatingStore
from .model import MediaAsset, export_track, export_webvtt
from .pipeline import (PipelineResult, adapt_context_from_result, run_pipeline,
                       write_outputs)
from .providers import TtsProvider, VlmProvider, build_tts, build_vlm
from .queries import AdaptQuery, answer_question, describe_now

logger = logging.getLogger(__name__)


class AssetIn(BaseModel):
    asset_id: str
    title: str = ""
    category: str
    duration: float
    fps: float
    metadata: dict[str, str] = Field(default_factory=dict)


class AssetRegistration(BaseModel):
    asset: AssetIn
    paths: dict[str, str] = Field(default_factory=dict)


class OpIn(BaseModel):
    event_id: str
    kind: str
    before: object = None
    after: object = None


class RevisionIn(BaseModel):
    expected_version: int
    ops: list[OpIn]


class NudgeIn(BaseModel):
    expected_version: int
    frames: int


class CollabIn(BaseModel):
    enabled: bool


class DescribeIn(BaseModel):
    asset_id: str
    time: float


class QuestionIn(BaseModel):
    asset_id: str
    time: float
    question: str


class RatingIn(BaseModel):
    rater_id: str
    video_id: str
    label: str
    scores: dict[str, int]
    comment: str = ""


class FeedbackIn(BaseModel):
    rating: int
    comment: str = ""


def _draft_view(draft) -> dict:
    return {
        "draft_id": draft.draft_id,
        "asset_id": draft.asset_id,
        "version": draft.version,
        "collab_enabled": draft.collab_enabled,
        "published": draft.published,
        "authors": draft.authors,
        "track": {
            "track_id": draft.current.track_id,
            "schema_version": draft.current.schema_version,
            "events": [event_to_dict(ev) for ev in draft.current.events],
        },
    }


def create_app(
    config: Optional[PipelineConfig] = None,
    store: Optional[DraftStore] = None,
    vlm: Optional[VlmProvider] = None,
    tts: Optional[TtsProvider] = None,
) -> FastAPI:
    app = FastAPI(title="adauthor")
    config = config or PipelineConfig()
    if store is None:
        storage = FileStorage(config.resolve(config.storage_dir))
        store = DraftStore(storage=storage)

    app.state.config = config
    app.state.store = store
    app.state.ratings = RatingStore()
    app.state.adapt_contexts = {}
    app.state.asset_paths = {}
    app.state.query_log = []
    app.state.vlm = vlm
    app.state.tts = tts

    def get_vlm() -> VlmProvider:
        if app.state.vlm is None:
            app.state.vlm = build_vlm(config.vlm, base_dir=config.base_dir)
        return app.state.vlm

    def get_tts() -> TtsProvider:
        if app.state.tts is None:
            app.state.tts = build_tts(config.tts, wpm=config.optimizer.wpm)
        return app.state.tts

    @app.exception_handler(AdAuthorError)
    async def domain_error(request: Request, exc: AdAuthorError):
        status = 500
        if isinstance(exc, NotFound):
            status = 404
        elif isinstance(exc, Conflict):
            status = 409
        elif isinstance(exc, Forbidden):
            status = 403
        elif isinstance(exc, (ValidationFailed, RejectedWithViolations)):
            status = 422
        elif isinstance(exc, Unavailable):
            status = 503
        body = {"detail": str(exc)}
        violations = getattr(exc, "violations", None)
        if violations:
            body["violations"] = [
                {"event_id": v.event_id, "rule": v.rule, "detail": v.detail}
                for v in violations
            ]
        return JSONResponse(status_code=status, content=body)

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz():
        return "ok"

    @app.post("/assets")
    async def register_asset(body: AssetRegistration):
        asset = MediaAsset(**body.asset.model_dump())
        store.register_asset(asset)
        app.state.asset_paths[asset.asset_id] = dict(body.paths)
        return {"asset_id": asset.asset_id}

    @app.post("/assets/{asset_id}/genad")
    async def generate_draft(asset_id: str):
        asset = store.asset(asset_id)
        paths = app.state.asset_paths.get(asset_id, {})
        run_config = config
        if paths:
            from dataclasses import replace as dc_replace
            from .config import PathsConfig
            run_config = dc_replace(config, paths=PathsConfig(**paths))
        try:
            result: PipelineResult = run_pipeline(run_config, asset,
                                                  vlm=get_vlm(), tts=get_tts())
        except Exception as exc:
            logger.exception("generation pipeline failed")
            raise Unavailable(str(exc)) from exc
        draft = store.create_draft(asset, result.track)
        app.state.adapt_contexts[asset_id] = adapt_context_from_result(result)
        write_outputs(result, run_config.resolve(run_config.output_dir))
        return {"draft_id": draft.draft_id, "version": draft.version}

    @app.get("/drafts/{draft_id}")
    async def get_draft(draft_id: str):
        return _draft_view(store.get(draft_id))

    @app.post("/drafts/{draft_id}/revisions")
    async def post_revision(draft_id: str, body: RevisionIn,
                            x_author_id: str = Header(default="anonymous")):
        ops = tuple(RevisionOp(op.event_id, op.kind, op.before, op.after)
                    for op in body.ops)
        version = store.apply_revision(
            draft_id, body.expected_version,
            Revision(author_id=x_author_id, ops=ops))
        return {"version": version}

    @app.post("/drafts/{draft_id}/events/{event_id}/nudge")
    async def nudge(draft_id: str, event_id: str, body: NudgeIn,
                    x_author_id: str = Header(default="anonymous")):
        start = store.nudge_event(draft_id, body.expected_version, event_id,
                                  body.frames, author_id=x_author_id)
        return {"start_time": start, "version": store.get(draft_id).version}

    @app.post("/drafts/{draft_id}/collab")
    async def set_collab(draft_id: str, body: CollabIn,
                         x_author_id: str = Header(default="anonymous")):
        draft = store.set_collab(draft_id, body.enabled, author_id=x_author_id)
        return {"collab_enabled": draft.collab_enabled}

    @app.post("/drafts/{draft_id}/publish")
    async def publish(draft_id: str,
                      x_author_id: str = Header(default="anonymous")):
        draft = store.publish(draft_id, author_id=x_author_id)
        return {"published": draft.published}

    @app.delete("/drafts/{draft_id}/publish")
    async def unpublish(draft_id: str,
                        x_author_id: str = Header(default="anonymous")):
        draft = store.unpublish(draft_id, author_id=x_author_id)
        return {"published": draft.published}

    @app.get("/drafts/{draft_id}/attribution")
    async def attribution(draft_id: str,
                          x_author_id: str = Header(default="anonymous")):
        draft = store.get(draft_id)
        if not draft.published:
            allowed = set(draft.authors) | {AI_AUTHOR}
            if draft.original_human_author is not None and x_author_id not in allowed:
                raise Forbidden("attribution is public only once published")
        return {"shares": compute_attribution(draft).shares}

    @app.get("/drafts/{draft_id}/export")
    async def export(draft_id: str, format: str = Query(default="track")):
        draft = store.get(draft_id)
        if format == "vtt":
            asset = store.asset(draft.asset_id)
            return PlainTextResponse(export_webvtt(draft.current, asset),
                                     media_type="text/vtt")
        if format == "track":
            return PlainTextResponse(export_track(draft.current),
                                     media_type="application/json")
        return JSONResponse(status_code=400,
                            content={"detail": f"unknown format {format!r}"})

    @app.post("/drafts/{draft_id}/feedback")
    async def feedback(draft_id: str, body: FeedbackIn):
        store.record_feedback(draft_id, body.rating, body.comment)
        return {"stored": True}

    def _context_for(asset_id: str):
        ctx = app.state.adapt_contexts.get(asset_id)
        if ctx is None:
            raise NotFound(f"no generation context for asset {asset_id}")
        return ctx

    @app.post("/adapt/describe")
    async def adapt_describe(body: DescribeIn):
        ctx = _context_for(body.asset_id)
        reply = describe_now(ctx, body.time, get_vlm(), tts=get_tts())
        app.state.query_log.append(AdaptQuery(
            asset_id=body.asset_id, pause_time=body.time, kind="describe",
            reply=reply.text, latency_ms=reply.latency_ms))
        return {"text": reply.text, "audio_uri": reply.audio_uri}

    @app.post("/adapt/question")
    async def adapt_question(body: QuestionIn):
        if not body.question.strip():
            return JSONResponse(status_code=400,
                                content={"detail": "question must be non-empty"})
        ctx = _context_for(body.asset_id)
        reply = answer_question(ctx, body.time, body.question, get_vlm(),
                                tts=get_tts())
        app.state.query_log.append(AdaptQuery(
            asset_id=body.asset_id, pause_time=body.time, kind="question",
            question_text=body.question, reply=reply.text,
            latency_ms=reply.latency_ms))
        return {"text": reply.text, "audio_uri": reply.audio_uri}

    @app.post("/ratings")
    async def post_rating(body: RatingIn):
        record = RatingRecord(
            rater_id=body.rater_id, video_id=body.video_id,
            condition_label=body.label, scores=body.scores, comment=body.comment)
        stored_id = app.state.ratings.record_rating(record)
        return {"id": stored_id}

    return app


__all__ = ["create_app"]
