"""HTTP annotation service.

Thin FastAPI layer over :class:`AnnotationStore`: open a session, fetch
the next blinded task, submit ratings / rankings / votes, and export the
unblinded records.  Served task payloads never contain system
identifiers; candidates travel under their opaque ids, re-shuffled per
session so position cannot be memorized across annotators either.

When directories are provided, the app also serves figure images under
``/figures`` and the annotation UI under ``/ui``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..rnd import derive_rng
from .store import ASPECTS, AnnotationStore, StoreError, Task

__all__ = ["create_app"]


class CreateSessionRequest(BaseModel):
    annotator_id: str = Field(min_length=1)


class CreateSessionResponse(BaseModel):
    session_id: str
    n_tasks: int


class CandidateView(BaseModel):
    candidate_id: str
    text: str


class TaskView(BaseModel):
    done: bool = False
    task_id: str | None = None
    figure_id: str | None = None
    mode: str | None = None
    title: str | None = None
    abstract: str | None = None
    image_url: str | None = None
    aspects: list[str] | None = None
    candidates: list[CandidateView] | None = None


class RatingBody(BaseModel):
    task_id: str
    values: dict[str, Annotated[int, Field(ge=1, le=5)]]
    valid: bool = True
    exclusion_reason: str | None = None


class RankingBody(BaseModel):
    task_id: str
    order: list[str]


class VoteBody(BaseModel):
    task_id: str
    worst: str


class SubmitResponse(BaseModel):
    ok: bool
    seq: int


class ExportBundle(BaseModel):
    ratings: list[dict]
    rankings: list[dict]
    votes: list[dict]


def _task_view(task: Task, session_id: str, figures_mounted: bool) -> TaskView:
    candidates = list(task.candidates)
    rng = derive_rng(0, "serve-order", session_id, task.task_id)
    rng.shuffle(candidates)
    image_url = None
    if figures_mounted and task.image_path:
        image_url = f"/figures/{task.image_path}"
    return TaskView(
        done=False,
        task_id=task.task_id,
        figure_id=task.figure_id,
        mode=task.mode,
        title=task.title,
        abstract=task.abstract,
        image_url=image_url,
        aspects=list(ASPECTS) if task.mode == "rate" else None,
        candidates=[
            CandidateView(candidate_id=c.candidate_id, text=c.text) for c in candidates
        ],
    )


def create_app(
    store: AnnotationStore,
    figures_dir: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the annotation app around a store."""
    app = FastAPI(title="figsumm annotation service")
    figures_mounted = False

    @app.get("/health")
    def health() -> dict:
        return {"ok": True, "n_tasks": len(store.tasks)}

    @app.post("/sessions", response_model=CreateSessionResponse)
    def create_session(body: CreateSessionRequest) -> CreateSessionResponse:
        try:
            session = store.create_session(body.annotator_id)
        except StoreError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return CreateSessionResponse(
            session_id=session.session_id, n_tasks=len(session.task_ids)
        )

    def _get_session(session_id: str):
        try:
            return store.get_session(session_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.get("/sessions/{session_id}/next", response_model=TaskView, response_model_exclude_none=True)
    def next_task(session_id: str) -> TaskView:
        _get_session(session_id)
        task = store.next_task(session_id)
        if task is None:
            return TaskView(done=True)
        return _task_view(task, session_id, figures_mounted)

    def _submit(session_id: str, task_id: str, kind: str, payload: dict) -> SubmitResponse:
        _get_session(session_id)
        try:
            seq = store.submit(session_id, task_id, kind, payload)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except StoreError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return SubmitResponse(ok=True, seq=seq)

    @app.post("/sessions/{session_id}/ratings", response_model=SubmitResponse)
    def submit_rating(session_id: str, body: RatingBody) -> SubmitResponse:
        payload: dict = {"values": body.values, "valid": body.valid}
        if body.exclusion_reason is not None:
            payload["exclusion_reason"] = body.exclusion_reason
        return _submit(session_id, body.task_id, "rating", payload)

    @app.post("/sessions/{session_id}/rankings", response_model=SubmitResponse)
    def submit_ranking(session_id: str, body: RankingBody) -> SubmitResponse:
        return _submit(session_id, body.task_id, "ranking", {"order": body.order})

    @app.post("/sessions/{session_id}/votes", response_model=SubmitResponse)
    def submit_vote(session_id: str, body: VoteBody) -> SubmitResponse:
        return _submit(session_id, body.task_id, "vote", {"worst": body.worst})

    @app.get("/export", response_model=ExportBundle)
    def export() -> ExportBundle:
        return ExportBundle(**store.export())

    if figures_dir is not None:
        app.mount("/figures", StaticFiles(directory=str(figures_dir)), name="figures")
        figures_mounted = True
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
