"""HTTP service for annotation collection.

Endpoints: GET /tasks/next, POST /annotations, GET /edits/{id},
GET /edits/{id}/aggregate, GET /reports/agreement, GET /export/labels,
plus static serving of edit media (/media) and the annotator UI (/app).
Reads are lock-free snapshots of the store; writes go through the store's
single-writer path.
"""

from __future__ import annotations

import io
import time
from pathlib import Path
from typing import Literal, Mapping

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import HTMLResponse, PlainTextResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .annotate import (
    LABELS_HEADER,
    AnnotationRecord,
    AnnotationStore,
    SubmissionError,
    UnknownAnnotatorError,
    aggregate,
    agreement_report,
    export_labels,
    next_task,
)
from .core import AccuracyLevel, ArtifactLevel, EditSet

ACCURACY_OPTIONS = [level.value for level in AccuracyLevel]
ARTIFACT_OPTIONS = [level.value for level in ArtifactLevel]


class AnnotationPayload(BaseModel):
    edit_id: str
    annotator_id: str
    accuracy_level: str
    contextual_feedback: str = ""
    technical_ok: bool
    technical_feedback: str = ""
    artifact_level: str
    caption_verdict: Literal["accepted", "corrected"]
    final_caption: str = Field(default="")

    def to_record(self) -> AnnotationRecord:
        try:
            accuracy = AccuracyLevel(self.accuracy_level)
            artifact = ArtifactLevel(self.artifact_level)
        except ValueError as exc:
            raise SubmissionError("invalid-level", str(exc)) from exc
        return AnnotationRecord(
            edit_id=self.edit_id,
            annotator_id=self.annotator_id,
            accuracy_level=accuracy,
            contextual_feedback=self.contextual_feedback,
            technical_ok=self.technical_ok,
            technical_feedback=self.technical_feedback,
            artifact_level=artifact,
            caption_verdict=self.caption_verdict,
            final_caption=self.final_caption,
            submitted_at=time.time(),
        )


def create_app(
    edit_set: EditSet,
    store: AnnotationStore,
    captions: Mapping[str, str] | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="editverify annotation service")
    captions = captions or {}
    edit_ids = [rec.id for rec in edit_set.records]

    def task_payload(edit_id: str) -> dict:
        rec = edit_set.by_id(edit_id)
        return {
            "edit_id": rec.id,
            "instruction": rec.instruction,
            "editor": rec.editor_tag,
            "source_url": f"/media/{rec.source_image.as_posix()}",
            "edited_url": f"/media/{rec.edited_image.as_posix()}",
            "mask_url": f"/media/{rec.edit_mask.as_posix()}",
            "prefilled_caption": captions.get(rec.id, ""),
            "accuracy_options": ACCURACY_OPTIONS,
            "artifact_options": ARTIFACT_OPTIONS,
        }

    @app.get("/tasks/next")
    def get_next_task(annotator: str = Query(...)):
        try:
            edit_id = next_task(edit_ids, store, annotator)
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        if edit_id is None:
            return {"task": None}
        return {"task": task_payload(edit_id)}

    @app.post("/annotations")
    def post_annotation(payload: AnnotationPayload):
        if payload.edit_id not in set(edit_ids):
            raise HTTPException(status_code=404, detail=f"unknown edit: {payload.edit_id}")
        try:
            count = store.submit(payload.to_record())
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except SubmissionError as exc:
            status = 409 if exc.code in ("duplicate", "edit-full") else 422
            raise HTTPException(status_code=status, detail=str(exc))
        return {"accepted": True, "submissions": count}

    @app.get("/edits/{edit_id}")
    def get_edit(edit_id: str):
        try:
            payload = task_payload(edit_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown edit: {edit_id}")
        payload["submissions"] = len(store.submissions_for(edit_id))
        return payload

    @app.get("/edits/{edit_id}/aggregate")
    def get_aggregate(edit_id: str):
        if edit_id not in set(edit_ids):
            raise HTTPException(status_code=404, detail=f"unknown edit: {edit_id}")
        try:
            return aggregate(store, edit_id).to_dict()
        except KeyError:
            raise HTTPException(status_code=409, detail="no submissions yet")

    @app.get("/reports/agreement")
    def get_agreement():
        rep = agreement_report(store)
        return {
            q: {
                "average_agreement": a.average_agreement,
                "complete_rate": a.complete_rate,
                "majority_rate": a.majority_rate,
                "kappa": a.kappa,
                "items": a.items,
            }
            for q, a in rep.per_question.items()
        }

    @app.get("/export/labels")
    def get_labels():
        buf = io.StringIO()
        import json

        buf.write(json.dumps(LABELS_HEADER, sort_keys=True) + "\n")
        for lab in export_labels(store):
            buf.write(json.dumps(lab.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        return PlainTextResponse(buf.getvalue())

    app.mount("/media", StaticFiles(directory=str(edit_set.base_dir)), name="media")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/app", StaticFiles(directory=str(ui_dir), html=True), name="app")

        @app.get("/", include_in_schema=False)
        def index():
            return RedirectResponse("/app/")

    else:

        @app.get("/", include_in_schema=False)
        def index():
            return HTMLResponse(
                "<html><body><h1>editverify annotation service</h1>"
                "<p>No UI bundle is mounted; the JSON API is live.</p></body></html>"
            )

    return app
