"""Local HTTP service for annotation sessions.

Queues match and quality tasks, hands them to annotators, records
judgments in an append-only log, and folds the labels straight back into
agreement statistics and threshold calibration. State is two JSONL files
(tasks + event log); replaying them reconstructs the service exactly.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .agreement import (
    QUALITY_DIMENSIONS,
    AnnotationRecord,
    cohens_kappa,
    krippendorff_alpha,
    krippendorff_alpha_per_dimension,
)
from .errors import (
    DuplicateJudgmentError,
    EmptyQueueInputError,
    FrontpageError,
    IncompleteValuesError,
    InsufficientOverlapError,
    NoVariationError,
    NotAssignedError,
)
from .matching import calibrate_threshold
from .errors import DegenerateLabelsError

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles


@dataclass
class AnnotationTask:
    id: str
    item_id: str
    kind: str  # match_binary | quality_1_5
    payload: dict
    copy: int  # 1, or 2 for the overlap duplicate
    score: float | None = None
    assigned_to: str | None = None
    done_by: str | None = None

    @property
    def status(self) -> str:
        return "done" if self.done_by else "pending"

    def public_dict(self) -> dict:
        return {
            "id": self.id,
            "item_id": self.item_id,
            "kind": self.kind,
            "payload": self.payload,
            "copy": self.copy,
            "status": self.status,
        }


class AnnotationStore:
    """Event-sourced task queue; all mutations serialize through one lock."""

    def __init__(self, workspace: str | Path):
        self.workspace = Path(workspace)
        self.workspace.mkdir(parents=True, exist_ok=True)
        self.tasks_path = self.workspace / "tasks.jsonl"
        self.log_path = self.workspace / "log.jsonl"
        self._lock = threading.Lock()
        self.tasks: dict[str, AnnotationTask] = {}
        self.records: list[AnnotationRecord] = []
        self._replay()

    # -- persistence ---------------------------------------------------

    def _append(self, path: Path, doc: dict) -> None:
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")

    def _replay(self) -> None:
        if self.tasks_path.exists():
            for line in self.tasks_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    doc = json.loads(line)
                    task = AnnotationTask(
                        id=doc["id"],
                        item_id=doc["item_id"],
                        kind=doc["kind"],
                        payload=doc["payload"],
                        copy=doc["copy"],
                        score=doc.get("score"),
                    )
                    self.tasks[task.id] = task
        if self.log_path.exists():
            for line in self.log_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(json.loads(line))

    def _apply(self, event: dict) -> None:
        if event["type"] == "assign":
            self.tasks[event["task_id"]].assigned_to = event["annotator"]
        elif event["type"] == "judgment":
            task = self.tasks[event["task_id"]]
            task.done_by = event["annotator"]
            for rec in event["records"]:
                self.records.append(
                    AnnotationRecord(
                        annotator_id=rec["annotator_id"],
                        item_id=rec["item_id"],
                        task=rec["task"],
                        value=rec["value"],
                        dimension=rec.get("dimension"),
                    )
                )

    # -- queue ---------------------------------------------------------

    def enqueue(
        self, kind: str, items: Sequence[dict], overlap_fraction: float = 0.0
    ) -> int:
        """Create tasks; a leading overlap_fraction of items get a second
        copy for a different annotator. Quality items are downsampled to
        equal counts per length band (stratified calibration protocol)."""
        if not items:
            raise EmptyQueueInputError("nothing to enqueue")
        if kind not in ("match_binary", "quality_1_5"):
            raise FrontpageError(f"unknown task kind {kind!r}")

        selected = list(items)
        if kind == "quality_1_5":
            bands: dict[str, list[dict]] = {}
            for item in selected:
                bands.setdefault(item.get("length_category", "unknown"), []).append(item)
            quota = min(len(group) for group in bands.values())
            selected = [item for band in sorted(bands) for item in bands[band][:quota]]

        n_overlap = math.ceil(overlap_fraction * len(selected))
        created = 0
        with self._lock:
            for index, item in enumerate(selected):
                item_id = item.get("item_id") or item.get("id") or f"item{index}"
                copies = 2 if index < n_overlap else 1
                for copy in range(1, copies + 1):
                    task = AnnotationTask(
                        id=f"{item_id}~{copy}",
                        item_id=item_id,
                        kind=kind,
                        payload={
                            k: v for k, v in item.items() if k not in ("item_id", "score")
                        },
                        copy=copy,
                        score=item.get("score"),
                    )
                    if task.id in self.tasks:
                        continue
                    self.tasks[task.id] = task
                    self._append(
                        self.tasks_path,
                        {
                            "id": task.id,
                            "item_id": task.item_id,
                            "kind": task.kind,
                            "payload": task.payload,
                            "copy": task.copy,
                            "score": task.score,
                        },
                    )
                    created += 1
        return created

    def next_task(self, annotator: str) -> AnnotationTask | None:
        """Hand out an unassigned pending task the annotator has not seen;
        copies of one item always go to distinct annotators."""
        with self._lock:
            touched_items = {
                t.item_id
                for t in self.tasks.values()
                if annotator in (t.assigned_to, t.done_by)
            }
            for task in self.tasks.values():
                if task.done_by or task.assigned_to:
                    continue
                if task.item_id in touched_items:
                    continue
                task.assigned_to = annotator
                self._append(
                    self.log_path,
                    {"type": "assign", "task_id": task.id, "annotator": annotator},
                )
                return task
        return None

    def submit(self, annotator: str, task_id: str, values: dict) -> None:
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None or task.assigned_to != annotator:
                raise NotAssignedError(f"task {task_id} is not assigned to {annotator}")
            if task.done_by:
                raise DuplicateJudgmentError(f"task {task_id} already judged")
            records = self._records_for(annotator, task, values)
            event = {
                "type": "judgment",
                "task_id": task.id,
                "annotator": annotator,
                "records": [r.as_dict() for r in records],
            }
            self._append(self.log_path, event)
            self._apply(event)

    def _records_for(
        self, annotator: str, task: AnnotationTask, values: dict
    ) -> list[AnnotationRecord]:
        try:
            if task.kind == "match_binary":
                if "match" not in values:
                    raise IncompleteValuesError("match judgment requires a 'match' value")
                return [
                    AnnotationRecord(
                        annotator_id=annotator,
                        item_id=task.item_id,
                        task="match_binary",
                        value=int(values["match"]),
                    )
                ]
            missing = [d for d in QUALITY_DIMENSIONS if d not in values]
            if missing:
                raise IncompleteValuesError(f"quality judgment missing {missing}")
            return [
                AnnotationRecord(
                    annotator_id=annotator,
                    item_id=task.item_id,
                    task="quality_1_5",
                    value=int(values[d]),
                    dimension=d,
                )
                for d in QUALITY_DIMENSIONS
            ]
        except ValueError as exc:
            raise IncompleteValuesError(str(exc)) from exc

    # -- live statistics ----------------------------------------------

    def stats(self) -> dict:
        with self._lock:
            tasks = list(self.tasks.values())
            records = list(self.records)
        done = sum(1 for t in tasks if t.done_by)
        out: dict = {
            "progress": {"done": done, "total": len(tasks)},
            "kappa": None,
            "alpha": None,
            "alpha_per_dimension": None,
            "threshold": None,
        }
        try:
            out["kappa"] = cohens_kappa(records)
        except InsufficientOverlapError:
            pass
        try:
            out["alpha"] = krippendorff_alpha(records)
        except (InsufficientOverlapError, NoVariationError):
            pass
        if any(r.task == "quality_1_5" for r in records):
            out["alpha_per_dimension"] = krippendorff_alpha_per_dimension(records)

        scored = self._scored_labels(tasks, records)
        if scored:
            try:
                out["threshold"] = calibrate_threshold(scored).as_dict()
            except DegenerateLabelsError:
                pass
        return out

    def _scored_labels(
        self, tasks: Sequence[AnnotationTask], records: Sequence[AnnotationRecord]
    ) -> list[tuple[float, bool]]:
        scores = {
            t.item_id: t.score
            for t in tasks
            if t.kind == "match_binary" and t.score is not None
        }
        labels: dict[str, list[int]] = {}
        for r in records:
            if r.task == "match_binary" and r.item_id in scores:
                labels.setdefault(r.item_id, []).append(r.value)
        return [
            (scores[item], sum(values) / len(values) >= 0.5)
            for item, values in sorted(labels.items())
        ]

    def export_records(self) -> str:
        with self._lock:
            return "".join(
                json.dumps(r.as_dict(), ensure_ascii=False, sort_keys=True) + "\n"
                for r in self.records
            )


def create_app(store: AnnotationStore, ui_dir: str | Path | None = None):
    app = FastAPI(title="annotation service")

    @app.exception_handler(FrontpageError)
    async def _domain_error(request: Request, exc: FrontpageError):
        status = {
            "not-assigned": 409,
            "duplicate": 409,
            "incomplete-values": 422,
            "empty-input": 422,
        }.get(exc.code, 400)
        return JSONResponse(status_code=status, content={"error": exc.code, "message": str(exc)})

    @app.get("/api/tasks/next")
    def next_task(annotator: str):
        task = store.next_task(annotator)
        if task is None:
            return {"task": None}
        return {"task": task.public_dict()}

    @app.post("/api/tasks/{task_id}/judgment")
    async def submit(task_id: str, request: Request):
        body = await request.json()
        store.submit(body.get("annotator", ""), task_id, body.get("values", {}))
        return {"ok": True, "task_id": task_id}

    @app.get("/api/stats")
    def stats():
        return store.stats()

    @app.get("/api/export")
    def export():
        return PlainTextResponse(store.export_records(), media_type="application/x-ndjson")

    @app.post("/api/queue")
    async def queue(request: Request):
        body = await request.json()
        created = store.enqueue(
            kind=body["kind"],
            items=body["items"],
            overlap_fraction=float(body.get("overlap_fraction", 0.0)),
        )
        return {"created": created}

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
