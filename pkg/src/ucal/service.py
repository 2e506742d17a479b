"""HTTP facade over the annotation queue and run state.

Annotators pull queries (leased, at-most-once per live session), post
verdicts, and watch run progress. All endpoints live under /api/v1; dataset
images are served read-only under /static when the dataset carries image
paths, and otherwise each query side ships 2-D projected coordinates of the
medoid sample and its cluster so a UI can draw a scatter view.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import uvicorn
from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .annotation import (LabelMemory, PendingQueue, QueryRequest, Source,
                         SubmitStatus, Verdict)
from .clustering import OUTLIER
from .engine import RunStatus

MAX_SCATTER_POINTS = 50


@dataclass
class ServiceRuntime:
    """Everything the endpoints need, shared with the engine thread."""

    memory: LabelMemory
    queue: PendingQueue
    status: RunStatus
    dataset_root: str | None = None  # serve images below this directory

    def __post_init__(self) -> None:
        self._proj_lock = threading.Lock()
        self._proj_cache: tuple[int, np.ndarray] | None = None

    def coords_for(self, sample_id: int) -> dict | None:
        """2-D projection of a sample and its current cluster (PCA axes of the
        latest embedding), for image-less datasets."""
        view = self.status.embedding_view()
        if view is None:
            return None
        embedding, state = view
        with self._proj_lock:
            cached = self._proj_cache
            if cached is None or cached[0] != id(embedding):
                centered = embedding - embedding.mean(axis=0)
                _, _, vt = np.linalg.svd(centered, full_matrices=False)
                projected = centered @ vt[:2].T
                self._proj_cache = (id(embedding), projected)
            projected = self._proj_cache[1]
        point = [float(projected[sample_id, 0]), float(projected[sample_id, 1])]
        cid = int(state.assignment[sample_id])
        if cid == OUTLIER:
            members = [sample_id]
        else:
            members = list(state.cluster_by_id(cid).members)[:MAX_SCATTER_POINTS]
        cluster = [[float(projected[m, 0]), float(projected[m, 1])] for m in members]
        return {"point": point, "cluster": cluster}


class LabelSubmission(BaseModel):
    query_id: int
    label: str


def _side_payload(runtime: ServiceRuntime, sample_id: int, image_ref: str | None) -> dict:
    side: dict = {"sample_id": sample_id}
    if image_ref is not None:
        side["image_url"] = f"/static/{image_ref}"
    else:
        side["coords"] = runtime.coords_for(sample_id)
    return side


def _query_payload(runtime: ServiceRuntime, query: QueryRequest) -> dict:
    ctx = query.context
    return {
        "query_id": query.query_id,
        "kind": query.kind.value,
        "epoch": query.epoch,
        "a": _side_payload(runtime, query.pair[0], ctx.image_a if ctx else None),
        "b": _side_payload(runtime, query.pair[1], ctx.image_b if ctx else None),
    }


def create_app(runtime: ServiceRuntime) -> FastAPI:
    app = FastAPI(title="ucal annotation service")

    @app.get("/api/v1/queries/next")
    def next_query(session: str = Query(default="anonymous")) -> Response:
        query = runtime.queue.next_for(session)
        if query is None:
            return Response(status_code=204)
        return JSONResponse(_query_payload(runtime, query))

    @app.post("/api/v1/labels")
    def submit_label(submission: LabelSubmission,
                     session: str = Query(default="anonymous")) -> Response:
        if submission.label not in (Verdict.POSITIVE.value, Verdict.NEGATIVE.value):
            return JSONResponse({"error": f"unknown label {submission.label!r}"},
                                status_code=400)
        result = runtime.queue.submit(submission.query_id, session)
        if result.status is SubmitStatus.UNKNOWN:
            return JSONResponse({"error": "unknown query_id"}, status_code=404)
        if result.status is SubmitStatus.NOT_ASSIGNED:
            return JSONResponse({"error": "query not assigned to this session (or lease expired)"},
                                status_code=409)
        if result.status is SubmitStatus.DUPLICATE:
            return JSONResponse({"accepted": False, "m": runtime.memory.m})
        assert result.query is not None
        runtime.memory.record_consultation(
            result.query.pair, Verdict(submission.label), source=Source.HUMAN,
            epoch=result.query.epoch)
        _sweep_resolved(runtime)
        return JSONResponse({"accepted": True, "m": runtime.memory.m})

    @app.get("/api/v1/state")
    def state() -> dict:
        snapshot = runtime.status.snapshot()
        snapshot["pending"] = runtime.queue.pending_count()
        return snapshot

    @app.get("/api/v1/metrics")
    def latest_metrics() -> Response:
        metrics = runtime.status.latest_metrics()
        if metrics is None:
            return Response(status_code=204)
        return Response(content=metrics.to_json_line(), media_type="application/json")

    if runtime.dataset_root is not None:
        app.mount("/static", StaticFiles(directory=runtime.dataset_root), name="static")

    ui_dir = _frontend_dist()
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _sweep_resolved(runtime: ServiceRuntime) -> None:
    # A fresh answer can make other pending pairs resolvable by propagation;
    # drop those so annotators are never asked what memory already knows.
    resolved = [p for p in runtime.queue.pending_pairs()
                if runtime.memory.resolve(p) is not None]
    if resolved:
        runtime.queue.resolve_pairs(resolved)


def _frontend_dist() -> str | None:
    from pathlib import Path

    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if (candidate / "index.html").exists():
        return str(candidate)
    return None


def serve(runtime: ServiceRuntime, host: str = "127.0.0.1", port: int = 8000,
          stop_event: threading.Event | None = None) -> None:
    """Run the service until the process ends (or stop_event is set)."""
    config = uvicorn.Config(create_app(runtime), host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    if stop_event is not None:
        def watch() -> None:
            stop_event.wait()
            server.should_exit = True

        threading.Thread(target=watch, daemon=True).start()
    server.run()
