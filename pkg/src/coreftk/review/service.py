"""HTTP+JSON API over the review store.

Endpoints:
  GET  /cases?status=&offset=&limit=   paged queue summaries
  GET  /cases/{id}                     full case payload
  POST /cases/{id}/correction          submit a hand correction
  POST /export?version=META_1|META_m   build + write the corpus file

A shared token (env var ``COREF_REVIEW_TOKEN``) guards writes and reads
alike when set; the UI bundle, if built, is served from the store's
``ui/`` directory (or a directory passed explicitly).
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..errors import ConflictError, NotFoundError, ValidationError
from .store import ReviewStore

TOKEN_ENV_VAR = "COREF_REVIEW_TOKEN"
TOKEN_HEADER = "x-review-token"


def create_app(store: ReviewStore, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="coreftk review service")
    token = os.environ.get(TOKEN_ENV_VAR)

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if token and request.url.path.startswith(("/cases", "/export")):
            if request.headers.get(TOKEN_HEADER) != token:
                return JSONResponse({"detail": "missing or wrong review token"},
                                    status_code=401)
        return await call_next(request)

    @app.get("/cases")
    def list_cases(status: str | None = None, offset: int = 0, limit: int = 50):
        statuses = None
        if status:
            statuses = tuple(s.strip() for s in status.split(",") if s.strip())
        try:
            return store.list_cases(statuses=statuses, offset=offset, limit=limit)
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/cases/{case_id}")
    def get_case(case_id: str):
        try:
            return store.get_case(case_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/cases/{case_id}/correction")
    async def submit_correction(case_id: str, request: Request):
        body = await request.json()
        try:
            span = (int(body["char_start"]), int(body["char_end_exclusive"]))
            reviewer = str(body.get("reviewer", "anonymous"))
            overwrite = bool(body.get("overwrite", False))
        except (KeyError, TypeError, ValueError):
            raise HTTPException(
                status_code=400,
                detail="body must carry char_start and char_end_exclusive")
        try:
            return store.submit_correction(case_id, span, reviewer, overwrite)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/export")
    def export(version: str):
        out_path = os.path.join(store.store_dir, f"{version.lower()}.jsonl")
        try:
            corpus = store.export_ready(version, out_path)
        except ConflictError as exc:
            raise HTTPException(
                status_code=409,
                detail={"message": str(exc), "blocking": store.blocking_case_ids()})
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"path": out_path, "corpus_name": corpus.name,
                "mentions": sum(1 for _ in corpus.iter_mentions())}

    if ui_dir is None:
        candidate = os.path.join(store.store_dir, "ui")
        ui_dir = candidate if os.path.isdir(candidate) else None
    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(store_dir: str, host: str = "127.0.0.1", port: int = 8700,
          ui_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(ReviewStore(store_dir), ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)
