"""Extraction and correction-review service.

Pre-annotated sentences enter a review queue; corrections are validated,
appended to a replayable log, and exported as training data in the corpus
annotation format. Models are frozen for the process lifetime.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from trialtables.corpus.annofile import doc_to_record, dumps_record, record_to_doc
from trialtables.corpus.records import (
    Doc,
    EntitySpan,
    RelationEdge,
    correction_violations,
    make_doc,
)
from trialtables.relex import predict_doc
from trialtables.ner.model import decode
from trialtables.tabulate import assemble_table

BATCH_CAP_DEFAULT = 10000
PAGE_SIZE_DEFAULT = 20
PORT_ENV_VAR = "TRIALTABLES_PORT"
DATA_DIR_ENV_VAR = "TRIALTABLES_DATA_DIR"

STATUSES = ("pending", "accepted", "rejected")
_VERDICT_STATUS = {"accept": "accepted", "reject": "rejected"}


class ApiError(Exception):
    """Carried to the client as {code, message, violations} with a status."""

    def __init__(self, status: int, code: str, message: str, violations=()):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.violations = list(violations)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class ReviewItem:
    """One queued sentence revision; revisions only accumulate."""

    item_id: int
    doc: Doc
    status: str
    revision: int
    created_ts: str
    updated_ts: str

    def to_response(self) -> dict:
        table = assemble_table(self.doc)
        return {
            "item_id": self.item_id,
            "doc_id": self.doc.doc_id,
            "status": self.status,
            "revision": self.revision,
            "created_ts": self.created_ts,
            "updated_ts": self.updated_ts,
            "record": doc_to_record(self.doc),
            "table": {
                "header": list(table.header),
                "rows": [list(row.astuple()) for row in table.rows],
                "diagnostics": list(table.diagnostics),
            },
        }


class RecordStore:
    """Append-only revision log with a derived current-state index.

    Every mutation appends one JSON line and updates the in-memory index
    under a single writer lock; reloading the file reproduces the index
    exactly. Nothing is ever rewritten in place.
    """

    def __init__(self, log_path: str | Path):
        self._path = Path(log_path)
        self._lock = threading.Lock()
        self._items: dict[int, ReviewItem] = {}
        self._next_id = 1
        if self._path.exists():
            self._replay()

    def _replay(self) -> None:
        with self._path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                entry = json.loads(line)
                doc = record_to_doc(entry["record"], lineno, str(self._path))
                item = ReviewItem(
                    item_id=entry["item_id"],
                    doc=doc,
                    status=entry["status"],
                    revision=entry["revision"],
                    created_ts=entry["created_ts"],
                    updated_ts=entry["updated_ts"],
                )
                self._items[item.item_id] = item
                self._next_id = max(self._next_id, item.item_id + 1)

    def _append(self, item: ReviewItem) -> None:
        entry = {
            "item_id": item.item_id,
            "revision": item.revision,
            "status": item.status,
            "record": doc_to_record(item.doc),
            "created_ts": item.created_ts,
            "updated_ts": item.updated_ts,
        }
        self._path.parent.mkdir(parents=True, exist_ok=True)
        with self._path.open("a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False))
            fh.write("\n")

    def enqueue(self, doc: Doc) -> ReviewItem:
        with self._lock:
            now = _now()
            item = ReviewItem(
                item_id=self._next_id,
                doc=doc,
                status="pending",
                revision=1,
                created_ts=now,
                updated_ts=now,
            )
            self._next_id += 1
            self._append(item)
            self._items[item.item_id] = item
            return item

    def get(self, item_id: int) -> ReviewItem:
        with self._lock:
            item = self._items.get(item_id)
        if item is None:
            raise ApiError(404, "not_found", f"no review item {item_id}")
        return item

    def list_items(self, status: str | None = None) -> list[ReviewItem]:
        with self._lock:
            items = sorted(self._items.values(), key=lambda it: it.item_id)
        if status:
            items = [it for it in items if it.status == status]
        return items

    def submit_correction(self, item_id: int, doc: Doc, verdict: str) -> ReviewItem:
        status = _VERDICT_STATUS.get(verdict)
        if status is None:
            raise ApiError(422, "validation", f"verdict must be accept or reject, got {verdict!r}")
        with self._lock:
            current = self._items.get(item_id)
            if current is None:
                raise ApiError(404, "not_found", f"no review item {item_id}")
            if current.status != "pending":
                raise ApiError(
                    409, "conflict", f"item {item_id} is already {current.status}"
                )
            updated = ReviewItem(
                item_id=item_id,
                doc=replace(doc, answer=verdict),
                status=status,
                revision=current.revision + 1,
                created_ts=current.created_ts,
                updated_ts=_now(),
            )
            self._append(updated)
            self._items[item_id] = updated
            return updated

    def export_docs(self, include_rejected: bool = False) -> list[Doc]:
        wanted = ("accepted", "rejected") if include_rejected else ("accepted",)
        return [it.doc for it in self.list_items() if it.status in wanted]


def _pipeline_doc(doc: Doc, ner_model, re_model, threshold: float) -> Doc:
    tagged = decode(doc, ner_model)
    return predict_doc(tagged, re_model, threshold)


def create_app(
    ner_model=None,
    re_model=None,
    data_dir: str | Path | None = None,
    batch_cap: int = BATCH_CAP_DEFAULT,
    threshold: float = 0.5,
    page_size: int = PAGE_SIZE_DEFAULT,
) -> FastAPI:
    """Build the service app; models may be absent (extraction then 503s)."""
    data_dir = Path(data_dir or os.environ.get(DATA_DIR_ENV_VAR, "."))
    store = RecordStore(data_dir / "queue.jsonl")
    app = FastAPI(title="trialtables", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.models_loaded = ner_model is not None and re_model is not None

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "violations": exc.violations},
        )

    def require_models() -> None:
        if not app.state.models_loaded:
            raise ApiError(503, "model_not_loaded", "extraction models are not loaded")

    def parse_sentences(body: dict) -> list[str]:
        sentences = body.get("sentences")
        if not isinstance(sentences, list) or any(not isinstance(s, str) for s in sentences):
            raise ApiError(422, "validation", "body must carry a list under 'sentences'")
        if len(sentences) > batch_cap:
            raise ApiError(
                413, "oversize", f"request of {len(sentences)} sentences exceeds cap {batch_cap}"
            )
        return sentences

    def run_pipeline(sentences: list[str]) -> list[Doc]:
        docs = [
            make_doc(text, meta={"pmid": "input", "sent": i}) for i, text in enumerate(sentences)
        ]
        return [_pipeline_doc(doc, ner_model, re_model, threshold) for doc in docs]

    @app.post("/extract")
    async def extract(request: Request):
        require_models()
        sentences = parse_sentences(await request.json())
        results = []
        for doc in run_pipeline(sentences):
            table = assemble_table(doc)
            record = doc_to_record(doc)
            record["table"] = {
                "header": list(table.header),
                "rows": [list(row.astuple()) for row in table.rows],
                "diagnostics": list(table.diagnostics),
            }
            results.append(record)
        return {"results": results}

    @app.post("/queue")
    async def enqueue(request: Request):
        require_models()
        sentences = parse_sentences(await request.json())
        items = [store.enqueue(doc) for doc in run_pipeline(sentences)]
        return {"items": [item.to_response() for item in items]}

    @app.get("/queue")
    async def list_queue(
        status: str = Query(default="pending"), page: int = Query(default=1, ge=1)
    ):
        if status and status not in STATUSES:
            raise ApiError(422, "validation", f"unknown status {status!r}")
        items = store.list_items(status or None)
        pages = max(1, -(-len(items) // page_size))
        window = items[(page - 1) * page_size : page * page_size]
        return {
            "items": [item.to_response() for item in window],
            "page": page,
            "pages": pages,
            "total": len(items),
        }

    @app.get("/items/{item_id}")
    async def get_item(item_id: int):
        return store.get(item_id).to_response()

    @app.post("/items/{item_id}/correction")
    async def submit_correction(item_id: int, request: Request):
        body = await request.json()
        current = store.get(item_id)
        verdict = body.get("verdict")
        try:
            spans = tuple(
                EntitySpan(str(s["label"]), int(s["token_start"]), int(s["token_end"]))
                for s in body.get("spans", [])
            )
            relations = tuple(
                RelationEdge(str(r["label"]), int(r["head"]), int(r["child"]))
                for r in body.get("relations", [])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ApiError(422, "validation", f"malformed correction payload: {exc}")
        violations = correction_violations(current.doc.tokens, spans, relations)
        if violations:
            raise ApiError(422, "validation", "correction violates invariants", violations)
        corrected = current.doc.with_entities(spans, relations)
        return store.submit_correction(item_id, corrected, verdict).to_response()

    @app.get("/export/train")
    async def export_train(include_rejected: bool = Query(default=False)):
        docs = store.export_docs(include_rejected)
        body = "".join(dumps_record(doc) + "\n" for doc in docs)
        return PlainTextResponse(
            body,
            media_type="application/x-ndjson",
            headers={"X-Export-Count": str(len(docs))},
        )

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "models_loaded": app.state.models_loaded}

    return app


def serve(app: FastAPI, port: int | None = None) -> None:
    """Run the app on the configured port (env override honored)."""
    import uvicorn

    port = port or int(os.environ.get(PORT_ENV_VAR, "8000"))
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
