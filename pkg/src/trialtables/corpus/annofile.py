"""Line-delimited annotation record files.

One JSON object per line: text, tokens [{text,start,end,id}], spans
[{token_start,token_end,label}], relations [{head,child,label}] keyed by the
endpoint spans' start token indexes, meta, and an answer verdict. The writer
emits a canonical form (sorted keys, compact separators, annotations in Doc
order) so reading a canonical file and writing it back is byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

from trialtables.corpus.records import Doc, EntitySpan, RelationEdge, Token
from trialtables.errors import AnnotationParseError, ContractError, SchemaError

ANSWERS = ("accept", "reject", "pending")

_REQUIRED_KEYS = ("text", "tokens", "spans", "relations", "meta", "answer")


def doc_to_record(doc: Doc) -> dict:
    return {
        "text": doc.text,
        "tokens": [
            {"text": t.text, "start": t.start, "end": t.end, "id": t.index} for t in doc.tokens
        ],
        "spans": [
            {"token_start": s.token_start, "token_end": s.token_end, "label": s.label}
            for s in doc.entities
        ],
        "relations": [
            {"head": r.parent, "child": r.child, "label": r.label} for r in doc.relations
        ],
        "meta": doc.meta,
        "answer": doc.answer,
    }


def record_to_doc(record, line: int | None = None, path: str | None = None) -> Doc:
    def fail(message: str):
        raise SchemaError(message, line=line, path=path)

    if not isinstance(record, dict):
        fail("record is not a JSON object")
    missing = [key for key in _REQUIRED_KEYS if key not in record]
    if missing:
        fail("missing keys: " + ", ".join(missing))
    extra = sorted(set(record) - set(_REQUIRED_KEYS))
    if extra:
        fail("unknown keys: " + ", ".join(extra))
    if record["answer"] not in ANSWERS:
        fail(f"unknown answer {record['answer']!r}")
    if not isinstance(record["meta"], dict):
        fail("meta is not an object")
    try:
        tokens = tuple(
            Token(t["text"], t["start"], t["end"], t["id"]) for t in record["tokens"]
        )
        spans = tuple(
            EntitySpan(s["label"], s["token_start"], s["token_end"]) for s in record["spans"]
        )
        edges = tuple(
            RelationEdge(r["label"], r["head"], r["child"]) for r in record["relations"]
        )
    except (KeyError, TypeError) as exc:
        fail(f"malformed nested record: {exc}")
    try:
        return Doc(
            text=record["text"],
            tokens=tokens,
            entities=spans,
            relations=edges,
            meta=dict(record["meta"]),
            answer=record["answer"],
        )
    except ContractError as exc:
        fail(str(exc))


def dumps_record(doc: Doc) -> str:
    """Canonical single-line serialization of one Doc."""
    return json.dumps(doc_to_record(doc), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def read_annotations(path: str | Path) -> list[Doc]:
    """Load every record of a line-delimited annotation file.

    Rejected Docs are returned too, flagged by their answer; filtering is the
    caller's concern. Malformed lines and schema violations raise with the
    1-based line number.
    """
    path = Path(path)
    docs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationParseError(
                    f"invalid JSON: {exc.msg}", line=lineno, path=str(path)
                ) from exc
            docs.append(record_to_doc(record, line=lineno, path=str(path)))
    return docs


def write_annotations(docs, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(dumps_record(doc))
            fh.write("\n")
