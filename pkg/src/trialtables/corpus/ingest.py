"""Abstract-level standoff records into per-sentence Docs."""

from __future__ import annotations

from pathlib import Path

from trialtables.corpus.brat import BratAbstract, map_source_labels, parse_brat
from trialtables.corpus.records import Doc, EntitySpan, make_doc, tokenize
from trialtables.corpus.segment import (
    SentenceRow,
    StructuredAbstract,
    numbered_sentences,
    select_result_rows,
)
from trialtables.errors import ContractError


def _project_spans(abstract: BratAbstract, row: SentenceRow) -> tuple[EntitySpan, ...]:
    """Convert character-offset spans inside one sentence to token spans.

    Span boundaries snap outward to whole tokens (an annotation covering
    "39.3" inside the token "39.3%" yields that token). A span crossing the
    sentence boundary is an integrity failure, not something to clip.
    """
    tokens = tokenize(row.text)
    spans = []
    for char_span in abstract.spans:
        if char_span.end <= row.start or char_span.start >= row.end:
            continue
        if char_span.start < row.start or char_span.end > row.end:
            raise ContractError(
                f"{abstract.pmid}: span {char_span.id} [{char_span.start},{char_span.end}) "
                f"crosses sentence boundary [{row.start},{row.end})"
            )
        local_start = char_span.start - row.start
        local_end = char_span.end - row.start
        covered = [t.index for t in tokens if t.end > local_start and t.start < local_end]
        if not covered:
            raise ContractError(
                f"{abstract.pmid}: span {char_span.id} covers no tokens in sentence {row.index}"
            )
        spans.append(EntitySpan(char_span.label, covered[0], covered[-1]))
    return tuple(spans)


def abstract_to_docs(
    abstract: BratAbstract,
    domain: str = "",
    results_only: bool = True,
    lexicon: frozenset[str] | None = None,
) -> list[Doc]:
    """Segment one abstract and return its (result) sentences as Docs.

    Labels must already be schema labels (see map_source_labels). Standoff
    relation layers are not carried over; relations are annotated on the
    sentence records downstream.
    """
    structured = StructuredAbstract.from_text(abstract.pmid, abstract.text, domain=domain)
    if results_only:
        rows, fallback = select_result_rows(structured, lexicon)
    else:
        rows, fallback = numbered_sentences(structured, lexicon), False
    docs = []
    for row in rows:
        meta = {"pmid": abstract.pmid, "sent": row.index}
        if domain:
            meta["domain"] = domain
        if row.section:
            meta["section"] = row.section
        if fallback:
            meta["section_fallback"] = True
        docs.append(make_doc(row.text, entities=_project_spans(abstract, row), meta=meta))
    return docs


def ingest_brat_dir(
    directory: str | Path,
    mapping: dict[str, str] | None = None,
    domain: str = "",
    results_only: bool = True,
) -> list[Doc]:
    """Ingest every .txt/.ann pair under a directory into sentence Docs."""
    directory = Path(directory)
    docs = []
    for text_file in sorted(directory.glob("*.txt")):
        ann_file = text_file.with_suffix(".ann")
        if not ann_file.exists():
            raise FileNotFoundError(f"{text_file} has no matching .ann file")
        abstract = parse_brat(text_file, ann_file)
        if mapping is not None:
            abstract = map_source_labels(abstract, mapping)
        docs.extend(abstract_to_docs(abstract, domain=domain, results_only=results_only))
    return docs
