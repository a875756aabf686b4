"""brat standoff ingestion: .txt/.ann pairs into abstract-level records."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path

from trialtables.errors import (
    AnnotationParseError,
    LabelMappingError,
    OffsetRangeError,
    SurfaceMismatchError,
)

# T<k><TAB><LABEL> <start> <end><TAB><surface>
_ENTITY_LINE = re.compile(r"^(T\d+)\t(\S+) (\d+) (\d+)\t(.*)$", re.DOTALL)

# Non-entity standoff layers (relations, attributes, events, notes) are not
# ingested; the schema relations are re-annotated downstream.
_OTHER_LAYERS = ("R", "A", "E", "M", "N", "#", "*")

DROP = "__drop__"


@dataclass(frozen=True)
class CharSpan:
    """Character-offset entity as recorded in the .ann file."""

    id: str
    label: str
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class BratAbstract:
    """One abstract text with its character-offset entity spans."""

    text: str
    spans: tuple[CharSpan, ...]
    pmid: str = ""


def parse_brat(text_file: str | Path, ann_file: str | Path, pmid: str | None = None) -> BratAbstract:
    """Parse a .txt/.ann standoff pair into one abstract-level record.

    Every entity offset must lie within the text and its recorded surface
    must equal the text slice; mismatches raise instead of being repaired.
    """
    text_file, ann_file = Path(text_file), Path(ann_file)
    text = text_file.read_text(encoding="utf-8")
    if pmid is None:
        pmid = text_file.stem
    spans = parse_ann_text(ann_file.read_text(encoding="utf-8"), text, path=str(ann_file))
    return BratAbstract(text=text, spans=spans, pmid=pmid)


def parse_ann_text(ann_text: str, text: str, path: str | None = None) -> tuple[CharSpan, ...]:
    spans = []
    for lineno, line in enumerate(ann_text.splitlines(), start=1):
        if not line.strip():
            continue
        if line[0] in _OTHER_LAYERS:
            continue
        match = _ENTITY_LINE.match(line)
        if match is None:
            raise AnnotationParseError(f"malformed standoff line {line!r}", line=lineno, path=path)
        span_id, label, start, end, surface = match.groups()
        start, end = int(start), int(end)
        if not (0 <= start < end <= len(text)):
            raise OffsetRangeError(
                f"{path or 'ann'}:line {lineno}: offsets [{start},{end}) outside text of "
                f"length {len(text)}"
            )
        if text[start:end] != surface:
            raise SurfaceMismatchError(
                f"{path or 'ann'}:line {lineno}: surface {surface!r} != text slice "
                f"{text[start:end]!r}"
            )
        spans.append(CharSpan(span_id, label, start, end, surface))
    return tuple(sorted(spans, key=lambda s: (s.start, s.end)))


def map_source_labels(abstract: BratAbstract, mapping: dict[str, str]) -> BratAbstract:
    """Replace source annotation labels with schema labels.

    Every source label must either map to a schema label or be explicitly
    marked for dropping with the :data:`DROP` sentinel.
    """
    kept = []
    for span in abstract.spans:
        if span.label not in mapping:
            raise LabelMappingError(f"no mapping entry for source label {span.label!r}")
        target = mapping[span.label]
        if target == DROP:
            continue
        kept.append(replace(span, label=target))
    return replace(abstract, spans=tuple(kept))
