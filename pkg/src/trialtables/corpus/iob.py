"""IOB tag-sequence conversion, both directions."""

from __future__ import annotations

from trialtables.corpus.records import ENTITY_LABELS, Doc, EntitySpan, Token
from trialtables.errors import TagSequenceError


def to_iob(doc: Doc) -> list[str]:
    """Per-token tags: B-X opens each span, I-X continues it, O elsewhere."""
    tags = ["O"] * len(doc.tokens)
    for span in doc.entities:
        tags[span.token_start] = f"B-{span.label}"
        for idx in range(span.token_start + 1, span.token_end + 1):
            tags[idx] = f"I-{span.label}"
    return tags


def from_iob(tokens: tuple[Token, ...], tags: list[str], text: str | None = None,
             meta: dict | None = None) -> Doc:
    """Inverse of :func:`to_iob`; rejects ill-formed sequences.

    I-X may only continue an open span of the same label X; anything else is
    a format error reported with the offending index.
    """
    if len(tokens) != len(tags):
        raise TagSequenceError(
            f"{len(tags)} tags for {len(tokens)} tokens", index=min(len(tokens), len(tags))
        )
    spans: list[EntitySpan] = []
    open_label: str | None = None
    open_start = -1
    for i, tag in enumerate(tags):
        if tag == "O":
            kind, label = "O", None
        elif tag[:2] in ("B-", "I-") and tag[2:] in ENTITY_LABELS:
            kind, label = tag[0], tag[2:]
        else:
            raise TagSequenceError(f"unknown tag {tag!r}", index=i)
        if kind == "I":
            if open_label is None or label != open_label:
                raise TagSequenceError(f"{tag} does not continue an open {tag[2:]} span", index=i)
            continue
        if open_label is not None:
            spans.append(EntitySpan(open_label, open_start, i - 1))
            open_label = None
        if kind == "B":
            open_label, open_start = label, i
    if open_label is not None:
        spans.append(EntitySpan(open_label, open_start, len(tags) - 1))
    if text is None:
        # Rebuild a sentence consistent with the recorded token offsets.
        chars = [" "] * (tokens[-1].end if tokens else 0)
        for tok in tokens:
            chars[tok.start : tok.end] = tok.text
        text = "".join(chars)
    return Doc(text=text, tokens=tokens, entities=tuple(spans), meta=dict(meta or {}))
