"""Core sentence records: tokens, entity spans, relation edges and the Doc container.

A Doc is the unit every pipeline stage consumes and produces: one result
sentence with its tokens, labelled entity spans, directed relation edges and
provenance metadata. Docs are immutable; stages derive new Docs instead of
mutating.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from trialtables.errors import ContractError

ENTITY_LABELS = ("INTV", "MEAS", "OC")
RELATION_LABELS = ("OC_RES", "A1_RES", "A2_RES")

# Parent side of a gold relation is always an intervention or outcome span,
# the child always a measure span. Predictions may violate this; corrections
# submitted through the review service may not.
GOLD_PARENT_LABELS = ("INTV", "OC")
GOLD_CHILD_LABEL = "MEAS"

_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)*%?|[^\W\d_]+|\S")
_NUMBER_RE = re.compile(r"\d+(?:[.,]\d+)*%?")


@dataclass(frozen=True)
class Token:
    """One token with character offsets into its sentence."""

    text: str
    start: int
    end: int
    index: int


@dataclass(frozen=True)
class EntitySpan:
    """A labelled, inclusive token range.

    Span identity within a Doc is the start token index, which is unique
    because spans never overlap.
    """

    label: str
    token_start: int
    token_end: int

    @property
    def id(self) -> int:
        return self.token_start


@dataclass(frozen=True)
class RelationEdge:
    """Directed labelled link between two spans, referenced by span id."""

    label: str
    parent: int
    child: int


@dataclass(frozen=True)
class Doc:
    """One result sentence plus annotations and provenance metadata.

    ``meta`` carries at least ``pmid`` and ``domain``; extra keys round-trip
    through the annotation file format. ``answer`` records the annotation
    verdict; rejected Docs are kept on disk but excluded from model datasets.
    """

    text: str
    tokens: tuple[Token, ...]
    entities: tuple[EntitySpan, ...] = ()
    relations: tuple[RelationEdge, ...] = ()
    meta: dict = field(default_factory=dict)
    answer: str = "accept"

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(
            self, "entities", tuple(sorted(self.entities, key=lambda s: s.token_start))
        )
        object.__setattr__(
            self,
            "relations",
            tuple(sorted(self.relations, key=lambda r: (r.parent, r.child, r.label))),
        )
        problems = doc_violations(self.tokens, self.entities, self.relations, text=self.text)
        if problems:
            raise ContractError("invalid Doc: " + "; ".join(problems))

    @property
    def doc_id(self) -> str:
        pmid = self.meta.get("pmid", "doc")
        return f"{pmid}:{self.meta.get('sent', 0)}"

    def span_by_id(self, span_id: int) -> EntitySpan:
        for span in self.entities:
            if span.token_start == span_id:
                return span
        raise KeyError(span_id)

    def span_text(self, span: EntitySpan) -> str:
        first = self.tokens[span.token_start]
        last = self.tokens[span.token_end]
        return self.text[first.start : last.end]

    def with_entities(self, entities, relations=()) -> "Doc":
        return replace(self, entities=tuple(entities), relations=tuple(relations))

    def with_relations(self, relations) -> "Doc":
        return replace(self, relations=tuple(relations))


def tokenize(text: str) -> tuple[Token, ...]:
    """Deterministic rule tokenizer.

    Numbers keep their decimal points and an attached percent sign as one
    token ("18.3", "39.3%"), alphabetic runs are single tokens, everything
    else splits per character.
    """
    tokens = []
    for i, match in enumerate(_TOKEN_RE.finditer(text)):
        tokens.append(Token(match.group(), match.start(), match.end(), i))
    return tuple(tokens)


def is_numeric_token(text: str) -> bool:
    """True for tokens the tokenizer produced via its number pattern."""
    return bool(_NUMBER_RE.fullmatch(text))


def make_doc(text: str, entities=(), relations=(), meta=None, answer="accept") -> Doc:
    """Tokenize ``text`` and build a validated Doc."""
    return Doc(
        text=text,
        tokens=tokenize(text),
        entities=tuple(entities),
        relations=tuple(relations),
        meta=dict(meta or {}),
        answer=answer,
    )


def token_violations(text: str, tokens) -> list[str]:
    problems = []
    prev_end = -1
    for i, tok in enumerate(tokens):
        if tok.index != i:
            problems.append(f"token {i} carries index {tok.index}")
        if not tok.start < tok.end:
            problems.append(f"token {i} has empty range [{tok.start},{tok.end})")
        if tok.start < prev_end:
            problems.append(f"token {i} overlaps its predecessor")
        if tok.end > len(text) or text[tok.start : tok.end] != tok.text:
            problems.append(f"token {i} text {tok.text!r} does not match sentence slice")
        prev_end = tok.end
    return problems


def doc_violations(tokens, entities, relations, text: str | None = None) -> list[str]:
    """All structural invariant violations, empty when the record is valid.

    Checks token alignment, span labels and bounds, span overlap, and that
    relation endpoints resolve. Gold directionality is deliberately not
    checked here; see :func:`correction_violations`.
    """
    problems = []
    if text is not None:
        problems.extend(token_violations(text, tokens))
    n = len(tokens)
    covered: dict[int, EntitySpan] = {}
    by_start: dict[int, EntitySpan] = {}
    for span in entities:
        if span.label not in ENTITY_LABELS:
            problems.append(f"span at {span.token_start} has unknown label {span.label!r}")
        if not (0 <= span.token_start <= span.token_end < n):
            problems.append(
                f"span [{span.token_start},{span.token_end}] outside token range 0..{n - 1}"
            )
            continue
        for idx in range(span.token_start, span.token_end + 1):
            if idx in covered:
                problems.append(
                    f"span at {span.token_start} overlaps span at {covered[idx].token_start}"
                )
                break
            covered[idx] = span
        by_start[span.token_start] = span
    for edge in relations:
        if edge.label not in RELATION_LABELS:
            problems.append(f"relation {edge.parent}->{edge.child} has unknown label {edge.label!r}")
        if edge.parent == edge.child:
            problems.append(f"relation at {edge.parent} links a span to itself")
        for end_name, span_id in (("parent", edge.parent), ("child", edge.child)):
            if span_id not in by_start:
                problems.append(f"relation {end_name} id {span_id} resolves to no span")
    return problems


def correction_violations(tokens, entities, relations) -> list[str]:
    """Structural violations plus gold directionality, for reviewed corrections."""
    problems = doc_violations(tokens, entities, relations)
    by_start = {s.token_start: s for s in entities}
    for edge in relations:
        parent = by_start.get(edge.parent)
        child = by_start.get(edge.child)
        if parent is not None and parent.label not in GOLD_PARENT_LABELS:
            problems.append(
                f"relation parent at {edge.parent} must be INTV or OC, got {parent.label}"
            )
        if child is not None and child.label != GOLD_CHILD_LABEL:
            problems.append(f"relation child at {edge.child} must be MEAS, got {child.label}")
    return problems
