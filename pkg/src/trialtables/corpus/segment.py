"""Sentence segmentation and result-sentence selection for abstracts."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from trialtables.corpus.records import Doc, is_numeric_token, make_doc, tokenize

# Digits joined by . or , never end a sentence ("18.3", "0.01", "1,5").
_DECIMAL_RE = re.compile(r"\d+(?:[.,]\d+)+")

# Uppercase run followed by a colon at text/line/sentence start ("RESULTS:").
_HEADER_RE = re.compile(r"(^|\n|[.!?]\s+)([A-Z][A-Z &/-]{2,40}):\s*")

_CLOSERS = "\"')]"
_TERMINALS = ".!?"


@dataclass(frozen=True)
class Segment:
    """One sentence with its character span in the segmented text."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class AbstractSection:
    """A labelled stretch of abstract text; offsets index the source text."""

    label: str
    text: str
    start: int = 0
    end: int = -1

    def __post_init__(self):
        if self.end < 0:
            object.__setattr__(self, "end", self.start + len(self.text))


@dataclass(frozen=True)
class SentenceRow:
    """One sentence in reading order, with its section label and source span."""

    index: int
    section: str
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class StructuredAbstract:
    """Abstract split into (possibly unlabelled) sections for selection."""

    pmid: str
    sections: tuple[AbstractSection, ...]
    domain: str = ""
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, pmid: str, text: str, domain: str = "") -> "StructuredAbstract":
        return cls(pmid=pmid, sections=detect_sections(text), domain=domain)


def load_abbreviations() -> frozenset[str]:
    """Dotted abbreviations whose trailing period is not a sentence end."""
    raw = resources.files("trialtables.data").joinpath("abbreviations.txt").read_text("utf-8")
    entries = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line.lower())
    return frozenset(entries)


def _protected_ranges(text: str, lexicon: frozenset[str]) -> list[tuple[int, int]]:
    ranges = [m.span() for m in _DECIMAL_RE.finditer(text)]
    lowered = text.lower()
    for abbr in lexicon:
        pos = lowered.find(abbr)
        while pos != -1:
            if pos == 0 or not text[pos - 1].isalnum():
                ranges.append((pos, pos + len(abbr)))
            pos = lowered.find(abbr, pos + 1)
    return ranges


def segment_sentences(text: str, lexicon: frozenset[str] | None = None) -> list[Segment]:
    """Split text into sentences, each carrying its source character span.

    A terminal mark splits only outside protected ranges and only when
    followed (after optional closers) by whitespace and an uppercase letter
    or digit, or by end of text. Protection covers the matched pattern
    itself, nothing beyond it: the period trailing "18.3 mm Hg." still
    splits even though the decimal point inside "18.3" never does.
    """
    if lexicon is None:
        lexicon = load_abbreviations()
    protected = _protected_ranges(text, lexicon)

    def is_protected(i: int) -> bool:
        return any(s <= i < e for s, e in protected)

    n = len(text)
    boundaries = []
    i = 0
    while i < n:
        if text[i] in _TERMINALS and not is_protected(i):
            j = i + 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k == n or (k > j and (text[k].isupper() or text[k].isdigit())):
                boundaries.append(j)
                i = j
                continue
        i += 1

    segments = []
    prev = 0
    for bound in [*boundaries, n]:
        chunk = text[prev:bound]
        lead = len(chunk) - len(chunk.lstrip())
        start, end = prev + lead, prev + len(chunk.rstrip())
        if end > start:
            segments.append(Segment(text[start:end], start, end))
        prev = bound
    if not segments:
        return [Segment(text, 0, n)]
    return segments


def _trim(text: str, start: int, stop: int) -> tuple[int, int]:
    while start < stop and text[start].isspace():
        start += 1
    while stop > start and text[stop - 1].isspace():
        stop -= 1
    return start, stop


def detect_sections(text: str) -> tuple[AbstractSection, ...]:
    """Slice abstract text at uppercase headers; headerless text is one section."""
    matches = list(_HEADER_RE.finditer(text))
    if not matches:
        return (AbstractSection(label="", text=text, start=0, end=len(text)),)
    sections = []
    lead_start, lead_stop = _trim(text, 0, matches[0].start(2))
    if lead_stop > lead_start:
        sections.append(
            AbstractSection(label="", text=text[lead_start:lead_stop], start=lead_start, end=lead_stop)
        )
    for pos, match in enumerate(matches):
        stop = matches[pos + 1].start(2) if pos + 1 < len(matches) else len(text)
        start, stop = _trim(text, match.end(), stop)
        sections.append(
            AbstractSection(label=match.group(2).strip(), text=text[start:stop], start=start, end=stop)
        )
    return tuple(sections)


def numbered_sentences(
    abstract: StructuredAbstract, lexicon: frozenset[str] | None = None
) -> list[SentenceRow]:
    """All sentences of an abstract in reading order with stable indexes.

    Start/end offsets index the source text the sections were cut from, so
    character-offset annotations can be projected onto sentences.
    """
    if lexicon is None:
        lexicon = load_abbreviations()
    rows = []
    index = 0
    for section in abstract.sections:
        for seg in segment_sentences(section.text, lexicon):
            if not tokenize(seg.text):
                continue
            rows.append(
                SentenceRow(
                    index=index,
                    section=section.label,
                    text=seg.text,
                    start=section.start + seg.start,
                    end=section.start + seg.end,
                )
            )
            index += 1
    return rows


def _is_results_label(label: str) -> bool:
    upper = label.upper()
    return "RESULT" in upper or "FINDING" in upper


def select_result_rows(
    abstract: StructuredAbstract, lexicon: frozenset[str] | None = None
) -> tuple[list[SentenceRow], bool]:
    """Result sentences of an abstract, plus whether the fallback rule fired.

    Sentences of a results-labelled section win when such a section exists;
    otherwise every sentence containing a numeric token is selected, since
    headerless abstracts give no positive signal about which sentences
    report results.
    """
    rows = numbered_sentences(abstract, lexicon)
    selected = [row for row in rows if _is_results_label(row.section)]
    if selected:
        return selected, False
    fallback = [
        row for row in rows if any(is_numeric_token(tok.text) for tok in tokenize(row.text))
    ]
    return fallback, True


def select_result_sentences(
    abstract: StructuredAbstract, lexicon: frozenset[str] | None = None
) -> list[Doc]:
    """Pick the result sentences of an abstract as per-sentence Docs.

    Sentence indexes count all sentences of the abstract in reading order,
    so a Doc's id is stable regardless of which sentences were selected.
    Fallback-selected Docs carry a low-confidence flag in their metadata.
    """
    rows, fallback = select_result_rows(abstract, lexicon)
    docs = []
    for row in rows:
        meta = {"pmid": abstract.pmid, "sent": row.index}
        if abstract.domain:
            meta["domain"] = abstract.domain
        if row.section:
            meta["section"] = row.section
        if fallback:
            meta["section_fallback"] = True
        docs.append(make_doc(row.text, meta=meta))
    return docs
