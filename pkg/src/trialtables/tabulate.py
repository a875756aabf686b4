"""Evidence-table assembly: turn a Doc's entities and relation edges into
(outcome, arm 1, arm 2) rows, emit them as CSV, and run the staged
sentence→table pipeline over a batch.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from trialtables.corpus.records import Doc, make_doc
from trialtables.errors import ConfigurationError
from trialtables.modelio import require_matching_backends
from trialtables.ner.model import decode
from trialtables.relex import predict_doc

OUTCOME_HEADER = "outcome"
CELL_JOIN = "; "

# Column index per arm edge label; arm identity never comes from surface order.
_ARM_COLUMN = {"A1_RES": 0, "A2_RES": 1}


@dataclass(frozen=True)
class EvidenceTuple:
    """One table row; cells may be empty strings but are never absent."""

    outcome: str
    arm1: str
    arm2: str

    def astuple(self) -> tuple[str, str, str]:
        return (self.outcome, self.arm1, self.arm2)


@dataclass(frozen=True)
class EvidenceTable:
    doc_id: str
    header: tuple[str, str, str]
    rows: tuple[EvidenceTuple, ...]
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def _meas_placements(doc: Doc, diagnostics: list[str]):
    """Resolve each measure span to (outcome id or None, column or None).

    Conflicting edges are resolved deterministically: the earliest outcome
    parent wins, arm 1 outranks arm 2. Every resolution that drops an edge
    leaves a diagnostic; nothing is dropped silently.
    """
    labels = {span.id: span.label for span in doc.entities}
    oc_parents: dict[int, list[int]] = {}
    arm_edges: dict[int, list[tuple[int, int]]] = {}
    for edge in doc.relations:
        if labels.get(edge.child) != "MEAS":
            diagnostics.append(
                f"edge {edge.label} {edge.parent}->{edge.child} ignored: child is not a measure"
            )
            continue
        if edge.label == "OC_RES":
            if labels.get(edge.parent) != "OC":
                diagnostics.append(
                    f"edge OC_RES {edge.parent}->{edge.child} ignored: parent is not an outcome"
                )
                continue
            oc_parents.setdefault(edge.child, []).append(edge.parent)
        else:
            if labels.get(edge.parent) != "INTV":
                diagnostics.append(
                    f"edge {edge.label} {edge.parent}->{edge.child}: "
                    "parent is not an intervention; column kept, header vote skipped"
                )
            arm_edges.setdefault(edge.child, []).append(
                (_ARM_COLUMN[edge.label], edge.parent)
            )
    placements = {}
    for span in doc.entities:
        if span.label != "MEAS":
            continue
        outcome_id = None
        parents = sorted(oc_parents.get(span.id, []))
        if parents:
            outcome_id = parents[0]
            if len(parents) > 1:
                diagnostics.append(
                    f"measure {span.id} has {len(parents)} outcome parents; "
                    f"kept earliest ({outcome_id})"
                )
        column = None
        arm_parent = None
        edges = sorted(arm_edges.get(span.id, []))
        if edges:
            column, arm_parent = edges[0]
            if len({col for col, _ in edges}) > 1 or len(edges) > 1:
                diagnostics.append(
                    f"measure {span.id} has {len(edges)} arm edges; kept arm {column + 1}"
                )
        if outcome_id is None and column is None:
            continue
        if column is None:
            diagnostics.append(
                f"measure {span.id} linked to outcome {outcome_id} but has no arm edge; "
                "not placed in a cell"
            )
            continue
        placements[span.id] = (outcome_id, column, arm_parent)
    return placements


def _arm_header(doc: Doc, votes: list[int]) -> str:
    """Majority vote over intervention parents; earliest span breaks ties."""
    if not votes:
        return ""
    counts: dict[int, int] = {}
    for parent in votes:
        counts[parent] = counts.get(parent, 0) + 1
    winner = min(counts, key=lambda pid: (-counts[pid], pid))
    return doc.span_text(doc.span_by_id(winner))


def assemble_table(doc: Doc) -> EvidenceTable:
    """Build the evidence table for one Doc; total on any valid Doc.

    Every outcome span owns one row (possibly with empty cells) in span
    order. Measures with an arm edge but no outcome parent share a single
    trailing row with empty outcome text.
    """
    diagnostics: list[str] = []
    placements = _meas_placements(doc, diagnostics)
    labels_by_id = {span.id: span.label for span in doc.entities}

    oc_ids = [span.id for span in doc.entities if span.label == "OC"]
    cells: dict[object, tuple[list[int], list[int]]] = {oc: ([], []) for oc in oc_ids}
    orphan: tuple[list[int], list[int]] = ([], [])
    votes: tuple[list[int], list[int]] = ([], [])
    for meas_id in sorted(placements):
        outcome_id, column, arm_parent = placements[meas_id]
        target = cells[outcome_id] if outcome_id is not None else orphan
        target[column].append(meas_id)
        if arm_parent is not None and labels_by_id.get(arm_parent) == "INTV":
            votes[column].append(arm_parent)

    def cell_text(meas_ids: list[int]) -> str:
        return CELL_JOIN.join(
            doc.span_text(doc.span_by_id(mid)) for mid in sorted(meas_ids)
        )

    rows = [
        EvidenceTuple(
            outcome=doc.span_text(doc.span_by_id(oc)),
            arm1=cell_text(cells[oc][0]),
            arm2=cell_text(cells[oc][1]),
        )
        for oc in oc_ids
    ]
    if orphan[0] or orphan[1]:
        rows.append(EvidenceTuple("", cell_text(orphan[0]), cell_text(orphan[1])))
    header = (OUTCOME_HEADER, _arm_header(doc, votes[0]), _arm_header(doc, votes[1]))
    return EvidenceTable(
        doc_id=doc.doc_id,
        header=header,
        rows=tuple(rows),
        diagnostics=tuple(diagnostics),
    )


def emit_csv(table: EvidenceTable) -> str:
    """Render a table as CSV text: header line, then rows, trailing newline."""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow(row.astuple())
    return buf.getvalue()


def read_csv_rows(text: str) -> tuple[tuple[str, ...], list[tuple[str, str, str]]]:
    """Parse CSV text back into (header, data row tuples)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return ((), [])
    header = tuple(rows[0])
    return header, [tuple((r + ["", "", ""])[:3]) for r in rows[1:]]


def _as_docs(inputs) -> list[Doc]:
    docs = []
    for i, item in enumerate(inputs):
        if isinstance(item, Doc):
            docs.append(item)
        else:
            docs.append(make_doc(str(item), meta={"pmid": "input", "sent": i}))
    return docs


def tabulate_doc(doc: Doc, ner_model, re_model, threshold: float = 0.5) -> EvidenceTable:
    """Full staged pipeline on one Doc: tag entities, relate pairs, assemble."""
    tagged = decode(doc, ner_model)
    related = predict_doc(tagged, re_model, threshold)
    return assemble_table(related)


def tabulate_batch(
    inputs,
    out_dir: str | Path,
    ner_model=None,
    re_model=None,
    threshold: float = 0.5,
    gold_passthrough: bool = False,
) -> dict[str, str]:
    """Write one `<doc_id>.csv` per input; returns the id → file-name manifest.

    With ``gold_passthrough`` the models are bypassed and the inputs' own
    annotations feed assembly directly. Otherwise both models are required
    and must agree on their scorer backend; that check happens before any
    file is written. A `manifest.tsv` accompanies the tables.
    """
    docs = _as_docs(inputs)
    if not gold_passthrough:
        if ner_model is None or re_model is None:
            raise ConfigurationError("batch tabulation needs both models unless bypassed")
        require_matching_backends(ner_model, re_model)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict[str, str] = {}
    for doc in docs:
        if gold_passthrough:
            table = assemble_table(doc)
        else:
            table = tabulate_doc(doc, ner_model, re_model, threshold)
        name = f"{doc.doc_id.replace('/', '_')}.csv"
        (out_dir / name).write_text(emit_csv(table), encoding="utf-8")
        manifest[doc.doc_id] = name
    with (out_dir / "manifest.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        for doc_id, name in manifest.items():
            fh.write(f"{doc_id}\t{name}\n")
    return manifest
