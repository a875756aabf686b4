"""Micro-averaged P/R/F1 for the five system tasks, plus confusion matrices.

Evaluation units per task: entity spans (exact boundaries + label), relation
triples over gold spans (direction matters), edge/entity sets for the joint
task, and table rows for strict and relaxed tabulation matching. Counts are
summed globally across labels before computing scores; per-label rows are
reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from trialtables.corpus.records import ENTITY_LABELS, RELATION_LABELS, Doc
from trialtables.errors import ContractError, PairingError

NONE_LABEL = "NONE"


@dataclass(frozen=True)
class MetricCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "MetricCounts") -> "MetricCounts":
        return MetricCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def prf(counts: MetricCounts) -> tuple[float, float, float]:
    """Precision, recall and F1 from raw counts.

    Any zero denominator yields 0 for that score, so the all-zero case is
    (0, 0, 0) and F1 is 0 exactly when tp is 0.
    """
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = tp / (tp + 0.5 * (fp + fn)) if tp + fp + fn else 0.0
    return p, r, f1


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, counts: MetricCounts) -> "Metrics":
        p, r, f1 = prf(counts)
        return cls(counts.tp, counts.fp, counts.fn, p, r, f1)

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "p": self.precision,
            "r": self.recall,
            "f1": self.f1,
        }


@dataclass
class MetricsReport:
    task: str
    overall: Metrics
    per_label: dict[str, Metrics]
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        record = {
            "task": self.task,
            "overall": self.overall.as_dict(),
            "per_label": {label: m.as_dict() for label, m in self.per_label.items()},
            "config": self.config,
        }
        if self.extra:
            record["extra"] = self.extra
        return record

    def lines(self) -> list[str]:
        header = f"{'label':<12} {'tp':>6} {'fp':>6} {'fn':>6} {'P':>7} {'R':>7} {'F1':>7}"
        out = [f"task: {self.task}", header, "-" * len(header)]
        for label in sorted(self.per_label):
            m = self.per_label[label]
            out.append(
                f"{label:<12} {m.tp:>6} {m.fp:>6} {m.fn:>6} "
                f"{m.precision:>7.3f} {m.recall:>7.3f} {m.f1:>7.3f}"
            )
        m = self.overall
        out.append(
            f"{'overall':<12} {m.tp:>6} {m.fp:>6} {m.fn:>6} "
            f"{m.precision:>7.3f} {m.recall:>7.3f} {m.f1:>7.3f}"
        )
        for key, value in self.config.items():
            out.append(f"# {key}={value}")
        return out


def _build_report(task: str, counts_by_label: dict[str, MetricCounts], config=None, extra=None):
    overall = MetricCounts()
    for counts in counts_by_label.values():
        overall = overall + counts
    return MetricsReport(
        task=task,
        overall=Metrics.from_counts(overall),
        per_label={label: Metrics.from_counts(c) for label, c in counts_by_label.items()},
        config=dict(config or {}),
        extra=dict(extra or {}),
    )


def pair_docs(pred_docs, gold_docs) -> list[tuple[Doc, Doc]]:
    """Match predictions to golds one-to-one by doc id, in gold order."""
    pred_by_id: dict[str, Doc] = {}
    for doc in pred_docs:
        if doc.doc_id in pred_by_id:
            raise PairingError(f"duplicate predicted doc id {doc.doc_id}")
        pred_by_id[doc.doc_id] = doc
    pairs = []
    seen = set()
    for gold in gold_docs:
        if gold.doc_id in seen:
            raise PairingError(f"duplicate gold doc id {gold.doc_id}")
        seen.add(gold.doc_id)
        if gold.doc_id not in pred_by_id:
            raise PairingError(f"no prediction for doc id {gold.doc_id}")
        pairs.append((pred_by_id.pop(gold.doc_id), gold))
    if pred_by_id:
        raise PairingError(f"predictions without gold docs: {sorted(pred_by_id)}")
    return pairs


def _span_key(span) -> tuple[int, int, str]:
    return (span.token_start, span.token_end, span.label)


def _count_sets(counts: dict[str, MetricCounts], pred: set, gold: set, label_of) -> None:
    for item in pred & gold:
        label = label_of(item)
        counts[label] = counts.get(label, MetricCounts()) + MetricCounts(tp=1)
    for item in pred - gold:
        label = label_of(item)
        counts[label] = counts.get(label, MetricCounts()) + MetricCounts(fp=1)
    for item in gold - pred:
        label = label_of(item)
        counts[label] = counts.get(label, MetricCounts()) + MetricCounts(fn=1)


def eval_ner(pred_docs, gold_docs) -> MetricsReport:
    """Exact span matching: tp iff start, end and label all agree."""
    counts = {label: MetricCounts() for label in ENTITY_LABELS}
    for pred, gold in pair_docs(pred_docs, gold_docs):
        _count_sets(
            counts,
            {_span_key(s) for s in pred.entities},
            {_span_key(s) for s in gold.entities},
            label_of=lambda item: item[2],
        )
    return _build_report("ner", counts, config={"matching": "exact-span"})


def eval_re_gold(pred_docs, gold_docs) -> MetricsReport:
    """Relation triples over gold spans; direction is part of the identity."""
    counts = {label: MetricCounts() for label in RELATION_LABELS}
    for pred, gold in pair_docs(pred_docs, gold_docs):
        pred_spans = {_span_key(s) for s in pred.entities}
        gold_spans = {_span_key(s) for s in gold.entities}
        if pred_spans != gold_spans:
            raise ContractError(
                f"doc {gold.doc_id}: RE-over-gold requires identical entity spans"
            )
        _count_sets(
            counts,
            {(e.parent, e.child, e.label) for e in pred.relations},
            {(e.parent, e.child, e.label) for e in gold.relations},
            label_of=lambda item: item[2],
        )
    return _build_report("re-gold", counts, config={"matching": "ordered-triple"})


def _edge_keys(doc: Doc) -> set[tuple[tuple[int, int], tuple[int, int], str]]:
    keys = set()
    for edge in doc.relations:
        parent = doc.span_by_id(edge.parent)
        child = doc.span_by_id(edge.child)
        keys.add(
            (
                (parent.token_start, parent.token_end),
                (child.token_start, child.token_end),
                edge.label,
            )
        )
    return keys


def _paired_span_bounds(doc: Doc) -> set[tuple[int, int]]:
    bounds = set()
    for edge in doc.relations:
        for span_id in (edge.parent, edge.child):
            span = doc.span_by_id(span_id)
            bounds.add((span.token_start, span.token_end))
    return bounds


def eval_joint(pred_docs, gold_docs) -> MetricsReport:
    """End-to-end scoring of predicted entities and edges together.

    Edges compare as (parent bounds, child bounds, label) ordered triples.
    Entities enter a second, NER-style comparison only when they carry no
    edge on their own side and their bounds are not part of any gold pair,
    since paired entities are already accounted for through the edge rule.
    """
    counts: dict[str, MetricCounts] = {
        label: MetricCounts() for label in (*RELATION_LABELS, *ENTITY_LABELS)
    }
    for pred, gold in pair_docs(pred_docs, gold_docs):
        _count_sets(
            counts, _edge_keys(pred), _edge_keys(gold), label_of=lambda item: item[2]
        )
        gold_paired = _paired_span_bounds(gold)
        pred_paired = _paired_span_bounds(pred)
        pred_free = {
            _span_key(s)
            for s in pred.entities
            if (s.token_start, s.token_end) not in pred_paired
            and (s.token_start, s.token_end) not in gold_paired
        }
        gold_free = {
            _span_key(s)
            for s in gold.entities
            if (s.token_start, s.token_end) not in gold_paired
        }
        _count_sets(counts, pred_free, gold_free, label_of=lambda item: item[2])
    return _build_report(
        "joint", counts, config={"matching": "edges-then-unpaired-entities"}
    )


def _strict_match_counts(pred_rows, gold_rows) -> tuple[int, list, list]:
    gold_left = list(gold_rows)
    unmatched_pred = []
    tp = 0
    for row in pred_rows:
        if row in gold_left:
            gold_left.remove(row)
            tp += 1
        else:
            unmatched_pred.append(row)
    return tp, unmatched_pred, gold_left


def _cell_tokens(cell: str) -> set[str]:
    return set(cell.lower().split())


def _relaxed_row_match(pred_row, gold_row) -> bool:
    if len(pred_row) != len(gold_row):
        return False
    for pred_cell, gold_cell in zip(pred_row, gold_row):
        gold_tokens = _cell_tokens(gold_cell)
        if gold_tokens and not (gold_tokens & _cell_tokens(pred_cell)):
            return False
    return True


def _pair_tables(pred_tables: dict, gold_tables: dict) -> list[tuple[str, list, list]]:
    if set(pred_tables) != set(gold_tables):
        missing = sorted(set(gold_tables) - set(pred_tables))
        extra = sorted(set(pred_tables) - set(gold_tables))
        raise PairingError(f"table sets differ: missing pred {missing}, extra pred {extra}")
    return [(key, list(pred_tables[key]), list(gold_tables[key])) for key in sorted(gold_tables)]


def _table_stats(pairs) -> dict:
    exact = sum(1 for _, p, g in pairs if sorted(p) == sorted(g))
    empty_pred = sum(1 for _, p, g in pairs if not p and g)
    return {"files": len(pairs), "exact_files": exact, "empty_pred_files": empty_pred}


def eval_tab_strict(pred_tables: dict, gold_tables: dict) -> MetricsReport:
    """Tuple-level exact matching of table rows, greedy within a file pair.

    Tables are dicts of doc id to row-tuple lists. Each gold row matches at
    most one identical predicted row; leftovers count fp (predicted) or fn
    (gold), which covers the empty-prediction rule: an empty predicted table
    against a non-empty gold one contributes one fn per gold row.
    """
    pairs = _pair_tables(pred_tables, gold_tables)
    total = MetricCounts()
    for _, pred_rows, gold_rows in pairs:
        tp, unmatched_pred, gold_left = _strict_match_counts(pred_rows, gold_rows)
        total = total + MetricCounts(tp=tp, fp=len(unmatched_pred), fn=len(gold_left))
    return _build_report(
        "tab-strict",
        {"tuple": total},
        config={"matching": "exact-tuple"},
        extra={"tables": _table_stats(pairs)},
    )


def eval_tab_relaxed(pred_tables: dict, gold_tables: dict) -> MetricsReport:
    """Row matching by per-cell token overlap, order preserved.

    Exact matches are taken first, then the remaining predicted rows match
    greedily against remaining gold rows; a pair matches when every
    non-empty gold cell shares at least one case-insensitive whitespace
    token with the predicted cell in the same position. Taking exact
    matches first makes relaxed F1 at least strict F1 on the same inputs.
    """
    pairs = _pair_tables(pred_tables, gold_tables)
    total = MetricCounts()
    for _, pred_rows, gold_rows in pairs:
        tp, unmatched_pred, gold_left = _strict_match_counts(pred_rows, gold_rows)
        for row in unmatched_pred:
            hit = next((g for g in gold_left if _relaxed_row_match(row, g)), None)
            if hit is not None:
                gold_left.remove(hit)
                tp += 1
            else:
                total = total + MetricCounts(fp=1)
        total = total + MetricCounts(tp=tp, fn=len(gold_left))
    return _build_report(
        "tab-relaxed",
        {"tuple": total},
        config={"matching": "cellwise-token-overlap"},
        extra={"tables": _table_stats(pairs)},
    )


@dataclass
class ConfusionMatrix:
    """Gold-by-predicted count grid; rows are gold classes."""

    labels: tuple[str, ...]
    counts: np.ndarray
    normalized: bool = False

    def normalize(self) -> "ConfusionMatrix":
        """Per-gold-row proportions; all-zero rows stay zero."""
        totals = self.counts.sum(axis=1, keepdims=True)
        safe = np.where(totals == 0, 1, totals)
        return ConfusionMatrix(self.labels, self.counts / safe, normalized=True)

    def to_csv_text(self) -> str:
        rows = ["gold\\pred," + ",".join(self.labels)]
        for i, label in enumerate(self.labels):
            if self.normalized:
                cells = [f"{v:.4f}" for v in self.counts[i]]
            else:
                cells = [str(int(v)) for v in self.counts[i]]
            rows.append(label + "," + ",".join(cells))
        return "\n".join(rows) + "\n"

    def lines(self) -> list[str]:
        width = max(8, max(len(l) for l in self.labels) + 1)
        out = [" " * width + "".join(f"{l:>{width}}" for l in self.labels)]
        for i, label in enumerate(self.labels):
            if self.normalized:
                cells = "".join(f"{v:>{width}.3f}" for v in self.counts[i])
            else:
                cells = "".join(f"{int(v):>{width}}" for v in self.counts[i])
            out.append(f"{label:<{width}}" + cells)
        return out


def _token_classes(doc: Doc) -> list[str]:
    classes = [NONE_LABEL] * len(doc.tokens)
    for span in doc.entities:
        for idx in range(span.token_start, span.token_end + 1):
            classes[idx] = span.label
    return classes


def confusion_ner(pred_docs, gold_docs, normalize: bool = True) -> ConfusionMatrix:
    """Token-level confusion over entity classes plus NONE."""
    labels = (*ENTITY_LABELS, NONE_LABEL)
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.float64)
    for pred, gold in pair_docs(pred_docs, gold_docs):
        if len(pred.tokens) != len(gold.tokens):
            raise PairingError(f"doc {gold.doc_id}: token counts differ")
        for gold_class, pred_class in zip(_token_classes(gold), _token_classes(pred)):
            counts[index[gold_class], index[pred_class]] += 1
    matrix = ConfusionMatrix(labels, counts)
    return matrix.normalize() if normalize else matrix


def _pair_labels(doc: Doc) -> dict[tuple, str]:
    out = {}
    for edge in doc.relations:
        parent = doc.span_by_id(edge.parent)
        child = doc.span_by_id(edge.child)
        key = ((parent.token_start, parent.token_end), (child.token_start, child.token_end))
        out[key] = edge.label
    return out


def confusion_re(pred_docs, gold_docs, normalize: bool = True) -> ConfusionMatrix:
    """Ordered-pair confusion over relation labels plus NONE.

    The pair universe is the union of gold-labelled and predicted pairs;
    pairs labelled by neither side do not appear.
    """
    labels = (*RELATION_LABELS, NONE_LABEL)
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.float64)
    for pred, gold in pair_docs(pred_docs, gold_docs):
        pred_pairs = _pair_labels(pred)
        gold_pairs = _pair_labels(gold)
        for key in set(pred_pairs) | set(gold_pairs):
            gold_label = gold_pairs.get(key, NONE_LABEL)
            pred_label = pred_pairs.get(key, NONE_LABEL)
            counts[index[gold_label], index[pred_label]] += 1
    matrix = ConfusionMatrix(labels, counts)
    return matrix.normalize() if normalize else matrix
