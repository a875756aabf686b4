"""Brute-force reference implementations used to cross-check the library.

Everything here is deliberately naive: direct formula evaluation, quadratic
list matching, no shared code with the package beyond the record classes.
When a library result disagrees with these, the library is wrong.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction


def brute_prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if tp == fp == fn == 0:
        return (0.0, 0.0, 0.0)
    p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = Fraction(2 * tp, 2 * tp + fp + fn) if 2 * tp + fp + fn else Fraction(0)
    return (float(p), float(r), float(f1))


def _match_lists(pred: list, gold: list) -> tuple[int, int, int]:
    """tp/fp/fn by removing each matched gold item once."""
    gold_left = list(gold)
    tp = fp = 0
    for item in pred:
        if item in gold_left:
            gold_left.remove(item)
            tp += 1
        else:
            fp += 1
    return tp, fp, len(gold_left)


def _add(counts: dict, label: str, tp: int, fp: int, fn: int) -> None:
    old = counts.get(label, (0, 0, 0))
    counts[label] = (old[0] + tp, old[1] + fp, old[2] + fn)


def brute_ner_counts(pred_docs, gold_docs) -> dict[str, tuple[int, int, int]]:
    """Exact-span matching, computed label by label with naive list removal."""
    gold_by_id = {d.doc_id: d for d in gold_docs}
    counts: dict[str, tuple[int, int, int]] = {}
    for pred in pred_docs:
        gold = gold_by_id[pred.doc_id]
        labels = {s.label for s in pred.entities} | {s.label for s in gold.entities}
        for label in labels:
            p = [(s.token_start, s.token_end) for s in pred.entities if s.label == label]
            g = [(s.token_start, s.token_end) for s in gold.entities if s.label == label]
            _add(counts, label, *_match_lists(p, g))
    return counts


def brute_re_counts(pred_docs, gold_docs) -> dict[str, tuple[int, int, int]]:
    """Ordered (parent, child, label) triples over shared gold spans."""
    gold_by_id = {d.doc_id: d for d in gold_docs}
    counts: dict[str, tuple[int, int, int]] = {}
    for pred in pred_docs:
        gold = gold_by_id[pred.doc_id]
        labels = {e.label for e in pred.relations} | {e.label for e in gold.relations}
        for label in labels:
            p = [(e.parent, e.child) for e in pred.relations if e.label == label]
            g = [(e.parent, e.child) for e in gold.relations if e.label == label]
            _add(counts, label, *_match_lists(p, g))
    return counts


def _bounds(doc, span_id):
    span = doc.span_by_id(span_id)
    return (span.token_start, span.token_end)


def brute_joint_counts(pred_docs, gold_docs) -> dict[str, tuple[int, int, int]]:
    """Edges first (bounds-addressed), then entities outside every pair."""
    gold_by_id = {d.doc_id: d for d in gold_docs}
    counts: dict[str, tuple[int, int, int]] = {}
    for pred in pred_docs:
        gold = gold_by_id[pred.doc_id]
        pred_edges = [
            (_bounds(pred, e.parent), _bounds(pred, e.child), e.label)
            for e in pred.relations
        ]
        gold_edges = [
            (_bounds(gold, e.parent), _bounds(gold, e.child), e.label)
            for e in gold.relations
        ]
        for label in {e[2] for e in pred_edges} | {e[2] for e in gold_edges}:
            p = [e[:2] for e in pred_edges if e[2] == label]
            g = [e[:2] for e in gold_edges if e[2] == label]
            _add(counts, label, *_match_lists(p, g))
        pred_in_pairs = {b for e in pred_edges for b in e[:2]}
        gold_in_pairs = {b for e in gold_edges for b in e[:2]}
        free_pred = [
            s for s in pred.entities
            if (s.token_start, s.token_end) not in pred_in_pairs
            and (s.token_start, s.token_end) not in gold_in_pairs
        ]
        free_gold = [
            s for s in gold.entities
            if (s.token_start, s.token_end) not in gold_in_pairs
        ]
        for label in {s.label for s in free_pred} | {s.label for s in free_gold}:
            p = [(s.token_start, s.token_end) for s in free_pred if s.label == label]
            g = [(s.token_start, s.token_end) for s in free_gold if s.label == label]
            _add(counts, label, *_match_lists(p, g))
    return counts


def brute_tab_strict_counts(pred_tables: dict, gold_tables: dict) -> tuple[int, int, int]:
    """Multiset row intersection per file pair; leftovers are fp/fn."""
    tp = fp = fn = 0
    for key in gold_tables:
        pred = Counter(tuple(r) for r in pred_tables[key])
        gold = Counter(tuple(r) for r in gold_tables[key])
        both = pred & gold
        tp += sum(both.values())
        fp += sum((pred - gold).values())
        fn += sum((gold - pred).values())
    return tp, fp, fn


def _cells_overlap(pred_row, gold_row) -> bool:
    for pred_cell, gold_cell in zip(pred_row, gold_row):
        gold_tokens = set(gold_cell.lower().split())
        if gold_tokens and not gold_tokens & set(pred_cell.lower().split()):
            return False
    return len(pred_row) == len(gold_row)


def brute_tab_relaxed_counts(pred_tables: dict, gold_tables: dict) -> tuple[int, int, int]:
    """Exact matches first, then greedy overlap in pred order, gold order."""
    tp = fp = fn = 0
    for key in gold_tables:
        pred_rows = [tuple(r) for r in pred_tables[key]]
        gold_rows = [tuple(r) for r in gold_tables[key]]
        gold_left = list(gold_rows)
        residual = []
        for row in pred_rows:
            if row in gold_left:
                gold_left.remove(row)
                tp += 1
            else:
                residual.append(row)
        for row in residual:
            matched = None
            for g in gold_left:
                if _cells_overlap(row, g):
                    matched = g
                    break
            if matched is not None:
                gold_left.remove(matched)
                tp += 1
            else:
                fp += 1
        fn += len(gold_left)
    return tp, fp, fn


def brute_spans_from_actions(action_names: list[str]) -> list[tuple[str, int, int]]:
    """Reconstruct spans by scanning an action-name sequence token by token.

    Independent of the parser: each action name consumes one token position;
    Unit closes immediately, Begin..Last bracket a span.
    """
    spans = []
    open_start = None
    open_label = None
    for pos, name in enumerate(action_names):
        if name == "Out":
            continue
        kind, _, label = name.partition("-")
        if kind == "Unit":
            spans.append((label, pos, pos))
        elif kind == "Begin":
            open_start, open_label = pos, label
        elif kind == "Last":
            spans.append((open_label, open_start, pos))
            open_start = open_label = None
    return spans
