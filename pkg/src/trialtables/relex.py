"""Relation extraction over entity pairs: instance generation, sigmoid
scoring per relation label, thresholded prediction, and training.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from trialtables.corpus.records import RELATION_LABELS, Doc, RelationEdge
from trialtables.errors import ContractError, SplitSizeError
from trialtables.evaluate import eval_re_gold
from trialtables.features import HashedBackend, score_input
from trialtables.training import (
    Adam,
    TrainConfig,
    apply_dropout,
    sgd_sparse_update,
    training_loop,
)

MAX_PAIR_DISTANCE = 100
THRESHOLD_DEFAULT = 0.5

# Keeps sigmoid outputs strictly inside (0,1) in float64.
_LOGIT_CLIP = 30.0


@dataclass(frozen=True)
class PairInstance:
    """One ordered candidate pair, identified by the spans' start tokens."""

    parent: int
    child: int
    pooled_parent: object = None
    pooled_child: object = None


def generate_instances(doc: Doc, max_pair_distance: int = MAX_PAIR_DISTANCE, backend=None):
    """All ordered in-window span pairs, in (parent start, child start) order.

    Both directions of each unordered pair are generated and no label-based
    filtering happens here; the classifier learns to suppress implausible
    pairs. The window compares span start tokens.
    """
    instances = []
    spans = doc.entities
    for parent in spans:
        for child in spans:
            if parent.id == child.id:
                continue
            if abs(child.token_start - parent.token_start) > max_pair_distance:
                continue
            pooled_parent = pooled_child = None
            if backend is not None:
                pooled_parent = backend.span_pool(doc, parent.token_start, parent.token_end)
                pooled_child = backend.span_pool(doc, child.token_start, child.token_end)
            instances.append(PairInstance(parent.id, child.id, pooled_parent, pooled_child))
    return instances


def pair_input(backend, doc: Doc, parent_id: int, child_id: int):
    """Scorer input for one ordered pair: parent block, child block, bias.

    Sparse inputs put the child's buckets in a second hash space and the
    bias on a dedicated final index; dense inputs concatenate the pooled
    vectors and append the bias term.
    """
    parent = doc.span_by_id(parent_id)
    child = doc.span_by_id(child_id)
    pooled_parent = backend.span_pool(doc, parent.token_start, parent.token_end)
    pooled_child = backend.span_pool(doc, child.token_start, child.token_end)
    width = backend.token_width
    if isinstance(pooled_parent, dict):
        x = dict(pooled_parent)
        for key, value in pooled_child.items():
            x[key + width] = value
        x[2 * width] = 1.0
        return x
    return np.concatenate([pooled_parent, pooled_child, [1.0]])


def pair_width(token_width: int) -> int:
    return 2 * token_width + 1


@dataclass
class RelexModel:
    """Per-label linear weights (bias folded in) over concatenated pair vectors."""

    weights: np.ndarray
    backend: object
    threshold: float = THRESHOLD_DEFAULT
    config: dict = field(default_factory=dict)

    @classmethod
    def zero(cls, backend, threshold: float = THRESHOLD_DEFAULT, config: dict | None = None):
        return cls(
            weights=np.zeros((len(RELATION_LABELS), pair_width(backend.token_width))),
            backend=backend,
            threshold=threshold,
            config=dict(config or {}),
        )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -_LOGIT_CLIP, _LOGIT_CLIP)))


def score_pairs(doc: Doc, model: RelexModel, max_pair_distance: int = MAX_PAIR_DISTANCE) -> dict:
    """Probability map (parent id, child id) → {label: probability}."""
    matrix: dict[tuple[int, int], dict[str, float]] = {}
    for inst in generate_instances(doc, max_pair_distance):
        x = pair_input(model.backend, doc, inst.parent, inst.child)
        probs = _sigmoid(score_input(model.weights, x))
        matrix[(inst.parent, inst.child)] = {
            label: float(p) for label, p in zip(RELATION_LABELS, probs)
        }
    return matrix


def predict_relations(matrix: dict, threshold: float = THRESHOLD_DEFAULT):
    """Argmax label per ordered pair, kept only strictly above the threshold.

    Ties resolve to the earliest label in the fixed order, and probability
    exactly at the threshold emits nothing.
    """
    if not 0 < threshold < 1:
        raise ContractError(f"threshold must be in (0, 1), got {threshold!r}")
    edges = []
    for (parent, child), probs in matrix.items():
        best = max(RELATION_LABELS, key=lambda label: probs[label])
        if probs[best] > threshold:
            edges.append(RelationEdge(best, parent, child))
    return tuple(edges)


def predict_doc(
    doc: Doc,
    model: RelexModel,
    threshold: float | None = None,
    max_pair_distance: int = MAX_PAIR_DISTANCE,
) -> Doc:
    """Doc with predicted relation edges over its existing entity spans."""
    threshold = model.threshold if threshold is None else threshold
    matrix = score_pairs(doc, model, max_pair_distance)
    return doc.with_relations(predict_relations(matrix, threshold))


def dump_matrix(docs, model: RelexModel, path: str | Path) -> None:
    """Per-pair probability dump for error analysis, one JSON object per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            for (parent, child), probs in score_pairs(doc, model).items():
                fh.write(
                    json.dumps(
                        {"doc_id": doc.doc_id, "parent": parent, "child": child, "probs": probs},
                        sort_keys=True,
                    )
                )
                fh.write("\n")


def _pair_examples(docs, backend, max_pair_distance):
    """(scorer input, 3-float target) per in-window pair; plus skipped gold edges."""
    examples = []
    out_of_window = []
    for doc in docs:
        generated = set()
        for inst in generate_instances(doc, max_pair_distance):
            generated.add((inst.parent, inst.child))
            target = np.zeros(len(RELATION_LABELS))
            for edge in doc.relations:
                if edge.parent == inst.parent and edge.child == inst.child:
                    target[RELATION_LABELS.index(edge.label)] = 1.0
            examples.append((pair_input(backend, doc, inst.parent, inst.child), target))
        for edge in doc.relations:
            if (edge.parent, edge.child) not in generated:
                out_of_window.append(
                    {
                        "doc_id": doc.doc_id,
                        "parent": edge.parent,
                        "child": edge.child,
                        "label": edge.label,
                    }
                )
    return examples, out_of_window


def train_re(
    train_docs,
    dev_docs=(),
    config: TrainConfig | None = None,
    backend=None,
    threshold: float = THRESHOLD_DEFAULT,
    max_pair_distance: int = MAX_PAIR_DISTANCE,
):
    """Fit the pair classifier; returns (model, training log).

    Loss is the mean squared error between the sigmoid probabilities and
    the gold cell values (one for an annotated ordered pair and label, zero
    otherwise). Gold edges outside the pair window contribute no cells and
    are flagged at the head of the log. Early stopping follows dev micro-F1
    of prediction over gold entities.
    """
    train_docs = list(train_docs)
    dev_docs = list(dev_docs)
    if not train_docs:
        raise SplitSizeError("training set is empty")
    config = config or TrainConfig()
    backend = backend or HashedBackend()
    lr = config.resolve_learning_rate(backend.kind)

    examples, out_of_window = _pair_examples(train_docs, backend, max_pair_distance)
    if not examples:
        raise SplitSizeError("training docs contain no entity pairs")
    model = RelexModel.zero(
        backend, threshold, config.snapshot(task="re", resolved_learning_rate=lr)
    )
    weights = model.weights
    rng = np.random.default_rng(config.seed)
    adam = Adam(weights.shape, lr) if backend.kind != "hashed" else None

    n_labels = len(RELATION_LABELS)

    def update(batch) -> float:
        total_loss = 0.0
        rows: list[int] = []
        cols: list[int] = []
        deltas: list[float] = []
        dense_grad = np.zeros_like(weights) if adam is not None else None
        for i in batch:
            x, target = examples[int(i)]
            xd = apply_dropout(x, config.dropout, rng)
            probs = _sigmoid(score_input(weights, xd))
            err = probs - target
            total_loss += float(np.mean(err * err))
            dz = 2.0 * err * probs * (1.0 - probs) / n_labels
            if adam is None:
                keys = list(xd.keys())
                vals = np.fromiter(xd.values(), dtype=np.float64, count=len(xd))
                for row in range(n_labels):
                    coeff = dz[row] / len(batch)
                    if coeff == 0.0 or not keys:
                        continue
                    rows.extend([row] * len(keys))
                    cols.extend(keys)
                    deltas.extend(coeff * vals)
            else:
                dense_grad += np.outer(dz / len(batch), xd)
        if adam is None:
            sgd_sparse_update(weights, rows, cols, deltas, lr)
        else:
            adam.step(weights, dense_grad)
        return total_loss / len(batch)

    def dev_score():
        if not dev_docs:
            return None
        preds = [predict_doc(doc, model, threshold, max_pair_distance) for doc in dev_docs]
        return eval_re_gold(preds, dev_docs).overall.f1

    log = training_loop(
        n_examples=len(examples),
        config=config,
        rng=rng,
        update=update,
        dev_score=dev_score,
        snapshot=lambda: weights.copy(),
        restore=lambda saved: np.copyto(weights, saved),
    )
    if out_of_window:
        log.insert(0, {"step": 0, "loss": None, "dev_f1": None, "out_of_window": out_of_window})
    return model, log
