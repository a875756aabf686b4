"""Training of the transition-action scorer with teacher forcing."""

from __future__ import annotations

import numpy as np

from trialtables.errors import SplitSizeError
from trialtables.evaluate import eval_ner
from trialtables.features import HashedBackend, score_input
from trialtables.ner.model import NerModel, decode, state_input
from trialtables.ner.transitions import (
    ACTION_INDEX,
    apply_action,
    initial_state,
    oracle_actions,
    valid_actions,
)
from trialtables.training import (
    Adam,
    TrainConfig,
    apply_dropout,
    sgd_sparse_update,
    training_loop,
)

__all__ = ["TrainConfig", "train_ner"]


def _teacher_forced_examples(docs, backend):
    """(scorer input, valid action indexes, gold action index) per oracle step.

    States come from replaying each Doc's oracle actions, so every training
    state has a defined gold action.
    """
    examples = []
    for doc in docs:
        state = initial_state(len(doc.tokens))
        for action in oracle_actions(doc):
            valid = tuple(ACTION_INDEX[a] for a in valid_actions(state))
            examples.append((state_input(backend, doc, state), valid, ACTION_INDEX[action]))
            state = apply_action(state, action)
    return examples


def train_ner(train_docs, dev_docs=(), config: TrainConfig | None = None, backend=None):
    """Fit the action scorer; returns (model, training log).

    Loss per state is softmax cross-entropy over the valid actions, with
    invalid actions excluded rather than just down-weighted. Dev micro-F1
    drives early stopping and selects the returned weights; without a dev
    set training runs to max_steps.
    """
    train_docs = list(train_docs)
    dev_docs = list(dev_docs)
    if not train_docs:
        raise SplitSizeError("training set is empty")
    config = config or TrainConfig()
    backend = backend or HashedBackend()
    lr = config.resolve_learning_rate(backend.kind)

    examples = _teacher_forced_examples(train_docs, backend)
    if not examples:
        raise SplitSizeError("training docs contain no tokens")
    model = NerModel.zero(backend, config.snapshot(task="ner", resolved_learning_rate=lr))
    weights = model.weights
    rng = np.random.default_rng(config.seed)
    adam = Adam(weights.shape, lr) if backend.kind != "hashed" else None

    def update(batch) -> float:
        total_loss = 0.0
        rows: list[int] = []
        cols: list[int] = []
        deltas: list[float] = []
        dense_grad = np.zeros_like(weights) if adam is not None else None
        for i in batch:
            x, valid, gold = examples[int(i)]
            xd = apply_dropout(x, config.dropout, rng)
            scores = score_input(weights, xd)[list(valid)]
            scores -= scores.max()
            exp = np.exp(scores)
            probs = exp / exp.sum()
            gold_pos = valid.index(gold)
            total_loss += -float(np.log(probs[gold_pos]))
            grad = probs.copy()
            grad[gold_pos] -= 1.0
            if adam is None:
                keys = list(xd.keys())
                vals = np.fromiter(xd.values(), dtype=np.float64, count=len(xd))
                for pos, row in enumerate(valid):
                    coeff = grad[pos] / len(batch)
                    if coeff == 0.0 or not keys:
                        continue
                    rows.extend([row] * len(keys))
                    cols.extend(keys)
                    deltas.extend(coeff * vals)
            else:
                for pos, row in enumerate(valid):
                    dense_grad[row] += (grad[pos] / len(batch)) * xd
        if adam is None:
            sgd_sparse_update(weights, rows, cols, deltas, lr)
        else:
            adam.step(weights, dense_grad)
        return total_loss / len(batch)

    def dev_score():
        if not dev_docs:
            return None
        return eval_ner([decode(doc, model) for doc in dev_docs], dev_docs).overall.f1

    log = training_loop(
        n_examples=len(examples),
        config=config,
        rng=rng,
        update=update,
        dev_score=dev_score,
        snapshot=lambda: weights.copy(),
        restore=lambda saved: np.copyto(weights, saved),
    )
    return model, log
