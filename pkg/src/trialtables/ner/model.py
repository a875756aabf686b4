"""Linear action scorer over parser-state features, plus greedy decoding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from trialtables.corpus.records import ENTITY_LABELS, Doc
from trialtables.features import EmbeddingBackend, HashedBackend, score_input
from trialtables.ner.transitions import (
    ACTION_INDEX,
    N_ACTIONS,
    ParserState,
    apply_action,
    initial_state,
    valid_actions,
)

# Dense state vector: pooled stack + three buffer tokens, then categorical
# one-hot blocks for previous action, open label and bucketed stack length.
N_BUFFER_FEATURES = 3
_PREV_ACTION_BLOCK = N_ACTIONS + 1
_OPEN_LABEL_BLOCK = len(ENTITY_LABELS) + 1
_STACK_LEN_BUCKETS = 6


def state_width(token_width: int, kind: str) -> int:
    """Scorer-input width for one state under the given backend."""
    if kind == "hashed":
        return token_width
    return (1 + N_BUFFER_FEATURES) * token_width + (
        _PREV_ACTION_BLOCK + _OPEN_LABEL_BLOCK + _STACK_LEN_BUCKETS
    )


def _stack_len_bucket(stack_len: int) -> int:
    return min(stack_len, _STACK_LEN_BUCKETS - 1)


def state_feature_strings(backend: HashedBackend, doc: Doc, state: ParserState) -> list[str]:
    """Namespaced feature strings describing one parser state (sparse path)."""
    feats = []
    if state.stack_len > 0:
        feats.extend(f"stk0:{s}" for s in backend.token_strings(doc, state.pos - 1))
    for k in range(N_BUFFER_FEATURES):
        idx = state.pos + k
        if idx < state.n_tokens:
            feats.extend(f"buf{k}:{s}" for s in backend.token_strings(doc, idx))
        else:
            feats.append(f"buf{k}:pad")
    feats.append(f"prev_action={state.last_action.name if state.last_action else 'none'}")
    feats.append(f"open_label={state.open_label or 'none'}")
    feats.append(f"stack_len={_stack_len_bucket(state.stack_len)}")
    return feats


def state_input(backend, doc: Doc, state: ParserState):
    """Scorer input for one state: hashed bag (sparse) or stacked vector (dense)."""
    if backend.kind == "hashed":
        return backend.hash_strings(state_feature_strings(backend, doc, state))
    dim = backend.token_width
    parts = []
    if state.stack_len > 0:
        parts.append(backend.span_pool(doc, state.pos - state.stack_len, state.pos - 1))
    else:
        parts.append(np.zeros(dim))
    for k in range(N_BUFFER_FEATURES):
        idx = state.pos + k
        parts.append(backend.token_vector(doc, idx) if idx < state.n_tokens else np.zeros(dim))
    prev = np.zeros(_PREV_ACTION_BLOCK)
    prev[ACTION_INDEX[state.last_action] if state.last_action else N_ACTIONS] = 1.0
    label = np.zeros(_OPEN_LABEL_BLOCK)
    label[ENTITY_LABELS.index(state.open_label) if state.open_label else len(ENTITY_LABELS)] = 1.0
    length = np.zeros(_STACK_LEN_BUCKETS)
    length[_stack_len_bucket(state.stack_len)] = 1.0
    return np.concatenate(parts + [prev, label, length])


@dataclass
class NerModel:
    """Per-action linear weights over state features, with its backend."""

    weights: np.ndarray
    backend: HashedBackend | EmbeddingBackend
    config: dict = field(default_factory=dict)

    @classmethod
    def zero(cls, backend, config: dict | None = None) -> "NerModel":
        width = state_width(backend.token_width, backend.kind)
        return cls(
            weights=np.zeros((N_ACTIONS, width), dtype=np.float64),
            backend=backend,
            config=dict(config or {}),
        )

    def score_state(self, doc: Doc, state: ParserState) -> np.ndarray:
        return score_input(self.weights, state_input(self.backend, doc, state))


def decode(doc: Doc, model: NerModel) -> Doc:
    """Greedy parse: apply the best-scoring valid action until terminal.

    Ties resolve to the action earliest in the fixed ordering, so an
    untrained all-zero model emits no entities. Output spans are well-formed
    and non-overlapping for any weights, by construction of the transitions.
    """
    state = initial_state(len(doc.tokens))
    while not state.is_terminal():
        actions = valid_actions(state)
        scores = model.score_state(doc, state)
        best = actions[0]
        best_score = scores[ACTION_INDEX[best]]
        for action in actions[1:]:
            if scores[ACTION_INDEX[action]] > best_score:
                best, best_score = action, scores[ACTION_INDEX[action]]
        state = apply_action(state, best)
    return doc.with_entities(state.output)


def decode_batch(docs, model: NerModel) -> list[Doc]:
    return [decode(doc, model) for doc in docs]
