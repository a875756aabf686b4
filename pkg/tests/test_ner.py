"""Action scorer: state features, decoding guarantees, small training runs."""

import random

import numpy as np

from trialtables.corpus.records import make_doc
from trialtables.features import EmbeddingStore, EmbeddingBackend, HashedBackend
from trialtables.ner.model import NerModel, decode, decode_batch, state_feature_strings, state_input, state_width
from trialtables.ner.transitions import ACTION_INDEX, Action, apply_action, initial_state
from trialtables.ner.train import TrainConfig, train_ner
from trialtables.evaluate import eval_ner


def test_state_width_by_backend():
    assert state_width(1 << 20, "hashed") == 1 << 20
    # pooled stack + 3 buffer tokens + 14 prev-action + 4 open-label + 6 length
    assert state_width(50, "embeddings") == 4 * 50 + 24


def test_state_features_initial(fig_doc):
    backend = HashedBackend()
    state = initial_state(len(fig_doc.tokens))
    feats = state_feature_strings(backend, fig_doc, state)
    assert "prev_action=none" in feats
    assert "open_label=none" in feats
    assert "stack_len=0" in feats
    assert any(f.startswith("buf0:low=") for f in feats)
    assert not any(f.startswith("stk0:") for f in feats)


def test_state_features_open_stack(fig_doc):
    backend = HashedBackend()
    state = apply_action(initial_state(len(fig_doc.tokens)), Action("Begin", "OC"))
    feats = state_feature_strings(backend, fig_doc, state)
    assert "prev_action=Begin-OC" in feats
    assert "open_label=OC" in feats
    assert "stack_len=1" in feats
    assert any(f.startswith("stk0:") for f in feats)


def test_state_features_buffer_padding():
    backend = HashedBackend()
    doc = make_doc("one two")
    state = apply_action(initial_state(2), Action("Out"))
    feats = state_feature_strings(backend, doc, state)
    assert "buf1:pad" in feats
    assert "buf2:pad" in feats


def test_dense_state_input_shape(fig_doc):
    dim = 8
    rng = np.random.default_rng(3)
    store = EmbeddingStore(dim, {fig_doc.doc_id: rng.normal(size=(len(fig_doc.tokens), dim))})
    backend = EmbeddingBackend(store)
    vec = state_input(backend, fig_doc, initial_state(len(fig_doc.tokens)))
    assert vec.shape == (state_width(dim, "embeddings"),)
    # empty stack pools to zeros
    assert np.array_equal(vec[:dim], np.zeros(dim))


def test_zero_model_decodes_no_entities(fig_doc):
    model = NerModel.zero(HashedBackend())
    out = decode(fig_doc, model)
    assert out.entities == ()
    assert out.text == fig_doc.text


def test_decode_output_always_wellformed():
    """Arbitrary weights can never produce overlapping or dangling spans."""
    backend = HashedBackend(n_buckets=1 << 12)
    rng = np.random.default_rng(11)
    word = random.Random(5)
    for _ in range(25):
        weights = rng.normal(size=(13, 1 << 12))
        model = NerModel(weights, backend)
        n = word.randrange(1, 12)
        doc = make_doc(" ".join("x" * (i + 1) for i in range(n)))
        assert len(doc.tokens) == n
        out = decode(doc, model)  # Doc validation rejects overlap itself
        for span in out.entities:
            assert 0 <= span.token_start <= span.token_end < n


def test_decode_batch_order(train20):
    model = NerModel.zero(HashedBackend())
    outs = decode_batch(train20[:3], model)
    assert [d.doc_id for d in outs] == [d.doc_id for d in train20[:3]]


def test_training_memorizes_single_doc(fig_doc):
    config = TrainConfig(max_steps=300, eval_interval=25, patience_steps=100, seed=0)
    model, log = train_ner([fig_doc], dev_docs=[fig_doc], config=config)
    report = eval_ner([decode(fig_doc, model)], [fig_doc])
    assert report.overall.f1 == 1.0
    assert log and log[-1]["dev_f1"] == 1.0


def test_training_without_dev_runs_to_max(fig_doc):
    config = TrainConfig(max_steps=30, eval_interval=10, patience_steps=30)
    model, log = train_ner([fig_doc], config=config)
    assert log[-1]["step"] == 30
    assert all(entry["dev_f1"] is None for entry in log)


def test_training_rejects_empty_inputs():
    import pytest

    from trialtables.errors import SplitSizeError

    with pytest.raises(SplitSizeError):
        train_ner([])
    with pytest.raises(SplitSizeError):
        train_ner([make_doc("")])
