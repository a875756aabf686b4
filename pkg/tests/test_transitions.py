"""Transition system: action inventory, legality, oracle and replay."""

import random

import pytest

from trialtables.corpus.records import ENTITY_LABELS, EntitySpan, make_doc
from trialtables.errors import ContractError
from trialtables.ner.transitions import (
    ACTION_INDEX,
    ACTIONS,
    N_ACTIONS,
    Action,
    apply_action,
    initial_state,
    oracle_actions,
    replay,
    valid_actions,
)
from .oracles import brute_spans_from_actions


def test_action_inventory_order():
    assert N_ACTIONS == 13
    names = [a.name for a in ACTIONS]
    assert names == [
        "Out",
        "Unit-INTV",
        "Unit-MEAS",
        "Unit-OC",
        "Begin-INTV",
        "Begin-MEAS",
        "Begin-OC",
        "In-INTV",
        "In-MEAS",
        "In-OC",
        "Last-INTV",
        "Last-MEAS",
        "Last-OC",
    ]
    assert ACTION_INDEX[Action("Out")] == 0


def test_action_label_rules():
    with pytest.raises(ContractError):
        Action("Out", "OC")
    with pytest.raises(ContractError):
        Action("Begin")
    with pytest.raises(ContractError):
        Action("Unit", "DRUG")
    with pytest.raises(ContractError):
        Action("Shift", "OC")


def test_valid_actions_empty_stack():
    state = initial_state(5)
    kinds = {a.kind for a in valid_actions(state)}
    assert kinds == {"Out", "Unit", "Begin"}
    assert len(valid_actions(state)) == 7


def test_valid_actions_open_stack_mid_buffer():
    state = apply_action(initial_state(5), Action("Begin", "OC"))
    acts = valid_actions(state)
    assert acts == (Action("In", "OC"), Action("Last", "OC"))


def test_last_buffered_token_forces_close():
    state = apply_action(initial_state(2), Action("Begin", "MEAS"))
    assert valid_actions(state) == (Action("Last", "MEAS"),)


def test_last_buffered_token_cannot_open():
    state = apply_action(initial_state(2), Action("Out"))
    kinds = {a.kind for a in valid_actions(state)}
    assert kinds == {"Out", "Unit"}
    with pytest.raises(ContractError):
        apply_action(state, Action("Begin", "OC"))


def test_terminal_state_has_no_actions():
    state = replay(1, [Action("Out")])
    assert state.is_terminal()
    assert valid_actions(state) == ()


def test_apply_rejects_illegal_action():
    state = initial_state(3)
    with pytest.raises(ContractError):
        apply_action(state, Action("In", "OC"))
    opened = apply_action(state, Action("Begin", "OC"))
    with pytest.raises(ContractError):
        apply_action(opened, Action("Begin", "MEAS"))
    with pytest.raises(ContractError):
        apply_action(opened, Action("In", "MEAS"))


def test_every_action_consumes_one_token(fig_doc):
    actions = oracle_actions(fig_doc)
    assert len(actions) == len(fig_doc.tokens)
    state = initial_state(len(fig_doc.tokens))
    for step, action in enumerate(actions, start=1):
        state = apply_action(state, action)
        assert state.pos == step
    assert state.is_terminal()


def test_oracle_round_trip(fig_doc):
    actions = oracle_actions(fig_doc)
    state = replay(len(fig_doc.tokens), actions)
    assert state.output == fig_doc.entities


def test_oracle_unit_for_single_token():
    doc = make_doc("latanoprost works", entities=[EntitySpan("INTV", 0, 0)])
    assert [a.name for a in oracle_actions(doc)] == ["Unit-INTV", "Out"]


def test_oracle_begin_in_last_for_long_span():
    doc = make_doc("mean ocular pressure fell", entities=[EntitySpan("OC", 0, 2)])
    assert [a.name for a in oracle_actions(doc)] == ["Begin-OC", "In-OC", "Last-OC", "Out"]


def test_oracle_rejects_overlap(fig_doc):
    spans = [EntitySpan("OC", 0, 2), EntitySpan("MEAS", 2, 3)]
    with pytest.raises(ContractError):
        oracle_actions(fig_doc, spans)


def random_spans(rng, n_tokens):
    spans = []
    i = 0
    while i < n_tokens:
        if rng.random() < 0.4:
            end = min(n_tokens - 1, i + rng.randrange(3))
            spans.append(EntitySpan(rng.choice(ENTITY_LABELS), i, end))
            i = end + 1
        else:
            i += 1
    return spans


def test_oracle_matches_brute_scan_on_random_docs():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randrange(1, 15)
        doc = make_doc(" ".join("x" * (i + 1) for i in range(n)))
        assert len(doc.tokens) == n
        spans = random_spans(rng, n)
        doc = doc.with_entities(spans)
        actions = oracle_actions(doc)
        assert len(actions) == n
        assert brute_spans_from_actions([a.name for a in actions]) == [
            (s.label, s.token_start, s.token_end) for s in doc.entities
        ]
        assert replay(n, actions).output == doc.entities


def test_replay_rejects_truncated_sequence():
    actions = [Action("Begin", "OC"), Action("In", "OC")]
    state = replay(3, actions)
    assert not state.is_terminal()
    with pytest.raises(ContractError):
        apply_action(state, Action("In", "OC"))
