"""Transition system for entity recognition: actions, states, oracle.

Tokens flow from a buffer either straight to the output (Out), to the output
as a single-token entity (Unit), or through an entity stack (Begin/In) that
Last closes into a labelled span. Every action consumes exactly one buffer
token, so parsing a sentence takes exactly one action per token and no
action sequence can strand tokens on the stack.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from trialtables.corpus.records import ENTITY_LABELS, Doc, EntitySpan
from trialtables.errors import ContractError

ACTION_KINDS = ("Out", "Unit", "Begin", "In", "Last")


@dataclass(frozen=True)
class Action:
    """One parser action; Out carries no label, the rest require one."""

    kind: str
    label: str | None = None

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ContractError(f"unknown action kind {self.kind!r}")
        if self.kind == "Out":
            if self.label is not None:
                raise ContractError("Out takes no label")
        elif self.label not in ENTITY_LABELS:
            raise ContractError(f"{self.kind} requires a schema label, got {self.label!r}")

    @property
    def name(self) -> str:
        return self.kind if self.label is None else f"{self.kind}-{self.label}"

    def __str__(self) -> str:
        return self.name


def _build_actions() -> tuple[Action, ...]:
    actions = [Action("Out")]
    for kind in ("Unit", "Begin", "In", "Last"):
        for label in sorted(ENTITY_LABELS):
            actions.append(Action(kind, label))
    return tuple(actions)


# Fixed scoring order; equal scores resolve to the lowest index, which makes
# an all-zero model parse everything as Out.
ACTIONS = _build_actions()
ACTION_INDEX = {action: i for i, action in enumerate(ACTIONS)}
N_ACTIONS = len(ACTIONS)


@dataclass(frozen=True)
class ParserState:
    """Parser configuration over a sentence of ``n_tokens`` tokens.

    The stack is always a contiguous run of tokens ending just before the
    buffer front, so the state is fully described by the front position, the
    stack length and the open label.
    """

    n_tokens: int
    pos: int
    stack_len: int
    open_label: str | None
    output: tuple[EntitySpan, ...]
    last_action: Action | None = None

    @property
    def buffer_size(self) -> int:
        return self.n_tokens - self.pos

    @property
    def buffer(self) -> tuple[int, ...]:
        return tuple(range(self.pos, self.n_tokens))

    @property
    def stack(self) -> tuple[int, ...]:
        return tuple(range(self.pos - self.stack_len, self.pos))

    def is_terminal(self) -> bool:
        return self.pos == self.n_tokens and self.stack_len == 0


def initial_state(n_tokens: int) -> ParserState:
    return ParserState(n_tokens=n_tokens, pos=0, stack_len=0, open_label=None, output=())


def valid_actions(state: ParserState) -> tuple[Action, ...]:
    """Actions applicable in a state, in fixed scoring order.

    Opening or continuing an entity is barred on the final buffered token
    (only Unit, Out or Last can consume it): an entity opened there could
    never be closed, which would strand the parse in a dead state.
    """
    if state.buffer_size == 0:
        return ()
    if state.stack_len == 0:
        kinds = ("Out", "Unit") if state.buffer_size == 1 else ("Out", "Unit", "Begin")
        return tuple(a for a in ACTIONS if a.kind in kinds)
    if state.buffer_size == 1:
        return (Action("Last", state.open_label),)
    return (Action("In", state.open_label), Action("Last", state.open_label))


def apply_action(state: ParserState, action: Action) -> ParserState:
    """Consume the buffer front under one action and return the next state."""
    if action not in valid_actions(state):
        raise ContractError(
            f"action {action} invalid in state (pos={state.pos}, stack={state.stack_len}, "
            f"open={state.open_label})"
        )
    pos = state.pos
    if action.kind == "Out":
        return replace(state, pos=pos + 1, last_action=action)
    if action.kind == "Unit":
        span = EntitySpan(action.label, pos, pos)
        return replace(state, pos=pos + 1, output=state.output + (span,), last_action=action)
    if action.kind == "Begin":
        return replace(state, pos=pos + 1, stack_len=1, open_label=action.label, last_action=action)
    if action.kind == "In":
        return replace(state, pos=pos + 1, stack_len=state.stack_len + 1, last_action=action)
    span = EntitySpan(state.open_label, pos - state.stack_len, pos)
    return replace(
        state,
        pos=pos + 1,
        stack_len=0,
        open_label=None,
        output=state.output + (span,),
        last_action=action,
    )


def oracle_actions(doc: Doc, spans=None) -> list[Action]:
    """Derive the gold action sequence reproducing a Doc's entity spans.

    Single-token spans become Unit; longer spans become Begin, (n-2) In and
    a closing Last; uncovered tokens become Out.
    """
    spans = sorted(doc.entities if spans is None else spans, key=lambda s: s.token_start)
    covered: set[int] = set()
    for span in spans:
        indices = set(range(span.token_start, span.token_end + 1))
        if covered & indices:
            raise ContractError(f"overlapping gold spans at token {min(covered & indices)}")
        covered |= indices

    actions: list[Action] = []
    i = 0
    for span in spans:
        while i < span.token_start:
            actions.append(Action("Out"))
            i += 1
        if span.token_start == span.token_end:
            actions.append(Action("Unit", span.label))
        else:
            actions.append(Action("Begin", span.label))
            for _ in range(span.token_end - span.token_start - 1):
                actions.append(Action("In", span.label))
            actions.append(Action("Last", span.label))
        i = span.token_end + 1
    while i < len(doc.tokens):
        actions.append(Action("Out"))
        i += 1
    return actions


def replay(n_tokens: int, actions) -> ParserState:
    """Apply an action sequence from the initial state; invalid steps raise."""
    state = initial_state(n_tokens)
    for action in actions:
        state = apply_action(state, action)
    return state
