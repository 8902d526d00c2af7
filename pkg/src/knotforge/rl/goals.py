"""Transition goals, their fixed-length encodings, and the transition reward."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidMove
from ..moves import CROSS, HEAD, R1, R2, HighLevelAction, apply_move
from ..topology import TopoState, states_equal

GOAL_ENCODING_DIM = 8


@dataclass(frozen=True)
class TransitionGoal:
    """One high-level edge: source state, move, and its resulting target."""

    source: TopoState
    action: HighLevelAction
    target: TopoState

    def __post_init__(self) -> None:
        if apply_move(self.source, self.action) != self.target:
            raise InvalidMove("goal target is not apply_move(source, action)")

    @staticmethod
    def from_edge(source: TopoState, action: HighLevelAction) -> "TransitionGoal":
        return TransitionGoal(source, action, apply_move(source, action))


def reward(prev: TopoState, new: TopoState, goal: TransitionGoal) -> int:
    """+1 on reaching the goal target, 0 for staying put, -1 otherwise."""
    if states_equal(new, goal.target):
        return 1
    if states_equal(new, goal.source):
        return 0
    return -1


def encode_goal(goal: TransitionGoal) -> np.ndarray:
    """Fixed 8-slot encoding of the move, independent of the source state size.

    Layout: kind one-hot (3) | end flag (1) | normalized arcs (2) |
    over flag (1) | sign (1). Arc indices are normalized by the source code
    length so the conditioning is scale-free across crossing numbers; slots a
    kind does not use stay zero.
    """
    a = goal.action
    vec = np.zeros(GOAL_ENCODING_DIM)
    denom = max(len(goal.source.passages), 1)
    if a.kind == R1:
        vec[0] = 1.0
        vec[4] = a.arc / denom
        vec[6] = 1.0 if a.over_first else 0.0
        vec[7] = float(a.sign)
    elif a.kind == R2:
        vec[1] = 1.0
        vec[4] = a.arc / denom
        vec[5] = a.arc2 / denom
        vec[6] = 1.0 if a.over_first else 0.0
    elif a.kind == CROSS:
        vec[2] = 1.0
        vec[3] = 1.0 if a.end == HEAD else 0.0
        vec[4] = a.arc / denom
        vec[6] = 1.0 if a.over else 0.0
        vec[7] = float(a.sign)
    else:  # pragma: no cover - TransitionGoal validates the action kind
        raise InvalidMove(f"unknown kind {a.kind!r}")
    return vec
