import numpy as np
import pytest

from knotforge.errors import InvalidMove
from knotforge.moves import CROSS, HEAD, R1, R2, TAIL, HighLevelAction, apply_move, legal_moves
from knotforge.rl.goals import GOAL_ENCODING_DIM, TransitionGoal, encode_goal, reward
from knotforge.topology import EMPTY_STATE, parse_state

KINK = parse_state("O1+ U1+")
TREFOIL = parse_state("O1+ U2+ O3+ U1+ O2+ U3+")


def goal_of(source, action):
    return TransitionGoal.from_edge(source, action)


def test_goal_target_consistency_checked():
    action = HighLevelAction(R1, arc=0, over_first=True, sign=1)
    TransitionGoal(EMPTY_STATE, action, KINK)
    with pytest.raises(InvalidMove):
        TransitionGoal(EMPTY_STATE, action, parse_state("U1+ O1+"))


def test_reward_contract():
    g = goal_of(EMPTY_STATE, HighLevelAction(R1, arc=0, over_first=True, sign=1))
    assert reward(EMPTY_STATE, g.target, g) == 1
    assert reward(EMPTY_STATE, EMPTY_STATE, g) == 0
    assert reward(EMPTY_STATE, parse_state("U1- O1-"), g) == -1
    assert reward(EMPTY_STATE, TREFOIL, g) == -1


def test_reward_exhaustive_over_constructed_triples():
    sources = [EMPTY_STATE, KINK, TREFOIL]
    for source in sources:
        for action in legal_moves(source)[::5]:
            g = goal_of(source, action)
            others = [s for s in (EMPTY_STATE, KINK, TREFOIL,
                                  parse_state("O1- U1-"))
                      if s not in (g.source, g.target)]
            assert reward(g.source, g.target, g) == 1
            assert reward(g.source, g.source, g) == 0
            for s in others:
                assert reward(g.source, s, g) == -1


def test_encode_r1_layout_spec_example():
    g = goal_of(EMPTY_STATE, HighLevelAction(R1, arc=0, over_first=True, sign=1))
    np.testing.assert_array_equal(encode_goal(g), [1, 0, 0, 0, 0, 0, 1, 1])


def test_encode_source_independent_for_same_action():
    action = HighLevelAction(R1, arc=0, over_first=True, sign=1)
    a = encode_goal(goal_of(EMPTY_STATE, action))
    # Same action parameters from a 3-crossing source: arc normalizes by the
    # code length, so arc 0 encodes identically.
    b = encode_goal(goal_of(TREFOIL, action))
    np.testing.assert_array_equal(a, b)


def test_encode_cross_layout_spec_example():
    g = goal_of(TREFOIL, HighLevelAction(CROSS, end=HEAD, arc=2, over=True, sign=-1))
    vec = encode_goal(g)
    np.testing.assert_array_equal(vec[:3], [0, 0, 1])
    assert vec[3] == 1.0  # head flag
    assert vec[4] == pytest.approx(2 / 6)
    assert vec[6] == 1.0
    assert vec[7] == -1.0


def test_encoding_constant_length_and_bounded():
    for source in (EMPTY_STATE, KINK, TREFOIL):
        for action in legal_moves(source):
            vec = encode_goal(goal_of(source, action))
            assert vec.shape == (GOAL_ENCODING_DIM,)
            assert np.all(vec >= -1.0) and np.all(vec <= 1.0)


def test_encoding_injective_per_source():
    for source in (EMPTY_STATE, KINK, TREFOIL):
        seen = {}
        for action in legal_moves(source):
            key = tuple(encode_goal(goal_of(source, action)))
            assert key not in seen, f"{action} collides with {seen[key]}"
            seen[key] = action


def test_r2_uses_both_arc_slots():
    g = goal_of(KINK, HighLevelAction(R2, arc=2, arc2=0, over_first=False))
    vec = encode_goal(g)
    assert vec[1] == 1.0
    assert vec[4] == pytest.approx(1.0)
    assert vec[5] == pytest.approx(0.0)
    assert vec[6] == 0.0
    assert vec[7] == 0.0  # R2 has no single sign
