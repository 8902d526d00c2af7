import numpy as np
import pytest

from knotforge.errors import DegenerateDiagram, InvalidConfig
from knotforge.moves import R1, HighLevelAction, apply_move
from knotforge.rope_core import RopeConfig, RopeParams, make_straight_rope
from knotforge.topology import (EMPTY_STATE, TopoState, crossing_number,
                                extract_crossings, make_state, parse_state,
                                reduce_state, states_equal, top)
from oracles import oracle_code, oracle_min_crossings
from shapes import figure8_rope, kink_rope, trefoil_rope, wavy_rope

PARAMS = RopeParams()
TREFOIL = parse_state("O1+ U2+ O3+ U1+ O2+ U3+")


def test_straight_rope_is_unknot():
    assert top(make_straight_rope(PARAMS)) == EMPTY_STATE


def test_kink_shape_reads_single_crossing():
    state, records = extract_crossings(kink_rope(PARAMS))
    assert len(records) == 1
    assert state.passages == tuple(oracle_code(kink_rope(PARAMS).positions,
                                               PARAMS.rope_radius))
    (cid_a, over_a, sign_a), (cid_b, over_b, sign_b) = state.passages
    assert cid_a == cid_b == 1
    assert over_a != over_b
    assert sign_a == sign_b


def test_all_four_kink_variants_distinct():
    states = {
        top(kink_rope(PARAMS, sign_flip=sf, over_first=of)).passages
        for sf in (False, True) for of in (False, True)
    }
    assert len(states) == 4


def test_trefoil_shape_alternating():
    state = top(trefoil_rope(PARAMS))
    assert state == TREFOIL
    overs = [p[1] for p in state.passages]
    assert overs == [True, False] * 3


def test_figure8_shape():
    state = top(figure8_rope(PARAMS))
    assert state.n_crossings == 4
    assert crossing_number(state) == (4, True)
    assert sum(p[2] for p in state.passages) == 0  # writhe zero


def test_top_matches_oracle_on_generated_corpus():
    for seed in range(25):
        config = wavy_rope(PARAMS, seed)
        assert top(config).passages == tuple(
            oracle_code(config.positions, PARAMS.rope_radius)), f"seed {seed}"


def test_top_invariant_under_planar_rigid_transform_and_scaling():
    base = trefoil_rope(PARAMS)
    code = top(base)
    for angle, shift, scale in [(0.7, (0.2, -0.1), 1.0), (2.1, (0.0, 0.3), 1.7),
                                (-1.2, (-0.4, 0.2), 0.6)]:
        c, s = np.cos(angle), np.sin(angle)
        pts = base.positions.copy()
        pts[:, :2] = pts[:, :2] @ np.array([[c, s], [-s, c]]) * scale + shift
        assert top(RopeConfig(PARAMS, pts, base.orientations)) == code


def test_states_equal_basics():
    a = parse_state("O1+ U1+")
    assert states_equal(a, a)
    assert not states_equal(a, parse_state("O1- U1-"))
    assert not states_equal(a, parse_state("U1+ O1+"))
    assert states_equal(EMPTY_STATE, parse_state(""))


def test_parse_print_round_trip():
    for text in ["", "O1+ U1+", "O1+ U2+ O3+ U1+ O2+ U3+", "U1- O2+ U2+ O1-"]:
        assert parse_state(text).text() == text
    with pytest.raises(InvalidConfig):
        parse_state("O1+ Q2-")
    with pytest.raises(InvalidConfig):
        parse_state("O1+")  # unpaired
    with pytest.raises(InvalidConfig):
        parse_state("O1+ O1+")  # two overs
    with pytest.raises(InvalidConfig):
        parse_state("O1+ U1-")  # sign mismatch


def test_make_state_canonicalizes():
    state = make_state([(7, True, -1), (9, False, 1), (7, False, -1), (9, True, 1)])
    assert state.text() == "O1- U2+ U1- O2+"


def test_reduce_kink_and_r2():
    assert reduce_state(parse_state("O1+ U1+")) == EMPTY_STATE
    # R2 pair poked over a bare strand: (a,b) ... (b,a) with one strand on top.
    r2 = parse_state("O1+ O2- U2- U1+")
    assert reduce_state(r2) == EMPTY_STATE
    # The interleaved clasp pattern (a,b) ... (a,b) is not an R2 pair.
    clasp = parse_state("O1+ O2- U1+ U2-")
    assert reduce_state(clasp) == clasp
    assert reduce_state(TREFOIL) == TREFOIL


def test_reduce_properties():
    rng = np.random.default_rng(0)
    state = EMPTY_STATE
    for _ in range(200):
        from knotforge.moves import legal_moves
        state = EMPTY_STATE
        for _ in range(rng.integers(1, 4)):
            moves = legal_moves(state)
            state = apply_move(state, moves[rng.integers(len(moves))])
        reduced = reduce_state(state)
        assert reduced.n_crossings <= state.n_crossings
        assert reduce_state(reduced) == reduced  # idempotent


def test_crossing_number_paper_anchors():
    assert crossing_number(EMPTY_STATE) == (0, True)
    assert crossing_number(TREFOIL) == (3, True)
    kinked = apply_move(TREFOIL, HighLevelAction(R1, arc=2, over_first=True, sign=1))
    assert kinked.n_crossings == 4
    assert crossing_number(kinked) == (3, True)


def test_crossing_number_greedy_matches_exhaustive_oracle():
    rng = np.random.default_rng(1)
    from knotforge.moves import legal_moves
    for _ in range(150):
        state = EMPTY_STATE
        for _ in range(rng.integers(1, 4)):
            moves = legal_moves(state)
            state = apply_move(state, moves[rng.integers(len(moves))])
        exact, is_exact = crossing_number(state)
        assert is_exact
        assert exact == oracle_min_crossings(state.passages)
        assert reduce_state(state).n_crossings == exact


def test_crossing_number_beyond_bound_is_upper_bound():
    state = TREFOIL
    for arc in (0, 2, 4, 1):
        state = apply_move(state, HighLevelAction(R1, arc=arc, over_first=True, sign=1))
    assert state.n_crossings == 7
    est, is_exact = crossing_number(state, exact_bound=6)
    assert not is_exact
    assert est >= oracle_min_crossings(state.passages)


def test_degenerate_diagram_raises():
    # The return strand re-crosses the first segment at ~0.06 degrees while
    # riding well above it; jitter (1e-4) cannot open the angle past 1 degree.
    p = RopeParams(n_links=4, workspace_half_extent=0.5)
    pts = np.array([
        [-0.10, 0.0, 0.01], [0.0, 0.0, 0.01], [0.1, 0.001, 0.035],
        [0.0, 0.0005, 0.035], [-0.1, -0.0005, 0.035],
    ])
    with pytest.raises(DegenerateDiagram):
        extract_crossings(RopeConfig(p, pts))


def test_every_returned_state_satisfies_invariants():
    for seed in range(10):
        state = top(wavy_rope(PARAMS, seed))
        make_state(state.passages)  # raises if pairing or signs are broken
        ids = [p[0] for p in state.passages]
        first_seen = []
        for cid in ids:
            if cid not in first_seen:
                first_seen.append(cid)
        assert first_seen == sorted(first_seen)  # canonical numbering
