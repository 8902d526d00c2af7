import json

import numpy as np
import pytest

from knotforge.errors import InvalidConfig, SchemaError
from knotforge.rope_core import (Curve, RopeConfig, RopeParams, config_from_json,
                                 config_to_json, curve_from_json, curve_to_json,
                                 make_curve, make_straight_rope, project_eta,
                                 reconstruct_orientations, rope_from_polyline,
                                 validate_config)
from oracles import fk_positions

PARAMS = RopeParams()


def test_straight_rope_geometry():
    rope = make_straight_rope(PARAMS)
    assert rope.positions.shape == (31, 3)
    np.testing.assert_allclose(rope.positions[0], [-0.75, 0.0, 0.01])
    np.testing.assert_allclose(rope.positions[30], [0.75, 0.0, 0.01])
    lengths = np.linalg.norm(np.diff(rope.positions, axis=0), axis=1)
    np.testing.assert_allclose(lengths, 0.05)
    validate_config(rope)


def test_straight_rope_small():
    p = RopeParams(n_links=4, link_length=0.05, rope_radius=0.01,
                   workspace_half_extent=0.5, z_max_limit=0.3)
    rope = make_straight_rope(p)
    assert rope.positions.shape == (5, 3)
    np.testing.assert_allclose(
        np.linalg.norm(np.diff(rope.positions, axis=0), axis=1), 0.05)


def test_params_invariants():
    with pytest.raises(InvalidConfig):
        RopeParams(n_links=3)
    with pytest.raises(InvalidConfig):
        RopeParams(link_length=0.0)
    with pytest.raises(InvalidConfig):
        RopeParams(rope_radius=0.06)  # >= link_length
    with pytest.raises(InvalidConfig):
        RopeParams(workspace_half_extent=0.1)  # rope cannot fold in
    with pytest.raises(InvalidConfig):
        RopeParams(z_max_limit=0.015)  # below one diameter


def test_project_eta_dimensions_and_content():
    rope = make_straight_rope(PARAMS)
    eta = project_eta(rope)
    assert eta.shape == (93,)
    np.testing.assert_array_equal(eta, rope.positions.reshape(-1))


def test_project_eta_orientation_invariant():
    rope = make_straight_rope(PARAMS)
    other = RopeConfig(PARAMS, rope.positions.copy(), rope.orientations + 0.3)
    np.testing.assert_array_equal(project_eta(rope), project_eta(other))


def test_reconstruct_straight_all_zero_relatives():
    rope = make_straight_rope(PARAMS)
    o = rope.orientations
    assert np.allclose(o[7:], 0.0)
    assert abs(np.linalg.norm(o[3:7]) - 1.0) < 1e-12


def test_reconstruct_planar_elbow():
    # 90-degree left turn at the middle joint: one relative yaw of pi/2.
    p = RopeParams(n_links=4, workspace_half_extent=0.5)
    pts = np.array([
        [0.0, 0.0, 0.01], [0.05, 0.0, 0.01], [0.10, 0.0, 0.01],
        [0.10, 0.05, 0.01], [0.10, 0.10, 0.01],
    ])
    o = reconstruct_orientations(pts, p)
    rel = o[7:]
    pitch, yaw = rel[0::2], rel[1::2]
    np.testing.assert_allclose(pitch, 0.0, atol=1e-12)
    np.testing.assert_allclose(yaw, [0.0, np.pi / 2, 0.0], atol=1e-12)


def test_reconstruct_round_trips_through_fk_oracle():
    rng = np.random.default_rng(3)
    p = RopeParams()
    for _ in range(20):
        # Random gentle chain so links never fold back on themselves.
        yaw = np.cumsum(rng.uniform(-0.5, 0.5, p.n_links))
        pitch = np.cumsum(rng.uniform(-0.2, 0.2, p.n_links))
        d = np.column_stack([np.cos(pitch) * np.cos(yaw),
                             np.cos(pitch) * np.sin(yaw), np.sin(pitch)])
        pts = np.vstack([[0, 0, 0], np.cumsum(p.link_length * d, axis=0)])
        pts[:, 2] += 1.0  # keep well above the table
        o = reconstruct_orientations(pts, p)
        assert abs(np.linalg.norm(o[3:7]) - 1.0) < 1e-9
        rebuilt = np.asarray(fk_positions(p, o))
        np.testing.assert_allclose(rebuilt, pts, atol=1e-9)


def test_reconstruct_rejects_degenerate_segment():
    pts = make_straight_rope(PARAMS).positions.copy()
    pts[5] = pts[4]
    with pytest.raises(InvalidConfig):
        reconstruct_orientations(pts, PARAMS)


def test_validator_rejects_each_violation():
    rope = make_straight_rope(PARAMS)
    validate_config(rope)

    bad = rope.copy()
    bad.positions = bad.positions[:-1]
    with pytest.raises(InvalidConfig, match="shape"):
        validate_config(bad)

    bad = rope.copy()
    bad.positions[10] += [0.01, 0, 0]  # stretches two links beyond 1%
    with pytest.raises(InvalidConfig, match="link length"):
        validate_config(bad)

    bad = rope.copy()
    bad.orientations[3:7] = [1.0, 0.1, 0.0, 0.0]
    with pytest.raises(InvalidConfig, match="quaternion"):
        validate_config(bad)

    bad = rope.copy()
    bad.positions[:, 2] -= 0.005
    with pytest.raises(InvalidConfig, match="table"):
        validate_config(bad)

    bad = rope.copy()
    bad.orientations = bad.orientations[:-2]
    with pytest.raises(InvalidConfig, match="orientation"):
        validate_config(bad)


def test_curve_validation():
    make_curve(PARAMS, 5, 0.1, -0.2, 0.15)
    with pytest.raises(InvalidConfig):
        make_curve(PARAMS, 0, 0.1, 0.1, 0.15)
    with pytest.raises(InvalidConfig):
        make_curve(PARAMS, 31, 0.1, 0.1, 0.15)
    with pytest.raises(InvalidConfig):
        make_curve(PARAMS, 5, 1.2, 0.1, 0.15)
    with pytest.raises(InvalidConfig):
        make_curve(PARAMS, 5, 0.1, 0.1, 0.02)  # cannot clear the rope
    with pytest.raises(InvalidConfig):
        make_curve(PARAMS, 5, 0.1, 0.1, 0.6)  # over the lift limit


def test_config_json_round_trip_bitwise():
    rope = make_straight_rope(PARAMS)
    rope.positions[3, 1] = 0.1234567890123456789  # not exactly representable
    rope.orientations = reconstruct_orientations(rope.positions, PARAMS)
    blob = json.dumps(config_to_json(rope))
    back = config_from_json(json.loads(blob))
    assert np.array_equal(back.positions, rope.positions)
    assert np.array_equal(back.orientations, rope.orientations)
    assert back.params == rope.params


def test_config_json_null_orientations_filled():
    rope = make_straight_rope(PARAMS)
    obj = config_to_json(rope, include_orientations=False)
    assert obj["orientations"] is None
    back = config_from_json(obj)
    np.testing.assert_allclose(back.orientations, rope.orientations)


@pytest.mark.parametrize("mutate", [
    lambda o: o.pop("positions"),
    lambda o: o.pop("params"),
    lambda o: o["params"].pop("n_links"),
    lambda o: o.__setitem__("positions", [[0, 0]]),
    lambda o: o["positions"].pop(),
])
def test_config_json_schema_errors(mutate):
    obj = config_to_json(make_straight_rope(PARAMS))
    mutate(obj)
    with pytest.raises(SchemaError):
        config_from_json(obj)


def test_curve_json_round_trip():
    c = Curve(5, 0.1, -0.2, 0.15)
    assert curve_from_json(curve_to_json(c), PARAMS) == c
    with pytest.raises(SchemaError):
        curve_from_json({"link": 1, "x": 0.0, "y": 0.0})
    with pytest.raises(SchemaError):
        curve_from_json({"link": 99, "x": 0.0, "y": 0.0, "z_max": 0.1}, PARAMS)


def test_rope_from_polyline_exact_links():
    t = np.linspace(0, 1, 300)
    pts = np.column_stack([1.6 * t - 0.8, 0.3 * np.sin(6 * t), np.full_like(t, 0.01)])
    rope = rope_from_polyline(pts, PARAMS)
    lengths = np.linalg.norm(np.diff(rope.positions, axis=0), axis=1)
    np.testing.assert_allclose(lengths, PARAMS.link_length, rtol=1e-9)
    validate_config(rope)
