"""Low-level rope state: parameters, configurations, curve actions, and serialization.

The rope is a chain of N rigid links over N+1 joints. The canonical state is the
joint position array; orientations (middle-link pose plus relative pitch/yaw per
link, roll omitted) are bookkeeping derived from positions on demand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, SchemaError

# Position tolerance constants shared with the validator and the physics layer.
LINK_LENGTH_RTOL = 0.01
QUAT_NORM_ATOL = 1e-6
TABLE_PENETRATION_ATOL = 1e-4


@dataclass(frozen=True)
class RopeParams:
    """Geometry of the simulated rope and its workspace."""

    n_links: int = 30
    link_length: float = 0.05
    rope_radius: float = 0.01
    workspace_half_extent: float = 1.0
    z_max_limit: float = 0.5

    def __post_init__(self) -> None:
        if self.n_links < 4:
            raise InvalidConfig(f"n_links must be >= 4, got {self.n_links}")
        if self.link_length <= 0:
            raise InvalidConfig("link_length must be positive")
        if not 0 < self.rope_radius < self.link_length:
            raise InvalidConfig("rope_radius must be in (0, link_length)")
        if self.workspace_half_extent < self.n_links * self.link_length / 4:
            raise InvalidConfig("workspace too small for the rope to fold into")
        if self.z_max_limit <= 2 * self.rope_radius:
            raise InvalidConfig("z_max_limit must exceed one rope diameter")

    @property
    def n_joints(self) -> int:
        return self.n_links + 1

    @property
    def rope_length(self) -> float:
        return self.n_links * self.link_length

    @property
    def middle_link(self) -> int:
        """1-based index of the link whose pose anchors the orientation vector."""
        return (self.n_links + 1) // 2


@dataclass
class RopeConfig:
    """Full rope state q = (p, o).

    positions: (N+1, 3) joint coordinates in meters.
    orientations: middle-link pose (3 position + 4 quaternion) followed by
        (pitch, yaw) of each link relative to the previous one, 2(N-1) values.
    """

    params: RopeParams
    positions: np.ndarray
    orientations: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.orientations is None:
            self.orientations = reconstruct_orientations(self.positions, self.params)
        else:
            self.orientations = np.asarray(self.orientations, dtype=np.float64)

    def copy(self) -> "RopeConfig":
        return RopeConfig(self.params, self.positions.copy(), self.orientations.copy())


@dataclass(frozen=True)
class Curve:
    """Grab-lift-move-lower motion primitive c = (l, x, y, z_max)."""

    link: int
    x: float
    y: float
    z_max: float

    def validate(self, params: RopeParams) -> "Curve":
        if not 1 <= self.link <= params.n_links:
            raise InvalidConfig(f"link index {self.link} outside [1, {params.n_links}]")
        half = params.workspace_half_extent
        if abs(self.x) > half or abs(self.y) > half:
            raise InvalidConfig("curve endpoint outside the workspace")
        if self.z_max <= 2 * params.rope_radius:
            raise InvalidConfig("z_max too low to clear the rope")
        if self.z_max > params.z_max_limit:
            raise InvalidConfig("z_max exceeds the lift limit")
        return self


def make_curve(params: RopeParams, link: int, x: float, y: float, z_max: float) -> Curve:
    return Curve(int(link), float(x), float(y), float(z_max)).validate(params)


def make_straight_rope(params: RopeParams) -> RopeConfig:
    """Canonical initial state: joints collinear along x, centered at the origin."""
    n = params.n_joints
    xs = (np.arange(n) - params.n_links / 2.0) * params.link_length
    positions = np.column_stack([xs, np.zeros(n), np.full(n, params.rope_radius)])
    return RopeConfig(params, positions)


def project_eta(config: RopeConfig) -> np.ndarray:
    """Positional projection: the 3(N+1) joint coordinates, orientations dropped."""
    return config.positions.reshape(-1).copy()


def _link_angles(directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-link (pitch, yaw) from unit direction vectors; roll-free frames."""
    yaw = np.arctan2(directions[:, 1], directions[:, 0])
    pitch = np.arctan2(directions[:, 2], np.hypot(directions[:, 0], directions[:, 1]))
    return pitch, yaw


def _wrap_angle(a: np.ndarray) -> np.ndarray:
    return (a + np.pi) % (2 * np.pi) - np.pi


def _quat_from_pitch_yaw(pitch: float, yaw: float) -> np.ndarray:
    """Quaternion (w,x,y,z) for Rz(yaw) * Ry(-pitch), mapping +x to the link direction."""
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    # qz(yaw) = (cy, 0, 0, sy); qy(-pitch) = (cp, 0, -sp, 0)
    return np.array([cy * cp, sy * sp, -cy * sp, sy * cp])


def reconstruct_orientations(positions: np.ndarray, params: RopeParams) -> np.ndarray:
    """Derive the orientation vector o from joint positions.

    The middle link contributes its center position and a roll-free quaternion;
    every other link contributes (pitch, yaw) relative to its predecessor. Roll
    is discarded by construction, so torsion is not representable.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(params.n_joints, 3)
    segs = np.diff(positions, axis=0)
    lengths = np.linalg.norm(segs, axis=1)
    if np.any(lengths < 1e-12):
        raise InvalidConfig("degenerate zero-length link")
    directions = segs / lengths[:, None]
    pitch, yaw = _link_angles(directions)

    mid = params.middle_link - 1  # 0-based link index
    center = 0.5 * (positions[mid] + positions[mid + 1])
    quat = _quat_from_pitch_yaw(pitch[mid], yaw[mid])

    rel_pitch = np.diff(pitch)
    rel_yaw = _wrap_angle(np.diff(yaw))
    rel = np.empty(2 * (params.n_links - 1))
    rel[0::2] = rel_pitch
    rel[1::2] = rel_yaw
    return np.concatenate([center, quat, rel])


def validate_config(config: RopeConfig) -> RopeConfig:
    """Check every RopeConfig invariant; raise InvalidConfig naming the first violation."""
    p = config.params
    pos = config.positions
    if pos.shape != (p.n_joints, 3):
        raise InvalidConfig(f"positions shape {pos.shape}, expected {(p.n_joints, 3)}")
    if config.orientations.shape != (2 * (p.n_links - 1) + 7,):
        raise InvalidConfig("orientation vector has the wrong length")
    lengths = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    dev = np.abs(lengths - p.link_length) / p.link_length
    if np.max(dev) > LINK_LENGTH_RTOL:
        raise InvalidConfig(f"link length deviates by {np.max(dev):.3%} (limit 1%)")
    qnorm = np.linalg.norm(config.orientations[3:7])
    if abs(qnorm - 1.0) > QUAT_NORM_ATOL:
        raise InvalidConfig(f"middle-link quaternion norm {qnorm} not unit")
    if np.min(pos[:, 2]) < p.rope_radius - TABLE_PENETRATION_ATOL:
        raise InvalidConfig("joint penetrates the table")
    return config


def rope_from_polyline(points: np.ndarray, params: RopeParams) -> RopeConfig:
    """Fit the rope along a 3D polyline with exact link lengths.

    Walks the (densely interpolated) polyline, dropping each joint at exactly
    link_length from the previous one; continues straight past the end if the
    polyline is shorter than the rope. Used to realize hand-designed shapes.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
        raise InvalidConfig("polyline must be an (M, 3) array with M >= 2")
    # Dense resample so sphere-polyline stepping is accurate.
    seg_len = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    dense_s = np.linspace(0.0, cum[-1], max(20 * params.n_joints, 2000))
    dense = np.column_stack([np.interp(dense_s, cum, pts[:, k]) for k in range(3)])

    joints = [dense[0]]
    idx = 0
    for _ in range(params.n_links):
        prev = joints[-1]
        nxt = None
        while idx + 1 < len(dense):
            if np.linalg.norm(dense[idx + 1] - prev) >= params.link_length:
                a, b = dense[idx], dense[idx + 1]
                # Solve |a + t(b-a) - prev| = link_length for t in [0, 1].
                d = b - a
                f = a - prev
                aa = float(d @ d)
                bb = 2.0 * float(f @ d)
                cc = float(f @ f) - params.link_length**2
                disc = bb * bb - 4 * aa * cc
                t = (-bb + math.sqrt(max(disc, 0.0))) / (2 * aa)
                t = min(max(t, 0.0), 1.0)
                nxt = a + t * d
                dense[idx] = nxt  # walk continues from the new joint
                break
            idx += 1
        if nxt is None:  # ran off the end: continue along the last heading
            head = joints[-1] - joints[-2] if len(joints) > 1 else np.array([1.0, 0, 0])
            head = head / np.linalg.norm(head)
            nxt = prev + params.link_length * head
        joints.append(nxt)
    positions = np.array(joints)
    positions[:, 2] = np.maximum(positions[:, 2], params.rope_radius)
    return RopeConfig(params, positions)


# ---------------------------------------------------------------------------
# JSON serialization


def params_to_json(params: RopeParams) -> dict:
    return {
        "n_links": params.n_links,
        "link_length": params.link_length,
        "rope_radius": params.rope_radius,
        "workspace_half_extent": params.workspace_half_extent,
        "z_max_limit": params.z_max_limit,
    }


def params_from_json(obj: dict) -> RopeParams:
    if not isinstance(obj, dict):
        raise SchemaError("params must be an object")
    for key in ("n_links", "link_length", "rope_radius"):
        if key not in obj:
            raise SchemaError(f"params missing required field '{key}'")
    defaults = RopeParams()
    try:
        return RopeParams(
            n_links=int(obj["n_links"]),
            link_length=float(obj["link_length"]),
            rope_radius=float(obj["rope_radius"]),
            workspace_half_extent=float(
                obj.get("workspace_half_extent", defaults.workspace_half_extent)
            ),
            z_max_limit=float(obj.get("z_max_limit", defaults.z_max_limit)),
        )
    except InvalidConfig as exc:
        raise SchemaError(f"invalid rope params: {exc}") from exc


def config_to_json(config: RopeConfig, include_orientations: bool = True) -> dict:
    return {
        "params": params_to_json(config.params),
        "positions": config.positions.tolist(),
        "orientations": config.orientations.tolist() if include_orientations else None,
    }


def config_from_json(obj: dict) -> RopeConfig:
    if not isinstance(obj, dict):
        raise SchemaError("rope state must be a JSON object")
    for key in ("params", "positions"):
        if key not in obj:
            raise SchemaError(f"rope state missing required field '{key}'")
    params = params_from_json(obj["params"])
    try:
        positions = np.asarray(obj["positions"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError("positions must be a numeric [[x,y,z], ...] array") from exc
    if positions.ndim != 2 or positions.shape[1] != 3:
        raise SchemaError("positions must be a list of [x, y, z] triples")
    if positions.shape[0] != params.n_joints:
        raise SchemaError(
            f"positions has {positions.shape[0]} joints, params imply {params.n_joints}"
        )
    orientations = obj.get("orientations")
    if orientations is not None:
        orientations = np.asarray(orientations, dtype=np.float64)
        if orientations.shape != (2 * (params.n_links - 1) + 7,):
            raise SchemaError("orientations vector has the wrong length")
    return RopeConfig(params, positions, orientations)


def curve_to_json(curve: Curve) -> dict:
    return {"link": curve.link, "x": curve.x, "y": curve.y, "z_max": curve.z_max}


def curve_from_json(obj: dict, params: RopeParams | None = None) -> Curve:
    if not isinstance(obj, dict):
        raise SchemaError("curve must be a JSON object")
    for key in ("link", "x", "y", "z_max"):
        if key not in obj:
            raise SchemaError(f"curve missing required field '{key}'")
    curve = Curve(int(obj["link"]), float(obj["x"]), float(obj["y"]), float(obj["z_max"]))
    if params is not None:
        try:
            curve.validate(params)
        except InvalidConfig as exc:
            raise SchemaError(f"invalid curve: {exc}") from exc
    return curve


def save_config(config: RopeConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_json(config), fh)


def load_config(path: str) -> RopeConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_json(json.load(fh))
