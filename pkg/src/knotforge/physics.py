"""Rope transition function: execute one curve primitive and settle.

The backend is position-based dynamics (distance constraints, capsule
self-collision, table contact) driven by a four-waypoint grab-lift-move-lower
effector path. step_curve is a pure function of (state, curve, params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _pbd
from .errors import InvalidConfig
from .rope_core import Curve, RopeConfig, RopeParams, reconstruct_orientations


@dataclass(frozen=True)
class SimParams:
    """Integrator constants. "Settled" means every joint slower than
    settle_speed_eps for settle_window consecutive substeps."""

    substep_dt: float = 0.002
    gravity: float = 9.81
    solver_iterations: int = 20
    friction_coeff: float = 0.3
    damping: float = 0.995
    effector_speed: float = 0.5
    settle_speed_eps: float = 1e-3
    settle_window: int = 50
    max_substeps: int = 20000
    jitter_scale: float = 1e-5   # symmetry-breaking grab jitter; 0 disables
    static_friction: float = 1.0  # Coulomb cone for position-level contact friction

    def __post_init__(self) -> None:
        positive = (
            self.substep_dt, self.gravity, self.solver_iterations, self.friction_coeff,
            self.damping, self.effector_speed, self.settle_speed_eps, self.max_substeps,
        )
        if any(v <= 0 for v in positive):
            raise InvalidConfig("all SimParams rates and counts must be positive")
        if self.settle_window < 2:
            raise InvalidConfig("settle_window must be at least 2")
        if self.jitter_scale < 0 or self.static_friction < 0:
            raise InvalidConfig("jitter_scale and static_friction must be non-negative")

    def to_json(self) -> dict:
        return {
            "substep_dt": self.substep_dt, "gravity": self.gravity,
            "solver_iterations": self.solver_iterations,
            "friction_coeff": self.friction_coeff, "damping": self.damping,
            "effector_speed": self.effector_speed,
            "settle_speed_eps": self.settle_speed_eps,
            "settle_window": self.settle_window, "max_substeps": self.max_substeps,
            "jitter_scale": self.jitter_scale, "static_friction": self.static_friction,
        }

    @staticmethod
    def from_json(obj: dict) -> "SimParams":
        return SimParams(**{k: type(getattr(SimParams, k))(v) for k, v in obj.items()})


@dataclass
class SimState:
    """Dynamic state: configuration, joint velocities, optional grabbed link."""

    config: RopeConfig
    velocities: np.ndarray = field(default=None)  # type: ignore[assignment]
    grabbed: int | None = None

    def __post_init__(self) -> None:
        if self.velocities is None:
            self.velocities = np.zeros_like(self.config.positions)
        self.velocities = np.asarray(self.velocities, dtype=np.float64)
        if self.velocities.shape != self.config.positions.shape:
            raise InvalidConfig("velocities shape must match positions")
        if self.grabbed is not None and not 1 <= self.grabbed <= self.config.params.n_links:
            raise InvalidConfig(f"grabbed link {self.grabbed} out of range")


@dataclass(frozen=True)
class StepResult:
    config: RopeConfig
    substeps: int
    settled: bool


def link_midpoint(config: RopeConfig, link: int) -> np.ndarray:
    """Midpoint of 1-based link `link` (joints link-1 and link)."""
    return 0.5 * (config.positions[link - 1] + config.positions[link])


def waypoints(config: RopeConfig, curve: Curve) -> np.ndarray:
    """Four effector waypoints: rise above the grab point, carry, lower.

    Waypoint z is the hand height above the table; the grabbed link midpoint
    tracks the path displaced by its own height at grab time.
    """
    curve.validate(config.params)
    mid = link_midpoint(config, curve.link)
    return np.array([
        [mid[0], mid[1], 0.0],
        [mid[0], mid[1], curve.z_max],
        [curve.x, curve.y, curve.z_max],
        [curve.x, curve.y, 0.0],
    ])


def step_curve(config: RopeConfig, curve: Curve, sim: SimParams | None = None,
               seed: int = 0) -> StepResult:
    """Apply one curve primitive and run the rope to rest.

    Deterministic for fixed inputs. If max_substeps elapses before the settle
    criterion holds, the best-effort state is returned with settled=False.
    """
    sim = sim or SimParams()
    params = config.params
    curve.validate(params)
    path = waypoints(config, curve)
    pos = config.positions.copy()
    vel = np.zeros_like(pos)
    z_offset = float(link_midpoint(config, curve.link)[2])
    substeps, settled = _pbd.run_rope(
        pos, vel, params.n_links, params.link_length, params.rope_radius,
        sim.substep_dt, sim.gravity, sim.solver_iterations, sim.damping,
        sim.friction_coeff, path, curve.link, z_offset, sim.effector_speed,
        sim.settle_speed_eps, sim.settle_window, sim.max_substeps,
        sim.jitter_scale, np.uint64(seed), sim.static_friction, np.empty((0,)),
    )
    out = RopeConfig(params, pos, reconstruct_orientations(pos, params))
    return StepResult(out, int(substeps), bool(settled))


def simulate_free(state: SimState, sim: SimParams, n_substeps: int) -> tuple[SimState, np.ndarray]:
    """Evolve with no grab for exactly n_substeps; returns per-substep kinetic energy."""
    params = state.config.params
    pos = state.config.positions.copy()
    vel = state.velocities.copy()
    energy = np.zeros(n_substeps)
    _pbd.run_rope(
        pos, vel, params.n_links, params.link_length, params.rope_radius,
        sim.substep_dt, sim.gravity, sim.solver_iterations, sim.damping,
        sim.friction_coeff, np.zeros((2, 3)), 0, 0.0, sim.effector_speed,
        sim.settle_speed_eps, n_substeps + 1, n_substeps,
        0.0, np.uint64(0), sim.static_friction, energy,
    )
    new_config = RopeConfig(params, pos, reconstruct_orientations(pos, params))
    return SimState(new_config, vel), energy


def segment_clearance(config: RopeConfig) -> float:
    """Minimum distance between non-adjacent link centerlines."""
    pos = config.positions
    n = config.params.n_links
    best = np.inf
    for i in range(n):
        for j in range(i + 2, n):
            _s, _t, d2 = _pbd._segment_closest(pos, i, i + 1, j, j + 1)
            best = min(best, np.sqrt(d2))
    return float(best)
