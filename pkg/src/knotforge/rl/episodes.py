"""Multi-step episode driver grounding one high-level transition.

An episode runs up to M curves from a configuration whose topological state is
the goal's source; it terminates as soon as the state changes, whether to the
intended target or not. The policy is any callable from observation vector to
a normalized action in [-1, 1]^4.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DegenerateDiagram, InvalidConfig
from ..physics import SimParams, step_curve
from ..rope_core import Curve, RopeConfig, RopeParams, project_eta
from ..topology import TopoState, states_equal, top
from .goals import TransitionGoal, encode_goal, reward

log = logging.getLogger(__name__)

ACTION_DIM = 4

SUCCESS = "success"
WRONG_TRANSITION = "wrong_transition"
TIMEOUT = "timeout"

PolicyFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EpisodeConfig:
    max_steps: int = 6
    gamma: float = 0.99

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise InvalidConfig("max_steps must be at least 1")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidConfig("gamma must be in (0, 1)")


@dataclass
class StepRecord:
    obs: np.ndarray
    action: np.ndarray          # normalized, in [-1, 1]^4
    curve: Curve
    reward: int
    next_obs: np.ndarray
    done: bool                  # topology changed (true terminal)
    next_state: TopoState
    config: RopeConfig          # settled configuration after the curve
    settled: bool
    substeps: int


@dataclass
class EpisodeTrace:
    goal: TransitionGoal
    records: list[StepRecord] = field(default_factory=list)
    outcome: str = TIMEOUT

    @property
    def final_config(self) -> RopeConfig | None:
        return self.records[-1].config if self.records else None

    @property
    def episode_return(self) -> int:
        return sum(r.reward for r in self.records)

    @property
    def n_curves(self) -> int:
        return len(self.records)


def decode_action(a: np.ndarray, params: RopeParams) -> Curve:
    """Map a normalized action to a valid Curve.

    link: nearest-integer affine map onto [1, N]; endpoint: affine onto the
    workspace square; z_max: affine onto (2r, z_max_limit], nudged off the
    open boundary so tanh saturation cannot produce an invalid lift.
    """
    a = np.clip(np.asarray(a, dtype=np.float64), -1.0, 1.0)
    n = params.n_links
    link = int(np.clip(round(1 + (a[0] + 1.0) / 2.0 * (n - 1)), 1, n))
    half = params.workspace_half_extent
    x = float(a[1] * half)
    y = float(a[2] * half)
    lo = 2.0 * params.rope_radius
    z = lo + (a[3] + 1.0) / 2.0 * (params.z_max_limit - lo)
    z = float(min(max(z, np.nextafter(lo, np.inf)), params.z_max_limit))
    return Curve(link, x, y, z).validate(params)


def encode_observation(config: RopeConfig, goal: TransitionGoal) -> np.ndarray:
    """Policy input: workspace-normalized joint positions plus the goal encoding."""
    scale = config.params.workspace_half_extent
    return np.concatenate([project_eta(config) / scale, encode_goal(goal)])


def observation_dim(params: RopeParams) -> int:
    return 3 * params.n_joints + 8


def run_episode(q0: RopeConfig, goal: TransitionGoal, policy: PolicyFn,
                params: RopeParams, sim: SimParams, cfg: EpisodeConfig,
                rng: np.random.Generator) -> EpisodeTrace:
    """Execute up to max_steps curves; stop on any topological change."""
    if not states_equal(top(q0), goal.source):
        raise InvalidConfig("initial configuration does not realize the goal source")
    trace = EpisodeTrace(goal)
    config = q0
    for _step in range(cfg.max_steps):
        obs = encode_observation(config, goal)
        action = np.asarray(policy(obs), dtype=np.float64).reshape(ACTION_DIM)
        curve = decode_action(action, params)
        seed = int(rng.integers(0, 2**62))
        result = step_curve(config, curve, sim, seed=seed)
        try:
            new_state = top(result.config)
        except DegenerateDiagram:
            result = step_curve(config, curve, sim, seed=seed + 1)
            try:
                new_state = top(result.config)
            except DegenerateDiagram:
                log.warning("degenerate diagram persisted; aborting episode")
                trace.outcome = WRONG_TRANSITION
                return trace
        r = reward(goal.source, new_state, goal)
        done = not states_equal(new_state, goal.source)
        next_obs = encode_observation(result.config, goal)
        trace.records.append(StepRecord(
            obs=obs, action=action, curve=curve, reward=r, next_obs=next_obs,
            done=done, next_state=new_state, config=result.config,
            settled=result.settled, substeps=result.substeps,
        ))
        config = result.config
        if done:
            trace.outcome = SUCCESS if r > 0 else WRONG_TRANSITION
            return trace
    trace.outcome = TIMEOUT
    return trace
