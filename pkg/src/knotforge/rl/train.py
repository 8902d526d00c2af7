"""Training loop: random bootstrap, episode rollouts, harvesting, SAC updates.

One gradient update per environment step (applied in bursts after each
episode), eval snapshots on a fixed cadence, history rows written as CSV.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..moves import HighLevelGraph
from ..physics import SimParams
from ..rope_core import RopeConfig, RopeParams, make_straight_rope
from ..topology import EMPTY_STATE
from .episodes import (ACTION_DIM, SUCCESS, EpisodeConfig, observation_dim,
                       run_episode)
from .goals import TransitionGoal
from .pools import ConfigPool, eligible_edges, harvest, select_goal_and_start
from .registry import AgentKey
from .sac import SacConfig, SacLearner, save_policy

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    steps: int = 200_000
    bootstrap_steps: int = 2000
    eval_every: int = 5000
    eval_episodes: int = 20
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    sac: SacConfig = field(default_factory=SacConfig)

    def __post_init__(self) -> None:
        if self.steps < self.bootstrap_steps:
            raise ValueError("budget must cover the random bootstrap phase")


def random_policy(rng: np.random.Generator):
    """Uniform curves in the normalized action box; the training bootstrap
    and the comparison baseline."""

    def policy(_obs: np.ndarray) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, size=ACTION_DIM)

    return policy


def evaluate_policy(policy, goals: list[TransitionGoal], params: RopeParams,
                    sim: SimParams, episode_cfg: EpisodeConfig, n_episodes: int,
                    rng: np.random.Generator, start_provider=None) -> float:
    """Success rate over n_episodes with goals drawn uniformly from `goals`."""
    if start_provider is None:
        straight = make_straight_rope(params)

        def start_provider(goal, _rng):
            if goal.source != EMPTY_STATE:
                raise ValueError("default start provider only covers the unknot")
            return straight.copy()

    wins = 0
    for _ in range(n_episodes):
        goal = goals[int(rng.integers(0, len(goals)))]
        q0 = start_provider(goal, rng)
        trace = run_episode(q0, goal, policy, params, sim, episode_cfg, rng)
        wins += trace.outcome == SUCCESS
    return wins / n_episodes


def phi_layer_goals(graph: HighLevelGraph, source_phi: int,
                    increment: int | None = None) -> list[TransitionGoal]:
    """Graph edges out of drawn-count `source_phi`, optionally filtered by the
    crossing increment (1 selects the R1/Cross edges, 2 the R2 edges)."""
    out = []
    for source, action, target in graph.edges:
        if source.n_crossings != source_phi:
            continue
        if increment is not None and action.crossing_increment != increment:
            continue
        out.append(TransitionGoal(source, action, target))
    return out


def train(variant: str, key: AgentKey, graph: HighLevelGraph,
          params: RopeParams, sim: SimParams, cfg: TrainConfig, seed: int,
          pool: ConfigPool | None = None, out_dir: str | Path | None = None,
          progress_every: int = 0) -> tuple[SacLearner, list[dict], ConfigPool]:
    """Train one agent for `key`; returns (learner, history rows, final pool)."""
    seq = np.random.SeedSequence(seed)
    env_rng, learn_rng, eval_rng, init_rng = (
        np.random.default_rng(s) for s in seq.spawn(4))

    if pool is None:
        pool = ConfigPool()
        pool.insert(EMPTY_STATE, make_straight_rope(params), init_rng)

    obs_dim = observation_dim(params)
    learner = SacLearner(obs_dim, ACTION_DIM, cfg.sac, init_rng,
                         obs_scale=params.workspace_half_extent)
    explore = random_policy(env_rng)

    def actor_policy(obs):
        return learner.policy.act(obs, rng=env_rng, deterministic=False)

    history: list[dict] = []
    steps = 0
    episodes = 0
    successes = 0
    last_metrics = {"critic_loss": float("nan"), "actor_loss": float("nan"),
                    "alpha": learner.alpha}
    eval_goals = eligible_edges(pool, key, graph)
    t0 = time.time()

    def snapshot():
        rate = evaluate_policy(
            learner.policy, eval_goals, params, sim, cfg.episode,
            cfg.eval_episodes, eval_rng,
            start_provider=lambda goal, r: pool.sample(goal.source, r))
        history.append({
            "step": steps,
            "eval_success": rate,
            "critic_loss": last_metrics["critic_loss"],
            "actor_loss": last_metrics["actor_loss"],
            "alpha": last_metrics["alpha"],
        })
        return rate

    next_eval = cfg.eval_every
    while steps < cfg.steps:
        goal, q0 = select_goal_and_start(pool, key, graph, env_rng)
        policy = explore if steps < cfg.bootstrap_steps else actor_policy
        trace = run_episode(q0, goal, policy, params, sim, cfg.episode, env_rng)
        episodes += 1
        successes += trace.outcome == SUCCESS
        harvest(trace, pool, env_rng)
        for record in trace.records:
            learner.buffer.add(record.obs, record.action, record.reward,
                               record.next_obs, record.done)
        burst = min(len(trace.records), cfg.steps - steps)
        steps += burst
        if steps >= cfg.bootstrap_steps and len(learner.buffer) >= cfg.sac.batch_size:
            for _ in range(burst):
                batch = learner.buffer.sample(cfg.sac.batch_size, learn_rng)
                last_metrics = learner.update(batch, learn_rng)
        if steps >= next_eval:
            rate = snapshot()
            next_eval += cfg.eval_every
            if progress_every and len(history) % progress_every == 0:
                log.info("step %d eval %.2f alpha %.3f (%.0fs)",
                         steps, rate, learner.alpha, time.time() - t0)

    if not history or history[-1]["step"] != steps:
        snapshot()

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_policy(learner.policy, out / f"{key.name()}_seed{seed}.sacpol",
                    variant=variant, kind=key.kind, phi=key.phi,
                    extra={"seed": seed, "steps": steps})
        write_history(history, out / f"{key.name()}_seed{seed}_history.csv")
        pool.save(str(out / f"{key.name()}_seed{seed}_pool.json"))
    return learner, history, pool


def write_history(history: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["step", "eval_success", "critic_loss", "actor_loss", "alpha"])
        writer.writeheader()
        writer.writerows(history)


def read_history(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {k: (int(v) if k == "step" else float(v)) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]
