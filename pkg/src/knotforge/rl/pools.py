"""Starting-configuration pools: reservoirs of rope states keyed by topology.

Every configuration an episode visits is banked under its topological state,
including unintended higher-crossing states; those become the starting states
when training moves up the crossing-number curriculum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidConfig
from ..moves import HighLevelGraph
from ..rope_core import RopeConfig, config_from_json, config_to_json
from ..topology import TopoState, parse_state, states_equal, top
from .episodes import EpisodeTrace
from .goals import TransitionGoal
from .registry import AgentKey, registry_lookup

DEFAULT_CAPACITY = 512
SOUNDNESS_CHECK_PROB = 0.02


@dataclass
class ConfigPool:
    """Per-state reservoirs with Algorithm-R replacement."""

    capacity: int = DEFAULT_CAPACITY
    entries: dict[TopoState, list[RopeConfig]] = field(default_factory=dict)
    seen: dict[TopoState, int] = field(default_factory=dict)

    def states(self) -> list[TopoState]:
        return [s for s, configs in self.entries.items() if configs]

    def size(self, state: TopoState) -> int:
        return len(self.entries.get(state, []))

    def insert(self, state: TopoState, config: RopeConfig,
               rng: np.random.Generator) -> None:
        bucket = self.entries.setdefault(state, [])
        count = self.seen.get(state, 0) + 1
        self.seen[state] = count
        if len(bucket) < self.capacity:
            bucket.append(config)
        else:
            slot = int(rng.integers(0, count))
            if slot < self.capacity:
                bucket[slot] = config

    def sample(self, state: TopoState, rng: np.random.Generator) -> RopeConfig:
        bucket = self.entries.get(state)
        if not bucket:
            raise InvalidConfig(f"no pooled configuration for state {state.text()!r}")
        return bucket[int(rng.integers(0, len(bucket)))].copy()

    def to_json(self) -> dict:
        return {
            "capacity": self.capacity,
            "pools": {
                s.text(): {
                    "seen": self.seen.get(s, len(cfgs)),
                    "configs": [config_to_json(c, include_orientations=False)
                                for c in cfgs],
                }
                for s, cfgs in self.entries.items() if cfgs
            },
        }

    @staticmethod
    def from_json(obj: dict) -> "ConfigPool":
        pool = ConfigPool(capacity=int(obj.get("capacity", DEFAULT_CAPACITY)))
        for text, payload in obj.get("pools", {}).items():
            state = parse_state(text)
            pool.entries[state] = [config_from_json(c) for c in payload["configs"]]
            pool.seen[state] = int(payload.get("seen", len(pool.entries[state])))
        return pool

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @staticmethod
    def load(path: str) -> "ConfigPool":
        with open(path, encoding="utf-8") as fh:
            return ConfigPool.from_json(json.load(fh))


def harvest(trace: EpisodeTrace, pool: ConfigPool, rng: np.random.Generator) -> ConfigPool:
    """Bank every configuration the episode produced under its Top state.

    The per-step state comes from the trace (already computed during the
    episode); soundness is spot-checked by recomputing Top on a small random
    subset of insertions.
    """
    for record in trace.records:
        if rng.random() < SOUNDNESS_CHECK_PROB:
            if not states_equal(top(record.config), record.next_state):
                raise InvalidConfig("pool soundness violation: Top(q) != recorded state")
        pool.insert(record.next_state, record.config, rng)
    return pool


def eligible_edges(pool: ConfigPool, key: AgentKey,
                   graph: HighLevelGraph) -> list[TransitionGoal]:
    """Key-matching graph edges whose source has a non-empty pool."""
    out = []
    for source, action, target in graph.edges:
        goal = TransitionGoal(source, action, target)
        if registry_lookup(key.variant, goal) == key and pool.size(source) > 0:
            out.append(goal)
    return out


def select_goal_and_start(pool: ConfigPool, key: AgentKey, graph: HighLevelGraph,
                          rng: np.random.Generator) -> tuple[TransitionGoal, RopeConfig]:
    """Uniform over eligible transitions, then uniform over the source's pool."""
    goals = eligible_edges(pool, key, graph)
    if not goals:
        raise InvalidConfig(f"no eligible transition with pooled starts for {key}")
    goal = goals[int(rng.integers(0, len(goals)))]
    return goal, pool.sample(goal.source, rng)
