"""Agent specialization variants and the key space they induce.

G: one agent for everything. A: one per move kind. C: one per source crossing
count. AC: one per (kind, crossing count) pair. Every transition goal maps to
exactly one key under each variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InvalidConfig
from .goals import TransitionGoal

VARIANTS = ("G", "A", "C", "AC")


@dataclass(frozen=True)
class AgentKey:
    variant: str
    kind: str | None = None
    phi: int | None = None

    def name(self) -> str:
        kind = self.kind if self.kind is not None else "any"
        phi = str(self.phi) if self.phi is not None else "any"
        return f"{self.variant}_{kind}_phi{phi}"


def registry_lookup(variant: str, goal: TransitionGoal) -> AgentKey:
    """Total map from a transition goal to its agent key."""
    if variant not in VARIANTS:
        raise InvalidConfig(f"unknown variant {variant!r}")
    phi = goal.source.n_crossings
    if variant == "G":
        return AgentKey("G")
    if variant == "A":
        return AgentKey("A", kind=goal.action.kind)
    if variant == "C":
        return AgentKey("C", phi=phi)
    return AgentKey("AC", kind=goal.action.kind, phi=phi)


@dataclass
class AgentRegistry:
    """Policies stored per agent key; lookup dispatches by the goal."""

    variant: str
    policies: dict[AgentKey, object] = field(default_factory=dict)

    def register(self, key: AgentKey, policy: object) -> None:
        if key.variant != self.variant:
            raise InvalidConfig(f"key {key} does not belong to variant {self.variant}")
        self.policies[key] = policy

    def lookup(self, goal: TransitionGoal) -> object:
        key = registry_lookup(self.variant, goal)
        if key not in self.policies:
            raise InvalidConfig(f"no agent registered for key {key.name()}")
        return self.policies[key]

    def has(self, goal: TransitionGoal) -> bool:
        return registry_lookup(self.variant, goal) in self.policies


def load_registry(directory: str | Path, variant: str) -> AgentRegistry:
    """Load every checkpoint in a directory whose header matches the variant."""
    from .sac import load_policy

    registry = AgentRegistry(variant)
    for path in sorted(Path(directory).glob("*.sacpol")):
        policy, header = load_policy(path)
        if header["variant"] != variant:
            continue
        key = AgentKey(header["variant"], header.get("kind"), header.get("phi"))
        registry.register(key, policy)
    return registry
