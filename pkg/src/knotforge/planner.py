"""Shortest move-sequence search from a start code to a goal code.

Because every move inserts passages, planning runs backward from the goal by
enumerating inverse deletions; this keeps the search tiny even where forward
branching is large. Returned plans are replay-validated against apply_move.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .errors import PlanningError
from .moves import (ALL_KINDS, CROSS, HEAD, R1, R2, TAIL, HighLevelAction,
                    apply_move)
from .topology import EMPTY_STATE, TopoState, canonical

DEFAULT_MAX_PLANS = 8
DEFAULT_ENUMERATION_BOUND = 4


@dataclass(frozen=True)
class PlanStep:
    source: TopoState
    action: HighLevelAction
    target: TopoState


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...]
    goal: TopoState

    def __len__(self) -> int:
        return len(self.steps)

    def actions(self) -> list[HighLevelAction]:
        return [s.action for s in self.steps]

    def states(self) -> list[TopoState]:
        """The chain S_0 ... S_m including both endpoints."""
        if not self.steps:
            return [self.goal]
        return [self.steps[0].source] + [s.target for s in self.steps]

    def to_json(self) -> dict:
        return {
            "goal": self.goal.text(),
            "steps": [
                {"source": s.source.text(), "action": s.action.to_json(),
                 "target": s.target.text()}
                for s in self.steps
            ],
        }


def _validate_chain(plan: Plan, start: TopoState) -> Plan:
    state = start
    for step in plan.steps:
        if step.source != state or apply_move(state, step.action) != step.target:
            raise PlanningError("internal: plan does not replay")  # pragma: no cover
        state = step.target
    if state != plan.goal:
        raise PlanningError("internal: plan does not reach its goal")  # pragma: no cover
    return plan


def _inverse_edges(state: TopoState, kinds: frozenset[str] | set[str]):
    """All (predecessor, action) with apply_move(predecessor, action) == state."""
    code = state.passages
    n = len(code)
    pos: dict[int, list[int]] = {}
    for idx, p in enumerate(code):
        pos.setdefault(p[0], []).append(idx)
    out = []

    def removed(indices: set[int]) -> TopoState:
        return canonical([p for i, p in enumerate(code) if i not in indices])

    def arc_after(index: int, dropped: set[int]) -> int:
        return index - sum(1 for d in dropped if d < index)

    if R1 in kinds:
        for k in range(n - 1):
            if code[k][0] == code[k + 1][0]:
                action = HighLevelAction(R1, arc=k, over_first=code[k][1], sign=code[k][2])
                out.append((removed({k, k + 1}), action))

    if R2 in kinds:
        for k in range(n - 1):
            a, b = code[k], code[k + 1]
            # Generator emits (+1, -1) signs at the first insertion arc.
            if a[0] == b[0] or a[1] != b[1] or a[2] != 1 or b[2] != -1:
                continue
            pa = next(i for i in pos[a[0]] if i != k)
            pb = next(i for i in pos[b[0]] if i != k + 1)
            if pb + 1 != pa or pb in (k, k + 1) or code[pb][1] == a[1]:
                continue
            drop = {k, k + 1, pb, pa}
            arc_i, arc_j = arc_after(k, drop), arc_after(pb, drop)
            if arc_i == arc_j:  # contiguous blocks cannot come from an R2 insertion
                continue
            action = HighLevelAction(R2, arc=arc_i, arc2=arc_j, over_first=a[1])
            out.append((removed(drop), action))

    if CROSS in kinds and n >= 2:
        first = code[0]
        partner = next(i for i in pos[first[0]] if i != 0)
        drop = {0, partner}
        out.append((
            removed(drop),
            HighLevelAction(CROSS, end=HEAD, arc=arc_after(partner, drop),
                            over=first[1], sign=first[2]),
        ))
        last = code[-1]
        partner = next(i for i in pos[last[0]] if i != n - 1)
        drop = {n - 1, partner}
        out.append((
            removed(drop),
            HighLevelAction(CROSS, end=TAIL, arc=arc_after(partner, drop),
                            over=last[1], sign=last[2]),
        ))
    return out


def _search(start: TopoState, goal: TopoState,
            kinds: frozenset[str] | set[str], max_plans: int) -> list[Plan]:
    """All shortest plans start -> goal (up to max_plans, lexicographic order)."""
    if goal == start:
        return [_validate_chain(Plan((), goal), start)]
    if goal.n_crossings <= start.n_crossings:
        return []

    # Backward BFS over deletion edges; preds[s] holds (action, successor) pairs.
    depth = {goal: 0}
    succs: dict[TopoState, list[tuple[HighLevelAction, TopoState]]] = {}
    frontier = deque([goal])
    found_depth = None
    while frontier:
        node = frontier.popleft()
        d = depth[node]
        if found_depth is not None and d >= found_depth:
            continue
        for pred, action in _inverse_edges(node, kinds):
            if pred.n_crossings < start.n_crossings:
                continue
            if pred not in depth:
                depth[pred] = d + 1
                frontier.append(pred)
            if depth[pred] == d + 1:
                succs.setdefault(pred, []).append((action, node))
                if pred == start and found_depth is None:
                    found_depth = d + 1
    if start not in depth:
        return []

    # Enumerate forward paths through the layered predecessor DAG.
    plans: list[Plan] = []

    def extend(state: TopoState, steps: list[PlanStep]) -> None:
        if len(plans) >= max_plans:
            return
        if state == goal:
            plans.append(_validate_chain(Plan(tuple(steps), goal), start))
            return
        options = [
            (action, nxt) for action, nxt in succs.get(state, [])
            if depth[nxt] == depth[state] - 1
        ]
        options.sort(key=lambda e: e[0].descriptor())
        for action, nxt in options:
            steps.append(PlanStep(state, action, nxt))
            extend(nxt, steps)
            steps.pop()

    extend(start, [])
    return plans


def plan_to(goal: TopoState, kinds: frozenset[str] | set[str] = ALL_KINDS,
            max_plans: int = DEFAULT_MAX_PLANS,
            enumeration_bound: int = DEFAULT_ENUMERATION_BOUND) -> list[Plan]:
    """Up to max_plans shortest plans from the unknot to the goal code."""
    if goal.n_crossings > enumeration_bound:
        raise PlanningError(
            f"goal draws {goal.n_crossings} crossings, beyond the bound {enumeration_bound}"
        )
    return _search(EMPTY_STATE, goal, kinds, max_plans)


def plan_from(current: TopoState, goal: TopoState,
              kinds: frozenset[str] | set[str] = ALL_KINDS) -> Plan | None:
    """Shortest plan rooted at an arbitrary state, or None if unreachable."""
    plans = _search(current, goal, kinds, 1)
    return plans[0] if plans else None


def save_plans(plans: list[Plan], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"plans": [p.to_json() for p in plans]}, fh)
