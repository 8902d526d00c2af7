"""Symbolic high-level actions on Gauss codes and bounded graph enumeration.

Moves insert passages at "arcs" (the gaps between passages, including both
ends), only ever increasing the drawn crossing count: R1 and Cross add one
crossing, R2 adds two. No planar-realizability filtering is applied; the
executive layer treats repeated physical failure of an edge as infeasibility.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .errors import InvalidMove
from .topology import Passage, TopoState, canonical

R1 = "R1"
R2 = "R2"
CROSS = "Cross"
ALL_KINDS = frozenset((R1, R2, CROSS))
HEAD = "head"
TAIL = "tail"


@dataclass(frozen=True)
class HighLevelAction:
    """One parameterized move.

    R1 uses (arc, over_first, sign); R2 uses (arc, arc2, over_first) where
    over_first says the strand inserted at `arc` runs on top; Cross uses
    (end, arc, over, sign) where `arc` places the new crossing's partner
    passage and `over` says the looped end passes on top.
    """

    kind: str
    arc: int = 0
    arc2: int = 0
    over_first: bool = True
    over: bool = True
    sign: int = 1
    end: str = HEAD

    def descriptor(self) -> str:
        if self.kind == R1:
            return f"R1(arc={self.arc},over_first={int(self.over_first)},sign={self.sign:+d})"
        if self.kind == R2:
            return f"R2(arc={self.arc},arc2={self.arc2},over_first={int(self.over_first)})"
        return f"Cross(end={self.end},arc={self.arc},over={int(self.over)},sign={self.sign:+d})"

    @property
    def crossing_increment(self) -> int:
        return 2 if self.kind == R2 else 1

    def to_json(self) -> dict:
        out = {"kind": self.kind, "arc": self.arc}
        if self.kind == R1:
            out.update(over_first=self.over_first, sign=self.sign)
        elif self.kind == R2:
            out.update(arc2=self.arc2, over_first=self.over_first)
        else:
            out.update(end=self.end, over=self.over, sign=self.sign)
        return out

    @staticmethod
    def from_json(obj: dict) -> "HighLevelAction":
        kind = obj["kind"]
        if kind == R1:
            return HighLevelAction(R1, arc=int(obj["arc"]), over_first=bool(obj["over_first"]),
                                   sign=int(obj["sign"]))
        if kind == R2:
            return HighLevelAction(R2, arc=int(obj["arc"]), arc2=int(obj["arc2"]),
                                   over_first=bool(obj["over_first"]))
        if kind == CROSS:
            return HighLevelAction(CROSS, arc=int(obj["arc"]), end=obj["end"],
                                   over=bool(obj["over"]), sign=int(obj["sign"]))
        raise InvalidMove(f"unknown action kind {kind!r}")


def _check(action: HighLevelAction, state: TopoState) -> None:
    n = len(state.passages)
    if action.kind not in ALL_KINDS:
        raise InvalidMove(f"unknown action kind {action.kind!r}")
    if not 0 <= action.arc <= n:
        raise InvalidMove(f"arc {action.arc} outside [0, {n}]")
    if action.sign not in (1, -1):
        raise InvalidMove(f"sign must be +1 or -1, got {action.sign}")
    if action.kind == R2:
        if not 0 <= action.arc2 <= n:
            raise InvalidMove(f"arc2 {action.arc2} outside [0, {n}]")
        if action.arc == action.arc2:
            raise InvalidMove("R2 arcs must be distinct")
    if action.kind == CROSS and action.end not in (HEAD, TAIL):
        raise InvalidMove(f"Cross end must be '{HEAD}' or '{TAIL}'")


def apply_move(state: TopoState, action: HighLevelAction) -> TopoState:
    """Transition function on codes; result is canonical."""
    _check(action, state)
    code = list(state.passages)
    next_id = max((p[0] for p in code), default=0) + 1

    if action.kind == R1:
        pair: list[Passage] = [
            (next_id, action.over_first, action.sign),
            (next_id, not action.over_first, action.sign),
        ]
        code[action.arc:action.arc] = pair

    elif action.kind == R2:
        a, b = next_id, next_id + 1
        first_over = action.over_first
        pair_i: list[Passage] = [(a, first_over, 1), (b, first_over, -1)]
        pair_j: list[Passage] = [(b, not first_over, -1), (a, not first_over, 1)]
        # Insert at the larger arc first so the smaller index stays valid.
        if action.arc > action.arc2:
            code[action.arc:action.arc] = pair_i
            code[action.arc2:action.arc2] = pair_j
        else:
            code[action.arc2:action.arc2] = pair_j
            code[action.arc:action.arc] = pair_i

    else:  # Cross
        end_passage: Passage = (next_id, action.over, action.sign)
        partner: Passage = (next_id, not action.over, action.sign)
        code[action.arc:action.arc] = [partner]
        if action.end == HEAD:
            code.insert(0, end_passage)
        else:
            code.append(end_passage)

    return canonical(code)


def legal_moves(state: TopoState, kinds: frozenset[str] | set[str] = ALL_KINDS) -> list[HighLevelAction]:
    """Every parameter instantiation of the requested kinds, in deterministic order."""
    n = len(state.passages)
    out: list[HighLevelAction] = []
    if R1 in kinds:
        for arc in range(n + 1):
            for over_first in (True, False):
                for sign in (1, -1):
                    out.append(HighLevelAction(R1, arc=arc, over_first=over_first, sign=sign))
    if R2 in kinds:
        for arc in range(n + 1):
            for arc2 in range(n + 1):
                if arc == arc2:
                    continue
                for over_first in (True, False):
                    out.append(HighLevelAction(R2, arc=arc, arc2=arc2, over_first=over_first))
    if CROSS in kinds:
        for end in (HEAD, TAIL):
            for arc in range(n + 1):
                for over in (True, False):
                    for sign in (1, -1):
                        out.append(HighLevelAction(CROSS, arc=arc, end=end, over=over, sign=sign))
    return out


@dataclass
class HighLevelGraph:
    """Bounded enumeration of the move graph, layered by drawn crossing count."""

    nodes: set[TopoState] = field(default_factory=set)
    edges: list[tuple[TopoState, HighLevelAction, TopoState]] = field(default_factory=list)
    layers: dict[int, list[TopoState]] = field(default_factory=dict)
    _out: dict[TopoState, list[tuple[HighLevelAction, TopoState]]] = field(default_factory=dict)

    def out_edges(self, state: TopoState) -> list[tuple[HighLevelAction, TopoState]]:
        return self._out.get(state, [])

    def layer_count(self, n_crossings: int) -> int:
        return len(self.layers.get(n_crossings, []))


def enumerate_graph(max_phi: int, kinds: frozenset[str] | set[str] = ALL_KINDS) -> HighLevelGraph:
    """BFS from the empty code, deduplicating by canonical code.

    Edges whose target would draw more than max_phi crossings are not expanded;
    node layers index by the code's drawn crossing count.
    """
    graph = HighLevelGraph()
    root = TopoState(())
    graph.nodes.add(root)
    graph.layers.setdefault(0, []).append(root)
    queue = deque([root])
    while queue:
        state = queue.popleft()
        drawn = state.n_crossings
        if drawn >= max_phi:
            continue
        for action in legal_moves(state, kinds):
            if drawn + action.crossing_increment > max_phi:
                continue
            target = apply_move(state, action)
            graph.edges.append((state, action, target))
            graph._out.setdefault(state, []).append((action, target))
            if target not in graph.nodes:
                graph.nodes.add(target)
                graph.layers.setdefault(target.n_crossings, []).append(target)
                queue.append(target)
    return graph


def graph_to_json(graph: HighLevelGraph) -> dict:
    return {
        "nodes": [s.text() for s in sorted(graph.nodes, key=lambda s: (s.n_crossings, s.text()))],
        "edges": [
            {"source": s.text(), "action": a.to_json(), "target": t.text()}
            for s, a, t in graph.edges
        ],
        "layers": {str(k): len(v) for k, v in sorted(graph.layers.items())},
    }


def save_graph(graph: HighLevelGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_json(graph), fh)
