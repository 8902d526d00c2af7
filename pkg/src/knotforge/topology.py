"""Topological state extraction and manipulation.

A rope configuration projects to a planar diagram whose crossings are recorded
as a signed Gauss code of an open curve: passages listed head to tail, each
tagged over/under and with the crossing sign. Codes are canonical (crossings
numbered by first encounter), equality is literal sequence equality, and the
crossing-number estimate comes from R1/R2 reduction of the code.
"""

from __future__ import annotations

import re
import zlib
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDiagram, InvalidConfig
from .rope_core import RopeConfig

# Passage = (crossing_id, is_over, sign); sign is +1 or -1.
Passage = tuple[int, bool, int]

MIN_CROSSING_ANGLE = np.deg2rad(1.0)
JITTER_SCALE = 1e-4
DEFAULT_EXACT_BOUND = 6


@dataclass(frozen=True)
class CrossingRecord:
    """One diagram crossing: which segments meet, which is on top, and its sign."""

    id: int
    over_segment: int
    under_segment: int
    sign: int
    planar_point: tuple[float, float]


@dataclass(frozen=True)
class TopoState:
    """Canonical signed Gauss code of the open curve (P-data)."""

    passages: tuple[Passage, ...]

    @property
    def n_crossings(self) -> int:
        """Crossings drawn in this code (half the passage count)."""
        return len(self.passages) // 2

    def text(self) -> str:
        parts = []
        for cid, over, sign in self.passages:
            parts.append(f"{'O' if over else 'U'}{cid}{'+' if sign > 0 else '-'}")
        return " ".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TopoState({self.text()!r})"


EMPTY_STATE = TopoState(())

_PASSAGE_RE = re.compile(r"^([OU])(\d+)([+-])$")


def canonical(passages: list[Passage] | tuple[Passage, ...]) -> TopoState:
    """Renumber crossing ids 1, 2, ... in first-encounter order from the head."""
    relabel: dict[int, int] = {}
    out = []
    for cid, over, sign in passages:
        if cid not in relabel:
            relabel[cid] = len(relabel) + 1
        out.append((relabel[cid], over, sign))
    return TopoState(tuple(out))


def make_state(passages: list[Passage] | tuple[Passage, ...]) -> TopoState:
    """Validate pairing invariants and return the canonical state."""
    seen: dict[int, list[Passage]] = {}
    for p in passages:
        seen.setdefault(p[0], []).append(p)
    for cid, entries in seen.items():
        if len(entries) != 2:
            raise InvalidConfig(f"crossing {cid} appears {len(entries)} times, expected 2")
        (_, over_a, sign_a), (_, over_b, sign_b) = entries
        if over_a == over_b:
            raise InvalidConfig(f"crossing {cid} lacks an over/under pair")
        if sign_a != sign_b:
            raise InvalidConfig(f"crossing {cid} has inconsistent signs")
    return canonical(passages)


def parse_state(text: str) -> TopoState:
    """Parse the textual P-data notation, e.g. 'O1+ U2+ O3+ U1+ O2+ U3+'."""
    text = text.strip()
    if not text:
        return EMPTY_STATE
    passages: list[Passage] = []
    for token in text.split():
        m = _PASSAGE_RE.match(token)
        if m is None:
            raise InvalidConfig(f"bad passage token {token!r}")
        role, cid, sign = m.groups()
        passages.append((int(cid), role == "O", 1 if sign == "+" else -1))
    return make_state(passages)


def states_equal(a: TopoState, b: TopoState) -> bool:
    """Literal equality of canonical codes (open curve: no rotational ambiguity)."""
    return a.passages == b.passages


# ---------------------------------------------------------------------------
# Diagram extraction


def _planar_crossings(xy: np.ndarray, z: np.ndarray, graze_z_tol: float):
    """Transversal intersections between non-adjacent segments.

    Two conventions make the readout robust against resting-contact geometry:

    * Segments are half-open in parameter, t, u in [0, 1), so an intersection
      exactly at a joint registers once, on the outgoing segment.
    * Intersections whose interpolated heights differ by less than
      graze_z_tol are side-by-side contact grazes, not crossings, and are
      skipped: the self-collision constraint keeps genuinely stacked strands
      a full rope diameter apart, so real crossings clear the threshold.

    Near-parallel crossings (under 1 degree) raise DegenerateDiagram.
    """
    n_seg = len(xy) - 1
    a = xy[:-1]
    d = xy[1:] - xy[:-1]
    ii, jj = np.triu_indices(n_seg, k=2)
    cross = d[ii, 0] * d[jj, 1] - d[ii, 1] * d[jj, 0]
    diff = a[jj] - a[ii]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (diff[:, 0] * d[jj, 1] - diff[:, 1] * d[jj, 0]) / cross
        u = (diff[:, 0] * d[ii, 1] - diff[:, 1] * d[ii, 0]) / cross
    hit = (cross != 0) & (t >= 0) & (t < 1) & (u >= 0) & (u < 1)

    results = []
    len_i = np.linalg.norm(d[ii[hit]], axis=1)
    len_j = np.linalg.norm(d[jj[hit]], axis=1)
    sin_angle = np.abs(cross[hit]) / (len_i * len_j)
    for k, flat in enumerate(np.nonzero(hit)[0]):
        i, j = int(ii[flat]), int(jj[flat])
        ti, tj = float(t[flat]), float(u[flat])
        zi = z[i] + ti * (z[i + 1] - z[i])
        zj = z[j] + tj * (z[j + 1] - z[j])
        if abs(zi - zj) < graze_z_tol:
            continue
        point = a[i] + ti * d[i]
        if sin_angle[k] < np.sin(MIN_CROSSING_ANGLE):
            raise DegenerateDiagram(f"segments {i},{j} cross at a grazing angle")
        over_is_i = zi > zj
        d_over, d_under = (d[i], d[j]) if over_is_i else (d[j], d[i])
        sign = 1 if d_over[0] * d_under[1] - d_over[1] * d_under[0] > 0 else -1
        results.append((i, j, ti, tj, (float(point[0]), float(point[1])), over_is_i, sign))
    return results


def extract_crossings(config: RopeConfig) -> tuple[TopoState, list[CrossingRecord]]:
    """Top with full crossing records; applies one deterministic jitter retry."""
    xy = config.positions[:, :2]
    z = config.positions[:, 2]
    graze = config.params.rope_radius
    try:
        raw = _planar_crossings(xy, z, graze)
    except DegenerateDiagram:
        seed = zlib.crc32(np.ascontiguousarray(config.positions).tobytes())
        rng = np.random.default_rng(seed)
        jitter = rng.uniform(-JITTER_SCALE, JITTER_SCALE, size=xy.shape)
        raw = _planar_crossings(xy + jitter, z, graze)  # second failure propagates

    # Passages in traversal order: sort by (segment index, parameter along it).
    events = []  # (segment, param, crossing_index, is_over)
    for idx, (i, j, ti, tj, _point, over_is_i, _sign) in enumerate(raw):
        events.append((i, ti, idx, over_is_i))
        events.append((j, tj, idx, not over_is_i))
    events.sort(key=lambda e: (e[0], e[1]))

    order: dict[int, int] = {}
    passages: list[Passage] = []
    for _seg, _t, idx, is_over in events:
        if idx not in order:
            order[idx] = len(order) + 1
        passages.append((order[idx], is_over, raw[idx][6]))
    state = make_state(passages)

    records = []
    for idx, (i, j, _ti, _tj, point, over_is_i, sign) in enumerate(raw):
        records.append(
            CrossingRecord(
                id=order[idx],
                over_segment=i if over_is_i else j,
                under_segment=j if over_is_i else i,
                sign=sign,
                planar_point=point,
            )
        )
    records.sort(key=lambda r: r.id)
    return state, records


def top(config: RopeConfig) -> TopoState:
    """Map a rope configuration to its topological state."""
    state, _ = extract_crossings(config)
    return state


# ---------------------------------------------------------------------------
# Reduction and crossing number


def _r1_sites(passages: tuple[Passage, ...]) -> list[int]:
    """Positions k where passages k, k+1 are the two passages of one crossing."""
    return [
        k
        for k in range(len(passages) - 1)
        if passages[k][0] == passages[k + 1][0]
    ]


def _r2_sites(passages: tuple[Passage, ...]) -> list[tuple[int, int]]:
    """Position pairs (k, m): (a,b) at k,k+1 and (b,a) at m,m+1 with equal roles."""
    pos: dict[int, list[int]] = {}
    for idx, p in enumerate(passages):
        pos.setdefault(p[0], []).append(idx)
    sites = []
    for k in range(len(passages) - 1):
        a, b = passages[k], passages[k + 1]
        if a[0] == b[0] or a[1] != b[1]:
            continue
        pa = next(i for i in pos[a[0]] if i != k)
        pb = next(i for i in pos[b[0]] if i != k + 1)
        if pb + 1 == pa and pb not in (k, k + 1):
            sites.append((k, pb))
    return sites


def _delete(passages: tuple[Passage, ...], indices: tuple[int, ...]) -> TopoState:
    drop = set(indices)
    return canonical([p for i, p in enumerate(passages) if i not in drop])


def reduce_state(state: TopoState) -> TopoState:
    """Greedy R1/R2 reduction to a fixpoint, re-canonicalizing after each deletion."""
    current = state
    while True:
        r1 = _r1_sites(current.passages)
        if r1:
            k = r1[0]
            current = _delete(current.passages, (k, k + 1))
            continue
        r2 = _r2_sites(current.passages)
        if r2:
            k, m = r2[0]
            current = _delete(current.passages, (k, k + 1, m, m + 1))
            continue
        return current


def _reduction_children(state: TopoState) -> list[TopoState]:
    children = []
    for k in _r1_sites(state.passages):
        children.append(_delete(state.passages, (k, k + 1)))
    for k, m in _r2_sites(state.passages):
        children.append(_delete(state.passages, (k, k + 1, m, m + 1)))
    return children


def crossing_number(state: TopoState, exact_bound: int = DEFAULT_EXACT_BOUND) -> tuple[int, bool]:
    """Estimate the minimal crossing count reachable by R1/R2 reductions.

    Codes with at most exact_bound crossings get an exhaustive BFS over every
    reduction sequence (exact); larger codes fall back to the greedy upper bound.
    """
    if state.n_crossings > exact_bound:
        return reduce_state(state).n_crossings, False
    best = state.n_crossings
    seen = {state}
    queue = deque([state])
    while queue:
        node = queue.popleft()
        for child in _reduction_children(node):
            if child in seen:
                continue
            seen.add(child)
            best = min(best, child.n_crossings)
            if best == 0:
                return 0, True
            queue.append(child)
    return best, True
