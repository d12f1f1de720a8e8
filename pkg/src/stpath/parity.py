"""Parity correction and tour assembly, plus the two end-to-end algorithms.

Both algorithms compute a spanning tree, fix the wrong-parity vertices with a
cheapest perfect matching on them (a minimum T-join, since costs are metric),
walk an Eulerian trail from s to t and shortcut repeated vertices.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import networkx as nx

from .dp import DpRecord, DpResult, LambdaSchedule, RecursiveDP, lambda_schedule, min_spanning_tree
from .edges import edge
from .instance import MetricInstance, TourResult
from .lp import DpCall, SolverStats

__all__ = [
    "ParitySet",
    "JoinEdges",
    "odd_parity_set",
    "min_cost_perfect_matching",
    "eulerian_trail",
    "shortcut",
    "christofides_hoogeveen",
    "RdpRun",
    "run_rdp",
    "solve_rdp",
    "tour_from_tree",
]


@dataclass(frozen=True)
class ParitySet:
    members: frozenset

    def __post_init__(self):
        if len(self.members) % 2:
            raise ValueError(f"parity set must have even size, got {sorted(self.members)}")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __contains__(self, v) -> bool:
        return v in self.members


@dataclass(frozen=True)
class JoinEdges:
    edges: tuple[tuple[int, int], ...]
    cost: float


def odd_parity_set(S: Iterable[tuple[int, int]], s: int, t: int, n: int) -> ParitySet:
    """Vertices of odd degree in ``S``, symmetric-differenced with ``{s}`` and ``{t}``."""
    deg = Counter()
    for u, v in S:
        deg[u] += 1
        deg[v] += 1
    odd = {v for v in range(n) if deg[v] % 2}
    odd ^= {s}
    odd ^= {t}
    return ParitySet(frozenset(odd))


def min_cost_perfect_matching(T: ParitySet | Iterable[int], cost) -> JoinEdges:
    """Minimum-cost perfect matching on ``T`` under ``cost`` (blossom algorithm)."""
    verts = sorted(T)
    if len(verts) % 2:
        raise ValueError(f"odd number of vertices to match: {verts}")
    if not verts:
        return JoinEdges((), 0.0)
    g = nx.Graph()
    for i, u in enumerate(verts):
        for v in verts[i + 1 :]:
            g.add_edge(u, v, weight=float(cost[u, v]))
    matching = nx.min_weight_matching(g)
    pairs = tuple(sorted(edge(u, v) for u, v in matching))
    if 2 * len(pairs) != len(verts):
        raise AssertionError("matching is not perfect")
    return JoinEdges(pairs, float(sum(float(cost[u, v]) for u, v in pairs)))


def eulerian_trail(edges: Sequence[tuple[int, int]], start: int, end: int) -> list[int]:
    """Hierholzer walk from ``start`` to ``end`` using every multiedge once."""
    deg = Counter()
    adj: dict[int, list[tuple[int, int]]] = {}
    for idx, (u, v) in enumerate(edges):
        deg[u] += 1
        deg[v] += 1
        adj.setdefault(u, []).append((v, idx))
        adj.setdefault(v, []).append((u, idx))
    odd = {v for v, d in deg.items() if d % 2}
    want = set() if start == end else {start, end}
    if odd != want:
        raise ValueError(f"odd-degree vertices {sorted(odd)} do not match endpoints {sorted(want)}")
    if not edges:
        if start != end:
            raise ValueError("no edges but start != end")
        return [start]
    if start not in adj:
        raise ValueError(f"start vertex {start} has no incident edge")
    for v in adj:
        adj[v].sort()
    ptr = {v: 0 for v in adj}
    used = [False] * len(edges)
    stack = [start]
    walk = []
    while stack:
        v = stack[-1]
        nbrs = adj[v]
        i = ptr[v]
        while i < len(nbrs) and used[nbrs[i][1]]:
            i += 1
        ptr[v] = i
        if i == len(nbrs):
            walk.append(stack.pop())
        else:
            w, idx = nbrs[i]
            used[idx] = True
            stack.append(w)
    walk.reverse()
    if not all(used):
        raise ValueError("multigraph is disconnected")
    return walk


def shortcut(walk: Sequence[int], inst: MetricInstance) -> TourResult:
    """Keep the first visit of every vertex; ``t`` is moved to the end."""
    closed = inst.s == inst.t
    missing = set(range(inst.n)) - set(walk)
    if missing:
        raise ValueError(f"walk misses vertices {sorted(missing)}")
    seen = set()
    order = []
    for v in walk:
        if v in seen or (not closed and v == inst.t):
            continue
        seen.add(v)
        order.append(v)
    if not closed:
        order.append(inst.t)
    tour_cost = float(inst.tour_cost(order, closed))
    walk_cost = float(sum(float(inst.cost[u, v]) for u, v in zip(walk, walk[1:])))
    assert tour_cost <= walk_cost * (1 + 1e-12) + 1e-12, "shortcutting increased the cost"
    return TourResult(tuple(order), tour_cost, closed)


def tour_from_tree(inst: MetricInstance, S: Iterable[tuple[int, int]]):
    """Parity-correct ``S`` and shortcut an Eulerian trail; returns ``(tour, T, J, walk)``."""
    S = sorted(S)
    T = odd_parity_set(S, inst.s, inst.t, inst.n)
    J = min_cost_perfect_matching(T, inst.cost)
    walk = eulerian_trail(S + list(J.edges), inst.s, inst.t)
    return shortcut(walk, inst), T, J, walk


def christofides_hoogeveen(inst: MetricInstance) -> TourResult:
    S = min_spanning_tree(inst.full_mask, inst.cost)
    tour, _, _, _ = tour_from_tree(inst, S)
    return tour


@dataclass
class RdpRun:
    schedule: LambdaSchedule
    top: DpResult
    tour: TourResult
    T: ParitySet
    J: JoinEdges
    walk: list
    stats: SolverStats
    wall_ms: float
    records: list = field(default_factory=list)

    @property
    def lp_value_top(self) -> float:
        return float(self.top.lp_value)

    @property
    def parity_vector_cost(self) -> float:
        return float(self.top.y_cost)


def run_rdp(
    inst: MetricInstance,
    epsilon=0.25,
    exact: bool = False,
    observer: Callable[[DpRecord], None] | None = None,
    keep_records: bool = False,
) -> RdpRun:
    """Top-level DP call, then parity correction of its tree.

    Checks the cost chain the analysis guarantees: the matching costs at most
    ``lambda_1 * c(y*)`` and the tour at most ``c(S*)`` plus the matching.
    """
    sched = lambda_schedule(epsilon)
    stats = SolverStats()
    records: list = []

    def observe(rec: DpRecord):
        if keep_records:
            records.append(rec)
        if observer is not None:
            observer(rec)

    start = time.perf_counter()
    dp = RecursiveDP(inst, sched, exact=exact, observer=observe, stats=stats)
    top = dp.run(DpCall.top(inst))
    tour, T, J, walk = tour_from_tree(inst, top.S)
    wall_ms = (time.perf_counter() - start) * 1000.0

    bound = float(sched.lambdas[0]) * float(top.y_cost)
    if J.cost > bound + 1e-7 * max(1.0, bound):
        raise AssertionError(f"matching cost {J.cost} exceeds lambda_1 * c(y*) = {bound}")
    if tour.cost > float(top.s_cost) + J.cost + 1e-9 * max(1.0, tour.cost):
        raise AssertionError("tour costs more than tree plus matching")
    return RdpRun(sched, top, tour, T, J, walk, stats, wall_ms, records)


def solve_rdp(inst: MetricInstance, epsilon=0.25, exact: bool = False) -> TourResult:
    return run_rdp(inst, epsilon, exact=exact).tour
