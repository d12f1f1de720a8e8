"""Recursive dynamic program over guessed lonely cuts.

Each call solves its cut LP, takes the chain of narrow cuts of the optimum and
builds an acyclic auxiliary digraph whose nodes are triples ``(U, v, w)``: a
narrow cut side ``U`` together with a guessed lonely edge ``{v, w}`` leaving it.
An arc between two triples stands for the sub-instance strictly between the two
cuts, solved one level deeper. A shortest path through the digraph fixes which
cuts are lonely; the sub-trees and the lonely edges are glued into a spanning
tree of the window, and the sub-vectors are mixed with the LP optimum into the
parity correction vector ``y``. On the last level the call returns a minimum
spanning tree and the LP optimum itself.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

from .cuts import ChainViolationError, CutChain, narrow_cuts
from .edges import FractionalEdgeVector, bit, edge, edges_within, members, popcount
from .instance import MetricInstance
from .lp import DpCall, LpOutcome, SolverStats, solve_sub_lp, to_float

__all__ = [
    "LambdaSchedule",
    "lambda_schedule",
    "AuxNode",
    "AuxArc",
    "DpResult",
    "DpRecord",
    "SubinstanceCache",
    "RecursiveDP",
    "run_dp",
    "build_aux_digraph",
    "arc_cost",
    "shortest_path_dag",
    "assemble",
    "min_spanning_tree",
]

log = logging.getLogger(__name__)


# ------------------------------------------------------------------ schedule


@dataclass(frozen=True)
class LambdaSchedule:
    epsilon: float
    k: int
    Lambda: int
    lambdas: tuple[Fraction, ...]

    def lam(self, level: int) -> Fraction:
        """``lambda_level`` for ``1 <= level <= k``; zero beyond the last level."""
        if level == self.k + 1:
            return Fraction(0)
        return self.lambdas[level - 1]

    def mixing_coefficients(self) -> tuple[Fraction, ...]:
        """Weight of each level's LP optimum in ``lambda_1 * y`` at the top call."""
        return tuple(self.lam(l) - self.lam(l + 1) for l in range(1, self.k + 1))

    @property
    def guarantee(self) -> Fraction:
        return 1 + self.lambdas[0]


def lambda_schedule(epsilon) -> LambdaSchedule:
    """Depth ``k = ceil(log2(1/epsilon))``, ``Lambda = 2^(k+1) - 3`` and
    ``lambda_l = (2^(k-l+1) - 1) / Lambda``."""
    eps = Fraction(epsilon)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    k = 0
    while (1 << k) * eps < 1:
        k += 1
    Lam = 2 ** (k + 1) - 3
    lambdas = tuple(Fraction(2 ** (k - l + 1) - 1, Lam) for l in range(1, k + 1))
    return LambdaSchedule(float(epsilon), k, Lam, lambdas)


# ------------------------------------------------------------ digraph types


class AuxNode(NamedTuple):
    U: int
    v: int | None
    w: int | None

    def encode(self) -> tuple[int, int, int, int]:
        return (popcount(self.U), self.U, -1 if self.v is None else self.v, -1 if self.w is None else self.w)

    def to_json(self) -> list:
        return [members(self.U), self.v, self.w]


@dataclass
class AuxArc:
    tail: AuxNode
    head: AuxNode
    sub_call: DpCall
    cost: object = None


@dataclass
class DpResult:
    S: frozenset
    y: FractionalEdgeVector
    L: CutChain
    lp_value: object
    y_cost: object
    s_cost: object
    stats: dict = field(default_factory=dict)


@dataclass
class DpRecord:
    """Everything one computed call produced, handed to observers."""

    call: DpCall
    lp: LpOutcome
    narrow: CutChain | None
    nodes: list
    arcs: list
    path: list  # AuxNode sequence, SOURCE first
    path_arcs: list  # AuxArc per path step
    sub_results: list  # DpResult per path step
    d_path: object
    y_prime: FractionalEdgeVector | None
    y_prime_cost: object
    result: DpResult
    lam_l: Fraction
    lam_next: Fraction


class SubinstanceCache:
    """Insert-if-absent memo; each key is computed at most once even under threads."""

    def __init__(self):
        self._data: dict = {}
        self._pending: dict = {}
        self._lock = threading.Lock()
        self.hits = 0

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key) -> bool:
        return key in self._data

    def get_or_compute(self, key, compute: Callable[[], object]):
        with self._lock:
            if key in self._data:
                self.hits += 1
                return self._data[key], True
            event = self._pending.get(key)
            owner = event is None
            if owner:
                event = self._pending[key] = threading.Event()
        if not owner:
            event.wait()
            with self._lock:
                self.hits += 1
                return self._data[key], True
        try:
            value = compute()
            with self._lock:
                self._data[key] = value
        finally:
            with self._lock:
                del self._pending[key]
            event.set()
        return value, False


# -------------------------------------------------------------- operations


def min_spanning_tree(window: int, cost) -> frozenset:
    """Kruskal over ``E[W]``, ties broken by vertex pair."""
    verts = members(window)
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree = []
    for u, v in sorted(edges_within(window), key=lambda e: (cost[e[0], e[1]], e)):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            tree.append((u, v))
            if len(tree) == len(verts) - 1:
                break
    return frozenset(tree)


def build_aux_digraph(narrow: CutChain, call: DpCall):
    """Nodes and arcs of the auxiliary digraph for the narrow cuts of one call."""
    w_mask = call.window
    source = AuxNode(call.w_s, None, call.s_prime)
    sink = AuxNode(call.full & ~call.w_t, call.t_prime, None)
    nodes = [source]
    for U in narrow.cuts:
        inside = members(U & w_mask)
        outside = members(w_mask & ~U)
        nodes.extend(AuxNode(U, v, w) for v in inside for w in outside)
    nodes.append(sink)

    candidates = tuple(narrow.cuts) + tuple(call.busy)
    sub_calls: dict = {}
    arcs = []
    by_side: dict[int, list[AuxNode]] = {}
    for node in nodes[1:]:
        by_side.setdefault(node.U, []).append(node)
    sides = sorted(by_side, key=lambda u: (popcount(u), u))
    for tail in nodes[:-1]:
        for U2 in sides:
            if U2 == tail.U or U2 & tail.U != tail.U:
                continue
            diff = U2 & ~tail.U
            if not (diff >> tail.w) & 1:
                continue
            for head in by_side[U2]:
                if not (diff >> head.v) & 1:
                    continue
                key = (tail.U, tail.w, U2, head.v)
                sub = sub_calls.get(key)
                if sub is None:
                    lo = tail.U | bit(tail.w)
                    hi = U2 & ~bit(head.v)
                    busy = tuple(u for u in candidates if u & lo == lo and u & ~hi == 0)
                    sub = DpCall(call.n, tail.U, call.full & ~U2, tail.w, head.v, busy, call.level + 1)
                    sub_calls[key] = sub
                arcs.append(AuxArc(tail, head, sub))
    return nodes, arcs


def arc_cost(arc: AuxArc, sub: DpResult, lam_next, cost):
    """``c(S^a) + lam_next * c(y^a)``, plus ``(1 + lam_next) * c(v2, w2)`` unless the head is the sink."""
    d = sub.s_cost + lam_next * sub.y_cost
    if arc.head.w is not None:
        d += (1 + lam_next) * cost[arc.head.v, arc.head.w]
    return d


def shortest_path_dag(nodes: Sequence[AuxNode], arcs: Sequence[AuxArc], d: Sequence) -> list[AuxArc]:
    """Cheapest source-to-sink arc sequence; ties go to fewer arcs, then the
    lexicographically smallest node encoding sequence."""
    source, sink = nodes[0], nodes[-1]
    out: dict[AuxNode, list[tuple[AuxArc, object]]] = {}
    for arc, da in zip(arcs, d):
        out.setdefault(arc.tail, []).append((arc, da))
    best: dict[AuxNode, tuple] = {sink: (0, 0, (sink.encode(),), None)}
    # arcs strictly grow U, so decreasing |U| is a reverse topological order
    for node in sorted(nodes[:-1], key=lambda x: x.encode(), reverse=True):
        choice = None
        for arc, da in out.get(node, ()):
            nxt = best.get(arc.head)
            if nxt is None:
                continue
            cand = (da + nxt[0], nxt[1] + 1, (node.encode(),) + nxt[2], arc)
            if choice is None or cand[:3] < choice[:3]:
                choice = cand
        if choice is not None:
            best[node] = choice
    if source not in best:
        raise AssertionError("auxiliary digraph has no source-sink path")
    path = []
    node = source
    while node != sink:
        arc = best[node][3]
        path.append(arc)
        node = arc.head
    return path


def assemble(
    path: Sequence[AuxArc],
    subs: Sequence[DpResult],
    x_star: FractionalEdgeVector,
    lam_l: Fraction,
    lam_next: Fraction,
    exact: bool = False,
):
    """Glue sub-trees, lonely edges, sub-vectors and cuts along the chosen path.

    Returns ``(S, y, L, y_prime)``.
    """
    n = x_star.n
    S = set()
    y_prime = FractionalEdgeVector(n)
    L = set()
    for arc, sub in zip(path, subs):
        S.update(sub.S)
        y_prime = y_prime + sub.y
        L.update(sub.L.cuts)
    lonely = [arc.head for arc in path[:-1]]
    for node in lonely:
        f = edge(node.v, node.w)
        S.add(f)
        y_prime = y_prime + FractionalEdgeVector.incidence(n, [f])
        L.add(node.U)
    a, b = (lam_l - lam_next) / lam_l, lam_next / lam_l
    if not exact:
        a, b = float(a), float(b)
    y = x_star.scale(a) + y_prime.scale(b)
    chain = CutChain(tuple(sorted(L, key=lambda u: (popcount(u), u))))
    return frozenset(S), y, chain, y_prime


# ---------------------------------------------------------------- the DP


class RecursiveDP:
    """One solver run: instance, schedule, shared memo, statistics and observers."""

    def __init__(
        self,
        inst: MetricInstance,
        sched: LambdaSchedule,
        exact: bool = False,
        memo: SubinstanceCache | None = None,
        observer: Callable[[DpRecord], None] | None = None,
        stats: SolverStats | None = None,
    ):
        self.exact = exact
        self.inst = inst.as_exact() if exact else inst
        self.sched = sched
        self.memo = memo if memo is not None else SubinstanceCache()
        self.observer = observer
        self.stats = stats if stats is not None else SolverStats()

    def lam(self, level: int):
        lam = self.sched.lam(level)
        return lam if self.exact else float(lam)

    def run(self, call: DpCall) -> DpResult:
        result, hit = self.memo.get_or_compute(call.key(), lambda: self._compute(call))
        if hit:
            self.stats.memo_hits += 1
        return result

    def _narrow(self, lp: LpOutcome, call: DpCall) -> tuple[LpOutcome, CutChain]:
        try:
            return lp, narrow_cuts(lp.x_star, call, exact=self.exact)
        except ChainViolationError:
            if self.exact:
                raise
            log.warning("crossing narrow cuts at level %d; re-solving the LP exactly", call.level)
            self.stats.exact_retries += 1
            exact_lp = solve_sub_lp(call, self.inst.as_exact(), exact=True)
            chain = narrow_cuts(exact_lp.x_star, call, exact=True)
            lp = to_float(exact_lp)
            return lp, CutChain(chain.cuts, tuple(float(v) for v in chain.values))

    def _compute(self, call: DpCall) -> DpResult:
        self.stats.dp_calls += 1
        inst, k, level = self.inst, self.sched.k, call.level
        call.validate(k)
        lp = solve_sub_lp(call, inst, exact=self.exact, stats=self.stats)
        cost = inst.cost
        lam_l = self.sched.lam(level)
        lam_next = self.sched.lam(level + 1)

        if level == k:
            S = min_spanning_tree(call.window, cost)
            y = lp.x_star
            result = DpResult(S, y, CutChain(), lp.value, y.cost(cost), _edges_cost(S, cost, self.exact))
            if self.observer is not None:
                self.observer(DpRecord(call, lp, None, [], [], [], [], [], None, None, None, result, lam_l, lam_next))
            return result

        lp, narrow = self._narrow(lp, call)
        nodes, arcs = build_aux_digraph(narrow, call)
        self.stats.arcs += len(arcs)
        lam_nx = self.lam(level + 1)
        subs: dict = {}
        d = []
        for arc in arcs:
            key = arc.sub_call.key()
            sub = subs.get(key)
            if sub is None:
                sub = subs[key] = self.run(arc.sub_call)
            arc.cost = arc_cost(arc, sub, lam_nx, cost)
            d.append(arc.cost)
        path = shortest_path_dag(nodes, arcs, d)
        path_subs = [subs[arc.sub_call.key()] for arc in path]
        S, y, L, y_prime = assemble(path, path_subs, lp.x_star, lam_l, lam_next, self.exact)
        d_path = sum((arc.cost for arc in path), 0)
        result = DpResult(
            S,
            y,
            L,
            lp.value,
            y.cost(cost),
            _edges_cost(S, cost, self.exact),
            {"arcs": len(arcs), "nodes": len(nodes), "sub_calls": len(subs), "m": len(narrow)},
        )
        if self.observer is not None:
            self.observer(
                DpRecord(call, lp, narrow, nodes, arcs, [path[0].tail] + [a.head for a in path], path,
                         path_subs, d_path, y_prime, y_prime.cost(cost), result, lam_l, lam_next)
            )
        return result


def _edges_cost(S, cost, exact: bool):
    total = Fraction(0) if exact else 0.0
    for u, v in S:
        total += cost[u, v]
    return total


def run_dp(
    call: DpCall,
    inst: MetricInstance,
    sched: LambdaSchedule,
    memo: SubinstanceCache | None = None,
    exact: bool = False,
    observer: Callable[[DpRecord], None] | None = None,
    stats: SolverStats | None = None,
) -> DpResult:
    return RecursiveDP(inst, sched, exact=exact, memo=memo, observer=observer, stats=stats).run(call)
