"""Exact and brute-force references for desk-scale certification.

Everything here is deliberately naive and shares no code path with the solver
beyond the instance and vector types.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.optimize import linprog

from .cuts import CutChain
from .dp import AuxNode, DpResult, LambdaSchedule
from .edges import FractionalEdgeVector, edge
from .instance import MetricInstance, TourResult
from .lp import DpCall
from .parity import JoinEdges, ParitySet

__all__ = [
    "OracleCapError",
    "ExactResult",
    "held_karp_path",
    "permutation_optimum",
    "enumerate_tjoin_cuts",
    "brute_force_matching",
    "mirror_dp",
    "HELD_KARP_CAP",
    "TJOIN_CAP",
    "MATCHING_CAP",
    "MIRROR_CAP",
]

HELD_KARP_CAP = 16
TJOIN_CAP = 14
MATCHING_CAP = 12
MIRROR_CAP = 6


class OracleCapError(ValueError):
    pass


@dataclass(frozen=True)
class ExactResult:
    opt_cost: float
    opt_tour: TourResult


def held_karp_path(inst: MetricInstance, cap: int = HELD_KARP_CAP) -> ExactResult:
    """Optimal s-t Hamiltonian path (or circuit if s == t) by subset DP."""
    n, s, t = inst.n, inst.s, inst.t
    if n > cap:
        raise OracleCapError(f"n={n} exceeds Held-Karp cap {cap}")
    c = np.asarray(inst.cost, dtype=float)
    if n == 1:
        return ExactResult(0.0, TourResult((s,), 0.0, True))
    size = 1 << n
    best = np.full((size, n), np.inf)
    back = np.full((size, n), -1, dtype=np.int64)
    best[1 << s, s] = 0.0
    for mask in range(size):
        if not (mask >> s) & 1 or mask == 1 << s:
            continue
        vs = [v for v in range(n) if (mask >> v) & 1 and v != s]
        prev = np.array([mask ^ (1 << v) for v in vs])
        # cand[i, u] = best[prev_i, u] + c[u, v_i]
        cand = best[prev] + c[:, vs].T
        arg = np.argmin(cand, axis=1)
        best[mask, vs] = cand[np.arange(len(vs)), arg]
        back[mask, vs] = arg
    full = size - 1
    if s == t:
        closing = best[full] + c[:, s]
        closing[s] = np.inf
        last = int(np.argmin(closing))
        opt = float(closing[last])
    else:
        last, opt = t, float(best[full, t])
    order = []
    mask, v = full, last
    while v != -1:
        order.append(v)
        u = int(back[mask, v])
        mask ^= 1 << v
        v = u if mask else -1
    order.reverse()
    tour = TourResult(tuple(order), float(inst.tour_cost(order, s == t)), s == t)
    return ExactResult(opt, tour)


def permutation_optimum(inst: MetricInstance) -> float:
    """Minimum over all orderings of the interior vertices (for cross-checking)."""
    n, s, t = inst.n, inst.s, inst.t
    c = np.asarray(inst.cost, dtype=float)
    inner = [v for v in range(n) if v not in (s, t)]
    best = np.inf
    for perm in itertools.permutations(inner):
        order = (s, *perm) + ((t,) if t != s else ())
        cost = sum(c[u, v] for u, v in zip(order, order[1:]))
        if s == t and n > 1:
            cost += c[order[-1], s]
        best = min(best, cost)
    return float(best)


def enumerate_tjoin_cuts(y: FractionalEdgeVector, T: Iterable[int], scale=1.0, cap: int = TJOIN_CAP, tol: float = 1e-7):
    """Check ``scale * y(delta(U)) >= 1 - tol`` for every ``U`` with ``|U & T|`` odd.

    Returns ``None`` when all hold, else ``(worst_side_mask, scaled_value)``.
    """
    n = y.n
    if n > cap:
        raise OracleCapError(f"n={n} exceeds T-join enumeration cap {cap}")
    tmask = 0
    for v in T:
        tmask |= 1 << v
    if not tmask or n < 2:
        return None
    # U and its complement give the same cut; fix vertex 0 inside U
    sides = np.arange(1, 1 << n, 2, dtype=np.int64)
    sides = sides[sides != (1 << n) - 1]
    bits = ((sides[:, None] >> np.arange(n)) & 1).astype(bool)
    odd = (bits & (((tmask >> np.arange(n)) & 1).astype(bool))).sum(axis=1) % 2 == 1
    vals = np.zeros(len(sides))
    for (u, v), val in y.items():
        vals += float(val) * (bits[:, u] != bits[:, v])
    vals *= float(scale)
    vals[~odd] = np.inf
    i = int(np.argmin(vals))
    if vals[i] >= 1 - tol:
        return None
    return int(sides[i]), float(vals[i])


def brute_force_matching(T: Iterable[int], cost, cap: int = MATCHING_CAP) -> JoinEdges:
    verts = tuple(sorted(T))
    if len(verts) % 2:
        raise ValueError("odd number of vertices")
    if len(verts) > cap:
        raise OracleCapError(f"|T|={len(verts)} exceeds matching cap {cap}")
    c = [[float(cost[u, v]) for v in range(len(cost))] for u in range(len(cost))]

    @lru_cache(maxsize=None)
    def solve(rest: tuple) -> tuple[float, tuple]:
        if not rest:
            return 0.0, ()
        a = rest[0]
        best = (np.inf, ())
        for i in range(1, len(rest)):
            b = rest[i]
            sub_cost, sub_pairs = solve(rest[1:i] + rest[i + 1 :])
            total = c[a][b] + sub_cost
            if total < best[0]:
                best = (total, ((a, b),) + sub_pairs)
        return best

    total, pairs = solve(verts)
    return JoinEdges(tuple(sorted(pairs)), float(total))


# ------------------------------------------------------------------ mirror


def _mirror_lp(call: DpCall, c: np.ndarray):
    w = [v for v in range(call.n) if (call.window >> v) & 1]
    cols = [(a, b) for i, a in enumerate(w) for b in w[i + 1 :]]
    n = call.n
    if len(w) <= 1:
        return FractionalEdgeVector(n), 0.0
    rows, rhs = [], []

    def row(side: int) -> list[float]:
        return [1.0 if ((side >> a) & 1) != ((side >> b) & 1) else 0.0 for a, b in cols]

    sp, tp = call.s_prime, call.t_prime
    for r in range(1, len(w) + 1):
        for X in itertools.combinations(w, r):
            side = sum(1 << v for v in X)
            has_s, has_t = (side >> sp) & 1, (side >> tp) & 1
            if not has_s and not has_t:
                rows.append(row(side))
                rhs.append(2.0)
            elif has_s and not has_t:
                rows.append(row(side))
                rhs.append(1.0)
    for u in call.busy:
        rows.append(row(u))
        rhs.append(3.0)
    res = linprog(
        [c[a, b] for a, b in cols],
        A_ub=-np.array(rows),
        b_ub=-np.array(rhs),
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"mirror LP failed: {res.message}")
    x = {e: float(v) for e, v in zip(cols, res.x) if v > 1e-12}
    return FractionalEdgeVector(n, x), float(res.fun)


def _prim(window: int, c: np.ndarray) -> frozenset:
    verts = [v for v in range(len(c)) if (window >> v) & 1]
    if len(verts) <= 1:
        return frozenset()
    inside = {verts[0]}
    tree = []
    while len(inside) < len(verts):
        best = None
        for u in inside:
            for v in verts:
                if v not in inside and (best is None or c[u, v] < best[0]):
                    best = (c[u, v], u, v)
        inside.add(best[2])
        tree.append(edge(best[1], best[2]))
    return frozenset(tree)


def mirror_dp(
    call: DpCall,
    inst: MetricInstance,
    sched: LambdaSchedule,
    cap: int = MIRROR_CAP,
    narrow_eps: float = 1e-9,
    lp=None,
    trace: list | None = None,
) -> DpResult:
    """Naive re-implementation of the recursive DP for differential testing.

    Dense LP with every cut row, narrow cuts by enumeration, the digraph built
    from its definition, every source-sink path enumerated, no memoization.

    ``lp(call) -> (x, value)`` replaces the built-in LP; cut LPs with tied
    costs have several optimal vertices, and pinning the vertex lets the rest
    of the recursion be compared entry by entry. ``trace`` collects
    ``(call, x, value)`` for every LP solved.
    """
    if bin(call.window).count("1") > cap:
        raise OracleCapError(f"window of {bin(call.window).count('1')} vertices exceeds mirror cap {cap}")
    if sched.k > 2:
        raise OracleCapError("mirror_dp supports k <= 2")
    c = np.asarray(inst.cost, dtype=float)
    n = inst.n
    x, value = lp(call) if lp is not None else _mirror_lp(call, c)
    if trace is not None:
        trace.append((call, x, value))
    full = (1 << n) - 1
    w = [v for v in range(n) if (call.window >> v) & 1]

    if call.level == sched.k:
        S = _prim(call.window, c)
        return DpResult(S, x, CutChain(), value, x.cost(c), sum(c[a, b] for a, b in S))

    sp, tp = call.s_prime, call.t_prime
    narrow = []
    if sp != tp:
        others = [v for v in w if v not in (sp, tp)]
        for r in range(len(others) + 1):
            for X in itertools.combinations(others, r):
                side = call.w_s | (1 << sp) | sum(1 << v for v in X)
                if x.cut_value(side) < 2 - narrow_eps:
                    narrow.append(side)

    nodes = [AuxNode(call.w_s, None, sp)]
    for U in narrow:
        for v in w:
            for u2 in w:
                if (U >> v) & 1 and not (U >> u2) & 1:
                    nodes.append(AuxNode(U, v, u2))
    nodes.append(AuxNode(full & ~call.w_t, tp, None))
    source, sink = nodes[0], nodes[-1]

    lam_next = float(sched.lam(call.level + 1))
    lam_l = float(sched.lam(call.level))
    arcs = {}
    for a in nodes:
        for b in nodes:
            if a == sink or b == source or a.U == b.U or a.U & b.U != a.U:
                continue
            diff = b.U & ~a.U
            if (diff >> a.w) & 1 and (diff >> b.v) & 1:
                busy = [
                    U
                    for U in list(narrow) + list(call.busy)
                    if (a.U | (1 << a.w)) & ~U == 0 and U & ~(b.U & ~(1 << b.v)) == 0
                ]
                sub_call = DpCall(n, a.U, full & ~b.U, a.w, b.v, tuple(busy), call.level + 1)
                sub = mirror_dp(sub_call, inst, sched, cap, narrow_eps, lp, trace)
                d = sub.s_cost + lam_next * sub.y_cost
                if b.w is not None:
                    d += (1 + lam_next) * c[b.v, b.w]
                arcs.setdefault(a, []).append((b, d, sub))

    best = None

    def walk(node, path, cost, subs):
        nonlocal best
        if node == sink:
            key = (cost, len(path) - 1, tuple(p.encode() for p in path))
            if best is None or key < best[0]:
                best = (key, list(path), list(subs))
            return
        for b, d, sub in arcs.get(node, ()):
            path.append(b)
            subs.append(sub)
            walk(b, path, cost + d, subs)
            path.pop()
            subs.pop()

    walk(source, [source], 0.0, [])
    _, path, subs = best
    S = set()
    y_prime = FractionalEdgeVector(n)
    L = set()
    for sub in subs:
        S |= sub.S
        y_prime = y_prime + sub.y
        L |= set(sub.L.cuts)
    for node in path[1:-1]:
        S.add(edge(node.v, node.w))
        y_prime = y_prime + FractionalEdgeVector.incidence(n, [(node.v, node.w)])
        L.add(node.U)
    y = x.scale((lam_l - lam_next) / lam_l) + y_prime.scale(lam_next / lam_l)
    chain = CutChain(tuple(sorted(L, key=lambda u: (bin(u).count("1"), u))))
    return DpResult(frozenset(S), y, chain, value, y.cost(c), sum(c[a, b] for a, b in S))
