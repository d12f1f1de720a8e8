"""Maximum flow / minimum cut on small dense undirected graphs (Edmonds-Karp)."""

from __future__ import annotations

from collections import deque

import numpy as np

__all__ = ["max_flow_min_cut", "min_cut_between"]


def min_cut_between(cap, src_mask: int, sink_mask: int, tol: float = 0.0):
    """Max flow from the vertex set ``src_mask`` to ``sink_mask`` (each contracted to one node).

    ``cap`` is a symmetric matrix (nested lists or ndarray, float or Fraction).
    Returns ``(value, side)`` where ``side`` is the bitmask of vertices reachable
    from the sources in the final residual network: the minimal source side of
    a minimum cut. Residual arcs of capacity ``<= tol`` are treated as saturated.
    """
    if src_mask & sink_mask:
        raise ValueError("source and sink sets intersect")
    if isinstance(cap, np.ndarray):
        cap = cap.tolist()
    n = len(cap)
    res = [row[:] for row in cap]
    adj = [[v for v in range(n) if v != u and (cap[u][v] != 0 or cap[v][u] != 0)] for u in range(n)]
    sources = [v for v in range(n) if (src_mask >> v) & 1]
    flow = 0

    while True:
        parent = [-1] * n
        seen = src_mask
        queue = deque(sources)
        hit = -1
        while queue and hit < 0:
            u = queue.popleft()
            for v in adj[u]:
                if (seen >> v) & 1 or res[u][v] <= tol:
                    continue
                seen |= 1 << v
                parent[v] = u
                if (sink_mask >> v) & 1:
                    hit = v
                    break
                queue.append(v)
        if hit < 0:
            return flow, seen
        # bottleneck along the path back to a source
        bottleneck = None
        v = hit
        while parent[v] >= 0:
            u = parent[v]
            if bottleneck is None or res[u][v] < bottleneck:
                bottleneck = res[u][v]
            v = u
        v = hit
        while parent[v] >= 0:
            u = parent[v]
            res[u][v] -= bottleneck
            res[v][u] += bottleneck
            v = u
        flow += bottleneck


def max_flow_min_cut(capacities, source: int, sink: int, tol: float = 0.0):
    """Maximum ``source``-``sink`` flow and the residual-reachable source side.

    The returned side's cut capacity equals the flow value (checked).
    """
    if source == sink:
        raise ValueError("source and sink must differ")
    value, side = min_cut_between(capacities, 1 << source, 1 << sink, tol)
    cap = capacities.tolist() if isinstance(capacities, np.ndarray) else capacities
    n = len(cap)
    cut = sum(
        (cap[u][v] for u in range(n) if (side >> u) & 1 for v in range(n) if not (side >> v) & 1),
        0,
    )
    slack = max(abs(value), 1) * 1e-9 if tol else 0
    assert abs(cut - value) <= slack, f"max-flow {value} != cut capacity {cut}"
    return value, side
