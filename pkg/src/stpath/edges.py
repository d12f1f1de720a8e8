"""Vertex-set bitmasks and sparse fractional edge vectors.

Vertex sets are Python ints used as bitsets over ``0..n-1``; edges are
ordered pairs ``(i, j)`` with ``i < j``.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "bit",
    "mask_of",
    "members",
    "popcount",
    "crosses",
    "edge",
    "edges_within",
    "FractionalEdgeVector",
]


def bit(v: int) -> int:
    return 1 << v


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def members(mask: int) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def crosses(e: tuple[int, int], mask: int) -> bool:
    """True iff edge ``e`` has exactly one endpoint in ``mask``."""
    return bool((mask >> e[0]) & 1) != bool((mask >> e[1]) & 1)


def edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def edges_within(mask: int) -> list[tuple[int, int]]:
    vs = members(mask)
    return [(a, b) for i, a in enumerate(vs) for b in vs[i + 1 :]]


class FractionalEdgeVector(Mapping):
    """Sparse nonnegative vector indexed by edges of the complete graph on ``n`` vertices.

    Values may be floats or Fractions; zero entries are not stored.
    """

    __slots__ = ("n", "_data")

    def __init__(self, n: int, entries: Mapping[tuple[int, int], object] | Iterable = ()):
        self.n = n
        data = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for (u, v), val in items:
            if val == 0:
                continue
            if val < 0:
                raise ValueError(f"negative entry {val} on edge {(u, v)}")
            e = edge(u, v)
            data[e] = data.get(e, 0) + val
        self._data = data

    @classmethod
    def incidence(cls, n: int, edges: Iterable[tuple[int, int]]) -> "FractionalEdgeVector":
        data: dict = {}
        for u, v in edges:
            e = edge(u, v)
            data[e] = data.get(e, 0) + 1
        return cls(n, data)

    def __getitem__(self, e):
        return self._data.get(edge(*e), 0)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __repr__(self) -> str:
        body = ", ".join(f"{e}: {v}" for e, v in sorted(self._data.items()))
        return f"FractionalEdgeVector(n={self.n}, {{{body}}})"

    def __add__(self, other: "FractionalEdgeVector") -> "FractionalEdgeVector":
        data = dict(self._data)
        for e, v in other._data.items():
            data[e] = data.get(e, 0) + v
        return FractionalEdgeVector(self.n, data)

    def scale(self, factor) -> "FractionalEdgeVector":
        return FractionalEdgeVector(self.n, {e: v * factor for e, v in self._data.items()})

    def support_mask(self) -> int:
        m = 0
        for u, v in self._data:
            m |= (1 << u) | (1 << v)
        return m

    def cut_value(self, mask: int):
        total = 0
        for (u, v), val in self._data.items():
            if ((mask >> u) & 1) != ((mask >> v) & 1):
                total += val
        return total

    def cost(self, cost: np.ndarray):
        total = 0
        for (u, v), val in self._data.items():
            total += cost[u, v] * val
        return total

    def to_dense(self, dtype=float) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=dtype)
        if dtype == object:
            out[:] = 0
        for (u, v), val in self._data.items():
            out[u, v] = val
            out[v, u] = val
        return out

    def map_values(self, fn) -> "FractionalEdgeVector":
        return FractionalEdgeVector(self.n, {e: fn(v) for e, v in self._data.items()})

    def to_dict(self) -> dict:
        return {f"{u},{v}": float(val) for (u, v), val in sorted(self._data.items())}
