"""Cut values and the chain of narrow cuts of a cut-LP solution."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .edges import FractionalEdgeVector, bit, members, popcount
from .flow import min_cut_between
from .lp import FLOW_TOL, DpCall

__all__ = [
    "EPS_NARROW",
    "CutChain",
    "ChainViolationError",
    "cut_value",
    "narrow_cuts",
    "verify_chain",
]

log = logging.getLogger(__name__)

EPS_NARROW = 1e-9


class ChainViolationError(RuntimeError):
    def __init__(self, a: int, b: int):
        self.pair = (a, b)
        super().__init__(f"narrow cuts {members(a)} and {members(b)} cross")


@dataclass(frozen=True)
class CutChain:
    """Strictly nested cut sides, smallest first, with optional attached values."""

    cuts: tuple[int, ...] = ()
    values: tuple = ()

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)

    def __contains__(self, mask) -> bool:
        return mask in self.cuts

    def as_lists(self) -> list[list[int]]:
        return [members(u) for u in self.cuts]


def cut_value(x: FractionalEdgeVector, side: int):
    return x.cut_value(side)


def verify_chain(chain: CutChain | Sequence[int]) -> bool:
    cuts = list(chain.cuts if isinstance(chain, CutChain) else chain)
    for a, b in zip(cuts, cuts[1:]):
        if a & b != a or a == b:
            return False
    return True


def narrow_cuts(x: FractionalEdgeVector, call: DpCall, exact: bool = False, eps: float = EPS_NARROW) -> CutChain:
    """All ``(W_s+s')``-``(W_t+t')`` cuts with ``x``-value below ``2 - eps``.

    Runs a minimum cut for every vertex pair of the window on the support
    graph of ``x`` (which lives on ``E[W]``), keeps the cheap ones that separate
    ``s'`` from ``t'`` and orients them to contain ``s'``.
    """
    if exact:
        eps = 0
    threshold = 2 - eps
    w = call.window
    sp, tp = call.s_prime, call.t_prime
    if sp == tp or popcount(w) < 2:
        return CutChain()
    zero = Fraction(0) if exact else 0.0
    cap = [[zero] * x.n for _ in range(x.n)]
    for (u, v), val in x.items():
        cap[u][v] = val
        cap[v][u] = val
    tol = 0 if exact else FLOW_TOL

    found: dict[int, object] = {}
    verts = members(w)
    for i, a in enumerate(verts):
        for b in verts[i + 1 :]:
            value, side = min_cut_between(cap, bit(a), bit(b), tol)
            if not value < threshold:
                continue
            side &= w
            if (side >> sp) & 1 == (side >> tp) & 1:
                log.warning("cut %s of value %s does not separate s' from t'; discarded", members(side), value)
                continue
            if not (side >> sp) & 1:
                side = w & ~side
            found.setdefault(call.w_s | side, value)

    ordered = sorted(found, key=lambda u: (popcount(u), u))
    for a, b in zip(ordered, ordered[1:]):
        if a & b != a:
            raise ChainViolationError(a, b)
    # exact re-evaluation so the attached values do not depend on flow round-off
    return CutChain(tuple(ordered), tuple(x.cut_value(u) for u in ordered))
