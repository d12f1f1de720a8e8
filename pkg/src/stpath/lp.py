"""Sub-instance cut LP, solved by row generation with a min-cut separation oracle.

For a window ``W = V - (W_s | W_t)`` with endpoints ``s'``, ``t'`` and busy cuts
``B`` the LP is::

    min c(x)
    x(delta(U)) >= 2   for nonempty U inside W - {s', t'}
    x(delta(U)) >= 1   for {s'} <= U <= W - {t'}
    x(C)        >= 3   for C in B
    x >= 0, supported on E[W]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .edges import FractionalEdgeVector, bit, edges_within, members, popcount
from .flow import max_flow_min_cut, min_cut_between
from .instance import MetricInstance
from .simplex import LpInfeasibleError, LpNumericalError, lp_optimize

__all__ = [
    "DpCall",
    "LpOutcome",
    "SolverStats",
    "EPS_FEAS",
    "separate",
    "find_violations",
    "solve_sub_lp",
    "lp_optimize",
    "max_flow_min_cut",
    "LpInfeasibleError",
    "LpNumericalError",
    "LpIterationError",
]

log = logging.getLogger(__name__)

EPS_FEAS = 1e-9
MAX_ROUNDS = 500
FLOW_TOL = 1e-12


class LpIterationError(RuntimeError):
    pass


@dataclass
class SolverStats:
    lp_solves: int = 0
    separation_rounds: int = 0
    exact_retries: int = 0
    dp_calls: int = 0
    memo_hits: int = 0
    arcs: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _cut_key(mask: int) -> tuple[int, int]:
    return (popcount(mask), mask)


@dataclass(frozen=True)
class DpCall:
    """Input of one dynamic-programming call.

    ``w_s``/``w_t`` are vertex bitmasks, ``busy`` holds the s-sides of the busy
    cuts (each containing ``w_s | {s'}`` and avoiding ``w_t | {t'}``).
    """

    n: int
    w_s: int
    w_t: int
    s_prime: int
    t_prime: int
    busy: tuple[int, ...] = ()
    level: int = 1

    def __post_init__(self):
        object.__setattr__(self, "busy", tuple(sorted(set(self.busy), key=_cut_key)))

    @classmethod
    def top(cls, inst: MetricInstance) -> "DpCall":
        return cls(inst.n, 0, 0, inst.s, inst.t, (), 1)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def window(self) -> int:
        return self.full & ~(self.w_s | self.w_t)

    @property
    def source_side(self) -> int:
        return self.w_s | bit(self.s_prime)

    @property
    def sink_side(self) -> int:
        return self.w_t | bit(self.t_prime)

    def key(self) -> tuple:
        return (self.w_s, self.s_prime, self.w_t, self.t_prime, self.busy, self.level)

    def is_st_side(self, mask: int) -> bool:
        """``mask`` contains ``W_s + s'`` and avoids ``W_t + t'``."""
        return mask & self.source_side == self.source_side and not mask & self.sink_side

    def validate(self, k: int | None = None) -> None:
        if self.w_s & self.w_t:
            raise ValueError("W_s and W_t intersect")
        w = self.window
        if not (w >> self.s_prime) & 1 or not (w >> self.t_prime) & 1:
            raise ValueError("s' and t' must lie in the window")
        for u in self.busy:
            if not self.is_st_side(u):
                raise ValueError(f"busy cut {members(u)} is not a (W_s+s')-(W_t+t') cut")
        if k is not None:
            if not 1 <= self.level <= k:
                raise ValueError(f"level {self.level} outside 1..{k}")
            if len(self.busy) > k * self.n:
                raise ValueError(f"{len(self.busy)} busy cuts exceed k*n = {k * self.n}")


@dataclass
class LpOutcome:
    x_star: FractionalEdgeVector
    value: object
    generated_rows: list = field(default_factory=list)  # (side mask, rhs)
    duals: list = field(default_factory=list)
    iterations: int = 0
    separation_rounds: int = 0
    exact: bool = False


def _capacity_matrix(x: FractionalEdgeVector, exact: bool):
    zero = Fraction(0) if exact else 0.0
    cap = [[zero] * x.n for _ in range(x.n)]
    for (u, v), val in x.items():
        cap[u][v] = val
        cap[v][u] = val
    return cap


def find_violations(x: FractionalEdgeVector, call: DpCall, exact: bool = False, eps: float = EPS_FEAS):
    """Every violated constraint the oracle sees, as ``(side, rhs, violation)``.

    One min ``s'``-``t'`` cut for the rhs-1 family, one min cut from each
    other window vertex to ``{s', t'}`` for the rhs-2 family, and a direct
    evaluation of each busy cut.
    """
    eps = 0 if exact else eps
    tol = 0 if exact else FLOW_TOL
    w = call.window
    sp, tp = call.s_prime, call.t_prime
    found: dict[int, tuple[int, object, object]] = {}

    def note(side, rhs, value):
        viol = rhs - value
        if viol > eps and (side not in found or found[side][2] < viol):
            found[side] = (side, rhs, viol)

    if popcount(w) > 1:
        cap = _capacity_matrix(x, exact)
        if sp != tp:
            value, side = min_cut_between(cap, bit(sp), bit(tp), tol)
            note(call.w_s | (side & w), 1, value)
        ends = bit(sp) | bit(tp)
        for v in members(w & ~ends):
            value, side = min_cut_between(cap, bit(v), ends, tol)
            note(side & w, 2, value)
    for u in call.busy:
        note(u, 3, x.cut_value(u))
    return list(found.values())


def separate(x: FractionalEdgeVector, call: DpCall, exact: bool = False, eps: float = EPS_FEAS):
    """A most violated constraint ``(side, rhs, violation)``, or ``None`` if all hold within ``eps``."""
    viols = find_violations(x, call, exact, eps)
    if not viols:
        return None
    return max(viols, key=lambda r: (r[2], -r[1], -r[0]))


def _initial_rows(call: DpCall) -> list[tuple[int, int]]:
    rows = [(u, 3) for u in call.busy]
    w = call.window
    sp, tp = call.s_prime, call.t_prime
    for v in members(w):
        if v in (sp, tp):
            continue
        rows.append((bit(v), 2))
    if sp != tp:
        rows.append((call.w_s | bit(sp), 1))
        rows.append((call.w_s | (w & ~bit(tp)), 1))
    # a side can come up twice (tiny windows, or a busy cut equal to a singleton); keep the largest rhs
    best: dict[int, int] = {}
    for side, rhs in rows:
        best[side] = max(best.get(side, rhs), rhs)
    return list(best.items())


def solve_sub_lp(
    call: DpCall,
    inst: MetricInstance,
    exact: bool = False,
    stats: SolverStats | None = None,
) -> LpOutcome:
    """Optimum of the sub-instance LP, certified by a final full separation sweep.

    In float mode a numerical failure of the simplex triggers one exact re-solve
    whose solution is converted back to floats.
    """
    if stats is not None:
        stats.lp_solves += 1
    w = call.window
    n = inst.n
    if popcount(w) <= 1:
        zero = Fraction(0) if exact else 0.0
        return LpOutcome(FractionalEdgeVector(n), zero, exact=exact)
    if exact and not inst.exact:
        inst = inst.as_exact()
    try:
        return _row_generation(call, inst, exact, stats)
    except LpNumericalError as exc:
        if exact:
            raise
        log.warning("float LP failed (%s); re-solving exactly", exc)
        if stats is not None:
            stats.exact_retries += 1
        out = _row_generation(call, inst.as_exact(), True, stats)
        return to_float(out)


def to_float(out: LpOutcome) -> LpOutcome:
    return LpOutcome(
        out.x_star.map_values(float),
        float(out.value),
        out.generated_rows,
        [float(d) for d in out.duals],
        out.iterations,
        out.separation_rounds,
        exact=False,
    )


def _row_generation(call: DpCall, inst: MetricInstance, exact: bool, stats: SolverStats | None) -> LpOutcome:
    columns = edges_within(call.window)
    objective = [inst.cost[u, v] for u, v in columns]
    rows = _initial_rows(call)
    present = set(rows)
    pivots = 0
    for rounds in range(MAX_ROUNDS):
        sol = lp_optimize(columns, rows, objective, exact=exact)
        pivots += sol.pivots
        x = FractionalEdgeVector(inst.n, sol.x)
        viols = find_violations(x, call, exact)
        if not viols:
            return LpOutcome(x, sol.value, list(rows), sol.duals, pivots, rounds, exact)
        if stats is not None:
            stats.separation_rounds += 1
        new = [(side, rhs) for side, rhs, _ in viols if (side, rhs) not in present]
        if not new:
            raise LpNumericalError("separation keeps returning rows already in the LP")
        rows.extend(new)
        present.update(new)
    raise LpIterationError(f"row generation did not converge in {MAX_ROUNDS} rounds")
