"""Dense simplex for covering LPs ``min c.x  s.t.  x(delta(U)) >= rhs,  x >= 0``.

The dual ``max b.u  s.t.  A^T u <= c,  u >= 0`` starts from the all-slack basis
(feasible because ``c >= 0``), so no phase one is needed. Primal values are read
off the reduced costs of the dual slacks. Bland's rule fixes the pivot order,
which keeps the result deterministic and rules out cycling. The same code runs
on float64 arrays or on object arrays of Fractions (exact mode).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = ["LpSolution", "LpInfeasibleError", "LpNumericalError", "lp_optimize"]

PIVOT_TOL = 1e-11
MAX_PIVOTS = 20000


class LpInfeasibleError(RuntimeError):
    pass


class LpNumericalError(RuntimeError):
    pass


@dataclass
class LpSolution:
    x: dict  # edge -> value (zeros dropped)
    value: object
    duals: list  # one per row
    pivots: int


def lp_optimize(
    columns: Sequence[tuple[int, int]],
    rows: Sequence[tuple[int, object]],
    objective: Sequence,
    exact: bool = False,
) -> LpSolution:
    """Optimal solution of the restricted cut LP.

    ``columns`` are edges, ``rows`` are ``(side_mask, rhs)`` pairs meaning
    ``x(delta(side)) >= rhs``, and ``objective[i]`` is the cost of ``columns[i]``.
    """
    ne, nr = len(columns), len(rows)
    zero = Fraction(0) if exact else 0.0
    if nr == 0:
        return LpSolution({}, zero, [], 0)
    if any(c < 0 for c in objective):
        raise ValueError("objective must be nonnegative")

    dtype = object if exact else float
    tol = 0 if exact else PIVOT_TOL
    T = np.zeros((ne + 1, nr + ne + 1), dtype=dtype)
    one = Fraction(1) if exact else 1.0
    if exact:
        T[:] = Fraction(0)
    for k, (side, rhs) in enumerate(rows):
        for i, (u, v) in enumerate(columns):
            if ((side >> u) & 1) != ((side >> v) & 1):
                T[i, k] = one
        T[ne, k] = -(Fraction(rhs) if exact else float(rhs))
    for i in range(ne):
        T[i, nr + i] = one
        T[i, -1] = Fraction(objective[i]) if exact else float(objective[i])
    basis = list(range(nr, nr + ne))

    pivots = 0
    obj = T[ne]
    while True:
        entering = -1
        for j in range(nr + ne):
            if obj[j] < -tol:
                entering = j
                break
        if entering < 0:
            break
        col = T[:ne, entering]
        best = None
        leave = -1
        for i in range(ne):
            a = col[i]
            if a > tol:
                ratio = T[i, -1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            raise LpInfeasibleError("cut LP infeasible: a row has no crossing column")
        prow = T[leave] / T[leave, entering]
        T -= np.outer(T[:, entering], prow)
        T[leave] = prow
        basis[leave] = entering
        pivots += 1
        if pivots > MAX_PIVOTS:
            raise LpNumericalError("pivot limit exceeded")

    x = {}
    for i, e in enumerate(columns):
        val = T[ne, nr + i]
        if not exact:
            val = float(val)
            if val < 1e-12:
                if val < -1e-7:
                    raise LpNumericalError(f"negative primal value {val} on {e}")
                continue
        elif val == 0:
            continue
        x[e] = val
    duals = [zero] * nr
    for i, b in enumerate(basis):
        if b < nr:
            duals[b] = T[i, -1]
    value = T[ne, -1]
    if not exact:
        value = float(value)
        # cheap self-check; the caller escalates to exact mode on failure
        for side, rhs in rows:
            got = sum(val for (u, v), val in x.items() if ((side >> u) & 1) != ((side >> v) & 1))
            if got < float(rhs) - 1e-9:
                raise LpNumericalError(f"row {side:#x} >= {rhs} violated: {got}")
        primal = sum(float(objective[i]) * x.get(e, 0.0) for i, e in enumerate(columns))
        if abs(primal - value) > 1e-9 * max(1.0, abs(value)):
            raise LpNumericalError(f"primal {primal} and dual {value} objectives disagree")
    return LpSolution(x, value, duals, pivots)
