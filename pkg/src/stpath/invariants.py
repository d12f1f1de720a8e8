"""Runtime invariant checks on every computed DP call.

:class:`InvariantMonitor` is a DP observer: it receives each
:class:`~stpath.dp.DpRecord` and runs the structural checks on it, keeping
pass/fail counts per property together with the first few witnesses.
Exhaustive cut enumerations are skipped above ``enum_cap`` window vertices.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .cuts import EPS_NARROW, verify_chain
from .edges import FractionalEdgeVector, crosses, edge, members, popcount
from .dp import lambda_schedule
from .lp import DpCall, find_violations
from .oracle import TJOIN_CAP, enumerate_tjoin_cuts
from .parity import run_rdp

__all__ = [
    "Violation",
    "InvariantMonitor",
    "CHECKS",
    "window_cut_values",
    "check_record",
    "VerifyOutcome",
    "verify_instance",
    "zero_largest_entry",
]

EPS_FLOW = 1e-9

# short name -> description printed by the verify command
CHECKS = {
    "narrow_chain": "narrow cuts of x* are nested and none is missed",
    "l_chain": "L is a chain of (W_s+s')-(W_t+t') cuts",
    "lonely_edges": "no lonely edge f_j lies in a cut of a sub-chain on the path",
    "spanning_tree": "(W, S) is a spanning tree and |S & C| = 1 for every C in L",
    "path_length": "d(P) = c(S) + lambda_{l+1} c(y')",
    "unit_cuts": "supp(y') in E[W] and y'(delta(V_j)) = 1",
    "cut_feasible": "y and y' satisfy every cut constraint of the window LP",
    "busy_cuts": "y(C) >= 3 on every busy cut",
    "cheap_cuts": "every s'-t' cut with y(C) < 2 - 1/(Lambda lambda_l) is in L",
    "tjoin": "lambda_1 y* lies in the T-join polyhedron",
}


@dataclass
class Violation:
    check: str
    level: int
    message: str
    witness: list | None = None

    def __str__(self) -> str:
        w = f" witness={self.witness}" if self.witness is not None else ""
        return f"{self.check} (level {self.level}): {self.message}{w}"


def _is_exact(*vals) -> bool:
    return any(isinstance(v, Fraction) for v in vals)


def window_cut_values(vec: FractionalEdgeVector, base: int, free: list[int], exact: bool = False):
    """``vec(delta(base | X))`` for every subset ``X`` of ``free``.

    Returns ``(sides, values)``; ``sides`` are bitmasks over all vertices.
    """
    k = len(free)
    idx = np.arange(1 << k, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(k)) & 1).astype(np.int64)
    sides = base + (bits * (np.int64(1) << np.array(free, dtype=np.int64))).sum(axis=1)
    if exact:
        return sides, [vec.cut_value(int(u)) for u in sides]
    n = vec.n
    member = ((sides[:, None] >> np.arange(n)) & 1).astype(bool)
    values = np.zeros(len(sides))
    for (u, v), val in vec.items():
        values += float(val) * (member[:, u] != member[:, v])
    return sides, values


@dataclass
class InvariantMonitor:
    """Observer that checks every DP record; see :data:`CHECKS`."""

    enum_cap: int = 10
    tol: float = 1e-7
    eq_tol: float = 1e-9
    keep: int = 5
    passed: dict = field(default_factory=lambda: defaultdict(int))
    failed: dict = field(default_factory=lambda: defaultdict(int))
    violations: list = field(default_factory=list)
    Lambda: int | None = None
    records: int = 0

    def __call__(self, rec) -> None:
        self.records += 1
        for name, viols in check_record(rec, self.Lambda, self.enum_cap, self.tol, self.eq_tol).items():
            if viols:
                self.failed[name] += 1
                room = self.keep - sum(1 for v in self.violations if v.check == name)
                self.violations.extend(viols[: max(room, 0)])
            else:
                self.passed[name] += 1

    def add(self, name: str, viols: list) -> None:
        if viols:
            self.failed[name] += 1
            self.violations.extend(viols[: self.keep])
        else:
            self.passed[name] += 1

    @property
    def ok(self) -> bool:
        return not self.failed

    def summary(self) -> list[tuple[str, int, int]]:
        names = [c for c in CHECKS if c in self.passed or c in self.failed]
        return [(c, self.passed.get(c, 0), self.failed.get(c, 0)) for c in names]


def check_record(rec, Lambda: int | None, enum_cap: int = 10, tol: float = 1e-7, eq_tol: float = 1e-9) -> dict:
    call = rec.call
    res = rec.result
    exact = _is_exact(res.lp_value, res.y_cost)
    if exact:
        tol = eq_tol = 0
    w = call.window
    nw = popcount(w)
    level = call.level
    out: dict[str, list] = {}
    small = nw <= enum_cap

    # ---- spanning tree of W, one tree edge per chain cut
    v_tree = []
    verts = members(w)
    if any(not ((w >> a) & 1 and (w >> b) & 1) for a, b in res.S):
        v_tree.append(Violation("spanning_tree", level, "tree edge leaves the window"))
    if len(res.S) != nw - 1:
        v_tree.append(Violation("spanning_tree", level, f"|S| = {len(res.S)} but |W| - 1 = {nw - 1}"))
    else:
        parent = {v: v for v in verts}

        def find(v):
            while parent[v] != v:
                v = parent[v]
            return v

        for a, b in res.S:
            ra, rb = find(a), find(b)
            if ra == rb:
                v_tree.append(Violation("spanning_tree", level, "S contains a cycle", [a, b]))
                break
            parent[ra] = rb
    for U in res.L.cuts:
        k = sum(1 for e in res.S if crosses(e, U))
        if k != 1:
            v_tree.append(Violation("spanning_tree", level, f"|S & delta(U)| = {k}", members(U)))
    out["spanning_tree"] = v_tree

    # ---- L is a chain of s'-t' cuts
    v_chain = []
    if not verify_chain(res.L):
        v_chain.append(Violation("l_chain", level, "L is not nested", [members(u) for u in res.L.cuts]))
    for U in res.L.cuts:
        if not call.is_st_side(U):
            v_chain.append(Violation("l_chain", level, "cut is not a (W_s+s')-(W_t+t') cut", members(U)))
    out["l_chain"] = v_chain

    # ---- busy cuts carry y >= 3
    v_busy = []
    for U in call.busy:
        val = res.y.cut_value(U)
        if val < 3 - tol:
            v_busy.append(Violation("busy_cuts", level, f"y(C) = {float(val):.12g} < 3", members(U)))
    out["busy_cuts"] = v_busy

    # ---- cut feasibility of y (and y' when present), then cheap cuts of y
    vectors = [("y", res.y)] + ([("y'", rec.y_prime)] if rec.y_prime is not None else [])
    v_feas = []
    for label, vec in vectors:
        if vec.support_mask() & ~w:
            v_feas.append(Violation("cut_feasible", level, f"support of {label} leaves E[W]"))
    if small:
        sp, tp = call.s_prime, call.t_prime
        free = [v for v in verts if v not in (sp, tp)]
        for label, vec in vectors:
            # U avoiding both ends needs 2
            sides, vals = window_cut_values(vec, 0, free, exact)
            for u, val in zip(sides[1:], vals[1:]):
                if val < 2 - tol:
                    v_feas.append(Violation("cut_feasible", level, f"{label}(delta(U)) = {float(val):.12g} < 2", members(int(u))))
                    break
            if sp != tp:
                sides, vals = window_cut_values(vec, 1 << sp, free, exact)
                for u, val in zip(sides, vals):
                    if val < 1 - tol:
                        v_feas.append(Violation("cut_feasible", level, f"{label}(delta(U)) = {float(val):.12g} < 1", members(int(u))))
                        break
    else:
        for label, vec in vectors:
            plain = DpCall(call.n, call.w_s, call.w_t, call.s_prime, call.t_prime, (), call.level)
            for side, rhs, viol in find_violations(vec, plain, exact, tol):
                v_feas.append(Violation("cut_feasible", level, f"{label} violates a rhs-{rhs} cut by {float(viol):.3g}", members(side)))
    out["cut_feasible"] = v_feas

    if Lambda is not None and small and call.s_prime != call.t_prime:
        v_cheap = []
        lam_l = rec.lam_l
        bound = 2 - Fraction(1) / (Lambda * lam_l)
        thr = bound if exact else float(bound) - tol
        free = [v for v in verts if v not in (call.s_prime, call.t_prime)]
        sides, vals = window_cut_values(res.y, call.w_s | (1 << call.s_prime), free, exact)
        chain = set(res.L.cuts)
        for u, val in zip(sides, vals):
            if val < thr and int(u) not in chain:
                v_cheap.append(Violation("cheap_cuts", level, f"y(C) = {float(val):.12g} below {float(bound):.6g} but C not in L", members(int(u))))
        out["cheap_cuts"] = v_cheap

    # ---- narrow cuts of x* are nested and none is missed
    if rec.narrow is not None:
        v_narrow = []
        if not verify_chain(rec.narrow):
            v_narrow.append(Violation("narrow_chain", level, "narrow cuts cross", rec.narrow.as_lists()))
        x = rec.lp.x_star
        lp_exact = _is_exact(rec.lp.value)
        for U in rec.narrow.cuts:
            if not call.is_st_side(U):
                v_narrow.append(Violation("narrow_chain", level, "narrow cut is not an s'-t' cut", members(U)))
            val = x.cut_value(U)
            if not val < (2 if lp_exact else 2 - EPS_NARROW):
                v_narrow.append(Violation("narrow_chain", level, f"reported narrow cut has value {float(val)}", members(U)))
        if small and call.s_prime != call.t_prime:
            free = [v for v in verts if v not in (call.s_prime, call.t_prime)]
            sides, vals = window_cut_values(x, call.w_s | (1 << call.s_prime), free, lp_exact)
            thr = 2 if lp_exact else 2 - EPS_NARROW - EPS_FLOW
            found = set(rec.narrow.cuts)
            for u, val in zip(sides, vals):
                if val < thr and int(u) not in found:
                    v_narrow.append(Violation("narrow_chain", level, f"missed narrow cut of value {float(val):.12g}", members(int(u))))
        out["narrow_chain"] = v_narrow

    if rec.y_prime is not None:
        # ---- path length equals c(S) + lambda_{l+1} c(y')
        lam_next = rec.lam_next if exact else float(rec.lam_next)
        rhs = res.s_cost + lam_next * rec.y_prime_cost
        d = rec.d_path
        if exact:
            ok_len = d == rhs
        else:
            ok_len = math.isclose(float(d), float(rhs), rel_tol=eq_tol, abs_tol=1e-12)
        out["path_length"] = [] if ok_len else [Violation("path_length", level, f"d(P) = {float(d)!r} != {float(rhs)!r}")]

        # ---- y' is unit on every V_j cut
        v_unit = []
        if rec.y_prime.support_mask() & ~w:
            v_unit.append(Violation("unit_cuts", level, "support of y' leaves E[W]"))
        for node in rec.path[1:-1]:
            val = rec.y_prime.cut_value(node.U)
            if (val != 1) if exact else abs(float(val) - 1) > eq_tol:
                v_unit.append(Violation("unit_cuts", level, f"y'(delta(V_j)) = {float(val)!r}", members(node.U)))
        out["unit_cuts"] = v_unit

        # ---- lonely edges avoid the sub-chains
        v_lonely = []
        for node in rec.path[1:-1]:
            f = edge(node.v, node.w)
            for sub in rec.sub_results:
                for U in sub.L.cuts:
                    if crosses(f, U):
                        v_lonely.append(Violation("lonely_edges", level, f"lonely edge {f} crosses a sub-chain cut", members(U)))
        out["lonely_edges"] = v_lonely
    return out


@dataclass
class VerifyOutcome:
    monitor: InvariantMonitor
    run: object  # parity.RdpRun

    @property
    def ok(self) -> bool:
        return self.monitor.ok


def zero_largest_entry(rec):
    """Fault injection: copy of ``rec`` whose ``y`` loses its largest entry.

    Only the copy handed to the checks is damaged; the solver keeps the
    original, so the rest of the run is unaffected.
    """
    y = rec.result.y
    if not len(y):
        return rec
    e = max(y, key=lambda k: (y[k], k))
    bad = FractionalEdgeVector(y.n, {k: v for k, v in y.items() if k != e})
    return replace(rec, result=replace(rec.result, y=bad))


def verify_instance(inst, epsilon=0.25, exact: bool = False, enum_cap: int = 10, corrupt=None, tjoin_cap: int = TJOIN_CAP) -> VerifyOutcome:
    """Run the DP with every record checked, then the T-join check on ``y*``.

    ``corrupt`` maps a record to the record the checks see; tests use it to
    confirm that a damaged vector is reported with a witness.
    """
    sched = lambda_schedule(epsilon)
    monitor = InvariantMonitor(enum_cap=enum_cap, Lambda=sched.Lambda)

    def observe(rec):
        monitor(corrupt(rec) if corrupt is not None else rec)

    run = run_rdp(inst, epsilon, exact=exact, observer=observe)
    if inst.n <= tjoin_cap:
        hit = enumerate_tjoin_cuts(run.top.y, run.T, sched.lambdas[0])
        v_tjoin = [] if hit is None else [Violation("tjoin", 0, f"lambda_1 y*(delta(U)) = {hit[1]:.12g} < 1", members(hit[0]))]
        monitor.add("tjoin", v_tjoin)
    return VerifyOutcome(monitor, run)
