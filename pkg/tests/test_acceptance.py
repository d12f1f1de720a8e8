"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The expensive runs happen once in session fixtures and are shared.
Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary.
"""

import math
import statistics
import time
from fractions import Fraction

import numpy as np
import pytest

from stpath.dp import lambda_schedule, run_dp
from stpath.instance import FAMILIES, gen_random
from stpath.invariants import verify_instance
from stpath.lp import DpCall, solve_sub_lp
from stpath.oracle import brute_force_matching, held_karp_path, mirror_dp, permutation_optimum
from stpath.parity import christofides_hoogeveen, min_cost_perfect_matching, run_rdp

RESULTS: dict[int, tuple[bool, str]] = {}

TITLES = {
    1: "rdp tour within 1.6 OPT",
    2: "Christofides-Hoogeveen within 5/3 OPT",
    3: "lambda schedule for eps = 0.1",
    4: "spanning tree and one tree edge per chain cut",
    5: "path length equals c(S) + lambda_{l+1} c(y')",
    6: "y' unit on V_j cuts, y feasible, busy cuts >= 3, cheap cuts in L",
    7: "lambda_1 y* in the T-join polyhedron",
    8: "oracle self-consistency",
    9: "narrow cuts form a complete chain",
    10: "top-level LP value below OPT",
    11: "runtime trend and three-level completion",
}

EPS = 0.25
MAIN_NS = range(4, 11)
SEEDS_PER_CELL = 4


def record(criterion: int, ok: bool, detail: str) -> None:
    RESULTS[criterion] = (ok, detail)
    print(f"\n[criterion {criterion:2d}] {'PASS' if ok else 'FAIL'}  {TITLES[criterion]}: {detail}")
    assert ok, detail


class Entry:
    def __init__(self, inst, outcome, opt, ch_cost):
        self.inst = inst
        self.outcome = outcome
        self.run = outcome.run
        self.monitor = outcome.monitor
        self.opt = opt
        self.ch_cost = ch_cost


def _entry(inst, eps=EPS, exact=False):
    outcome = verify_instance(inst, eps, exact=exact, enum_cap=10)
    opt = held_karp_path(inst).opt_cost
    return Entry(inst, outcome, opt, christofides_hoogeveen(inst).cost)


@pytest.fixture(scope="session")
def main_suite():
    """56 instances: n = 4..10, both families, four seeds each."""
    return [
        _entry(gen_random(n, family, 1000 * n + 100 * f + seed))
        for n in MAIN_NS
        for f, family in enumerate(FAMILIES)
        for seed in range(SEEDS_PER_CELL)
    ]


@pytest.fixture(scope="session")
def small_suite():
    """25 seeds with n <= 8 and k = 2, three rational-mode runs and four k = 3 runs."""
    runs = [_entry(gen_random(4 + seed % 5, FAMILIES[seed % 2], 7000 + seed)) for seed in range(25)]
    runs += [_entry(gen_random(n, FAMILIES[n % 2], 7100 + n), exact=True) for n in (4, 5, 6)]
    runs += [_entry(gen_random(n, FAMILIES[n % 2], 7200 + n), eps=0.125) for n in (4, 5, 6, 7)]
    return runs


@pytest.fixture(scope="session")
def large_suite():
    """n = 11 and 12, for the T-join check."""
    return [_entry(gen_random(n, family, 8000 + n)) for n in (11, 12) for family in FAMILIES]


@pytest.fixture(scope="session")
def all_runs(main_suite, small_suite, large_suite):
    return main_suite + small_suite + large_suite


def _checks(entries, name):
    passed = sum(e.monitor.passed.get(name, 0) for e in entries)
    failed = sum(e.monitor.failed.get(name, 0) for e in entries)
    witnesses = [str(v) for e in entries for v in e.monitor.violations if v.check == name][:3]
    return passed, failed, witnesses


def test_rdp_tours_stay_within_one_point_six_of_optimum(main_suite):
    worst = max(e.run.tour.cost / e.opt for e in main_suite)
    bad = [e.inst.name for e in main_suite if e.run.tour.cost > 1.6 * e.opt * (1 + 1e-6)]
    assert all(e.run.schedule.k == 2 and e.run.schedule.lambdas[0] == Fraction(3, 5) for e in main_suite)
    record(1, len(main_suite) >= 50 and not bad,
           f"{len(main_suite)} instances, worst ratio {worst:.6f} (bound 1.6), failures {bad}")


def test_christofides_tours_stay_within_five_thirds_of_optimum(main_suite):
    worst = max(e.ch_cost / e.opt for e in main_suite)
    bad = [e.inst.name for e in main_suite if e.ch_cost > 5 / 3 * e.opt * (1 + 1e-6)]
    record(2, not bad, f"{len(main_suite)} instances, worst ratio {worst:.6f} (bound 5/3), failures {bad}")


def test_schedule_for_one_tenth_has_four_halving_levels():
    sch = lambda_schedule(Fraction(1, 10))
    ok = (
        sch.k == 4
        and sch.Lambda == 29
        and sch.lambdas == (Fraction(15, 29), Fraction(7, 29), Fraction(3, 29), Fraction(1, 29))
        and sch.mixing_coefficients() == (Fraction(8, 29), Fraction(4, 29), Fraction(2, 29), Fraction(1, 29))
        and all(isinstance(v, Fraction) for v in sch.lambdas + sch.mixing_coefficients())
        and lambda_schedule(0.1) == sch.__class__(0.1, 4, 29, sch.lambdas)
    )
    record(3, ok, f"k={sch.k} Lambda={sch.Lambda} lambdas={[str(v) for v in sch.lambdas]} "
                  f"mixing={[str(v) for v in sch.mixing_coefficients()]}")


def test_every_call_returns_a_spanning_tree_crossing_each_chain_cut_once(all_runs):
    passed, failed, wit = _checks(all_runs, "spanning_tree")
    record(4, failed == 0 and passed > 0, f"{passed} recursion nodes checked, {failed} violations {wit}")


def test_chosen_path_length_splits_into_tree_and_vector_cost(all_runs):
    passed, failed, wit = _checks(all_runs, "path_length")
    record(5, failed == 0 and passed > 0, f"{passed} non-leaf nodes checked at 1e-9 relative, {failed} violations {wit}")


def test_parity_vectors_are_feasible_and_cheap_cuts_are_recorded(small_suite):
    k2 = [e for e in small_suite if e.run.schedule.k == 2 and e.inst.n <= 8]
    seeds = {e.inst.name for e in k2}
    details, ok = [], len(seeds) >= 25
    for name in ("unit_cuts", "cut_feasible", "busy_cuts", "cheap_cuts"):
        passed, failed, wit = _checks(k2, name)
        ok &= failed == 0 and passed > 0
        details.append(f"{name} {passed} ok/{failed} bad {wit if wit else ''}".strip())
    record(6, ok, f"{len(seeds)} instances; " + "; ".join(details))


def test_scaled_top_vector_dominates_every_odd_cut(all_runs):
    entries = [e for e in all_runs if e.inst.n <= 12]
    passed, failed, wit = _checks(entries, "tjoin")
    record(7, failed == 0 and passed == len(entries),
           f"{passed} runs up to n={max(e.inst.n for e in entries)} enumerated, {failed} violations {wit}")


def test_oracles_agree_with_naive_references(main_suite):
    # Held-Karp against permutation enumeration
    hk_bad = []
    hk_count = 0
    for n in range(2, 9):
        for family in FAMILIES:
            for seed in range(3):
                inst = gen_random(n, family, 9000 + 10 * n + seed)
                hk_count += 1
                if not math.isclose(held_karp_path(inst).opt_cost, permutation_optimum(inst), rel_tol=1e-12):
                    hk_bad.append(inst.name)
    # blossom matching against brute force, random sets and sets from solver runs
    mt_bad = []
    mt_count = 0
    rng = np.random.default_rng(9500)
    sets = [(e.inst, sorted(e.run.T)) for e in main_suite if len(e.run.T) <= 8]
    for size in (0, 2, 4, 6, 8):
        for seed in range(5):
            inst = gen_random(10, FAMILIES[seed % 2], 9600 + seed)
            sets.append((inst, sorted(rng.choice(10, size, replace=False).tolist())))
    for inst, T in sets:
        mt_count += 1
        a, b = min_cost_perfect_matching(T, inst.cost).cost, brute_force_matching(T, inst.cost).cost
        if not math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12):
            mt_bad.append((inst.name, T))
    # recursive DP against the naive mirror, twice: with its own HiGHS LPs, and
    # with the LP vertex pinned to ours (tied costs give several optimal vertices)
    sch = lambda_schedule(EPS)
    dp_bad, alt_seeds = [], []
    for seed in range(25):
        inst = gen_random(3 + seed % 3, FAMILIES[seed % 2], 9800 + seed)
        ours = run_dp(DpCall.top(inst), inst, sch)
        trace = []
        free = mirror_dp(DpCall.top(inst), inst, sch, trace=trace)
        pinned = mirror_dp(DpCall.top(inst), inst, sch, lp=lambda call: _our_lp(call, inst))
        alternative = any(_differ(x, solve_sub_lp(call, inst).x_star) for call, x, _ in trace)
        if alternative:
            alt_seeds.append(seed)
        if not (_same_result(ours, pinned, vectors=True) and _same_result(ours, free, vectors=not alternative)):
            dp_bad.append(inst.name)
    record(8, not (hk_bad or mt_bad or dp_bad),
           f"Held-Karp {hk_count} instances bad {hk_bad}; matching {mt_count} sets bad {mt_bad}; "
           f"mirror DP 25 seeds bad {dp_bad} (seeds with alternative optimal LP vertices, y compared "
           f"entrywise only with the vertex pinned: {alt_seeds})")


def _our_lp(call, inst):
    out = solve_sub_lp(call, inst)
    return out.x_star, out.value


def _differ(x, z, tol=1e-9):
    return any(abs(float(x.get(e, 0)) - float(z.get(e, 0))) > tol for e in set(x) | set(z))


def _same_result(a, b, vectors):
    same = (
        a.S == b.S
        and a.L.cuts == b.L.cuts
        and abs(float(a.s_cost) - float(b.s_cost)) <= 1e-7
        and abs(float(a.y_cost) - float(b.y_cost)) <= 1e-7
        and abs(float(a.lp_value) - float(b.lp_value)) <= 1e-7
    )
    return same and (not vectors or not _differ(a.y, b.y, 1e-7))


def test_narrow_cuts_are_nested_and_complete(all_runs):
    passed, failed, wit = _checks(all_runs, "narrow_chain")
    record(9, failed == 0 and passed > 0,
           f"{passed} non-leaf calls: narrow cuts nested and complete by enumeration, {failed} violations {wit}")


def test_top_lp_value_never_exceeds_optimum(all_runs):
    bad = [e.inst.name for e in all_runs if e.run.lp_value_top > e.opt * (1 + 1e-9)]
    tightest = max(e.run.lp_value_top / e.opt for e in all_runs)
    record(10, not bad, f"{len(all_runs)} instances, max LP/OPT {tightest:.9f}, failures {bad}")


def _wall(inst, eps):
    start = time.perf_counter()
    run_rdp(inst, eps)
    return time.perf_counter() - start


def test_running_time_grows_polynomially_and_three_levels_finish():
    ns = (6, 8, 10)
    medians = []
    for n in ns:
        times = [_wall(gen_random(n, FAMILIES[s % 2], 9900 + s), EPS) for s in range(3)]
        medians.append(statistics.median(times))
    slope = float(np.polyfit(np.log(ns), np.log(medians), 1)[0])
    # the top call builds O(n^6) arcs, each a sub-call solving an LP; 12 is a generous envelope
    envelope = 12
    k3_times = [_wall(gen_random(7, family, 9950), 0.125) for family in FAMILIES]
    ok = slope <= envelope and max(k3_times) <= 30 * 60 and lambda_schedule(0.125).k == 3
    record(11, ok,
           f"k=2 median seconds {dict(zip(ns, [round(m, 3) for m in medians]))}, fitted exponent {slope:.2f} "
           f"(envelope {envelope}); k=3 n=7 seconds {[round(t, 2) for t in k3_times]} (limit 1800)")
