"""Command-line front end: ``solve``, ``verify`` and ``bench``.

Exit codes: 0 success, 1 bad input or flags, 2 solver failure, 3 a checked
invariant failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .dp import lambda_schedule
from .edges import members
from .instance import FAMILIES, InstanceFormatError, MetricViolationError, gen_random, load_instance
from .invariants import CHECKS, verify_instance
from .oracle import HELD_KARP_CAP, held_karp_path
from .parity import christofides_hoogeveen, run_rdp

__all__ = ["main", "build_parser", "guarantee", "run_report", "bench_rows"]

EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_INVARIANT = 3

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for solver failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def guarantee(algorithm: str, epsilon=None) -> float:
    if algorithm == "exact":
        return 1.0
    if algorithm == "christofides":
        return 5 / 3
    return 1 + float(lambda_schedule(epsilon).lambdas[0])


def _num(v):
    return None if v is None else float(v)


# ------------------------------------------------------------------ solve


def run_report(inst, algorithm: str, epsilon=0.25, rational: bool = False, compare_exact: bool = False,
               timing: bool = False, observer=None) -> dict:
    """Solve ``inst`` and return the report dictionary (see docs/run_report.schema.json)."""
    stats = {"lp_solves": 0, "dp_calls": 0, "memo_hits": 0, "separation_rounds": 0, "wall_ms": None}
    report = {
        "schema_version": SCHEMA_VERSION,
        "instance": inst.name,
        "n": inst.n,
        "s": inst.s,
        "t": inst.t,
        "algorithm": algorithm,
        "epsilon": None,
        "k": None,
        "lambda_1": None,
        "rational": rational,
        "tour": None,
        "lp_value_top": None,
        "parity_vector_cost": None,
        "stats": stats,
        "opt": None,
        "ratio_vs_exact": None,
    }
    start = time.perf_counter()
    opt = None
    if algorithm == "christofides":
        tour = christofides_hoogeveen(inst)
    elif algorithm == "exact":
        exact = held_karp_path(inst)
        tour, opt = exact.opt_tour, exact.opt_cost
    elif algorithm == "rdp":
        run = run_rdp(inst, epsilon, exact=rational, observer=observer)
        sched = run.schedule
        tour = run.tour
        report.update(
            epsilon=float(sched.epsilon),
            k=sched.k,
            lambda_1=float(sched.lambdas[0]),
            lp_value_top=run.lp_value_top,
            parity_vector_cost=run.parity_vector_cost,
        )
        stats.update(
            lp_solves=run.stats.lp_solves,
            dp_calls=run.stats.dp_calls,
            memo_hits=run.stats.memo_hits,
            separation_rounds=run.stats.separation_rounds,
        )
    else:
        raise UsageError(f"unknown algorithm {algorithm!r}")
    if timing:
        stats["wall_ms"] = (time.perf_counter() - start) * 1000.0
    tour.check(inst)
    report["tour"] = tour.to_dict()

    if compare_exact and opt is None:
        if inst.n > HELD_KARP_CAP:
            raise UsageError(f"--compare-exact needs n <= {HELD_KARP_CAP}, got {inst.n}")
        opt = held_karp_path(inst).opt_cost
    if opt is not None:
        report["opt"] = opt
        report["ratio_vs_exact"] = tour.cost / opt if opt > 0 else 1.0
        bound = guarantee(algorithm, epsilon)
        if report["ratio_vs_exact"] > bound * (1 + 1e-6):
            raise AssertionError(f"ratio {report['ratio_vs_exact']} exceeds the guarantee {bound}")
    return report


class _TraceWriter:
    """Observer writing one JSON line per computed DP call (and optionally its LP rows)."""

    def __init__(self, trace=None, rows=None):
        self.trace = trace
        self.rows = rows

    def __call__(self, rec):
        call = rec.call
        if self.trace is not None:
            line = {
                "level": call.level,
                "window_size": bin(call.window).count("1"),
                "window": members(call.window),
                "s_prime": call.s_prime,
                "t_prime": call.t_prime,
                "lp_value": _num(rec.result.lp_value),
                "m": None if rec.narrow is None else len(rec.narrow),
                "path": [node.to_json() for node in rec.path],
                "s_cost": _num(rec.result.s_cost),
                "y_cost": _num(rec.result.y_cost),
            }
            self.trace.write(json.dumps(line) + "\n")
        if self.rows is not None:
            lp = rec.lp
            duals = list(lp.duals) + [None] * (len(lp.generated_rows) - len(lp.duals))
            line = {
                "level": call.level,
                "window": members(call.window),
                "rows": [
                    {"members": members(side), "rhs": _num(rhs), "dual": _num(d)}
                    for (side, rhs), d in zip(lp.generated_rows, duals)
                ],
            }
            self.rows.write(json.dumps(line) + "\n")


def _load(args):
    if args.input is not None:
        return load_instance(args.input, args.format)
    if args.n is None:
        raise UsageError("give --input PATH or --n N (with --seed and --family) to generate an instance")
    return gen_random(args.n, args.family, args.seed)


def cmd_solve(args) -> int:
    inst = _load(args)
    handles = []
    try:
        trace = open(args.trace, "w") if args.trace else None
        rows = open(args.dump_rows, "w") if args.dump_rows else None
        handles = [h for h in (trace, rows) if h is not None]
        observer = _TraceWriter(trace, rows) if handles else None
        report = run_report(inst, args.algorithm, args.epsilon, args.rational, args.compare_exact, args.timing, observer)
    finally:
        for h in handles:
            h.close()
    _emit(args, json.dumps(report, indent=2) + "\n")
    return 0


# ------------------------------------------------------------------ verify


def cmd_verify(args) -> int:
    inst = _load(args)
    outcome = verify_instance(inst, args.epsilon, exact=args.rational, enum_cap=args.enum_cap)
    run, mon = outcome.run, outcome.monitor
    sched = run.schedule
    out = io.StringIO()
    out.write(f"instance {inst.name or '-'}: n={inst.n} s={inst.s} t={inst.t}\n")
    out.write(f"epsilon={float(sched.epsilon):g} k={sched.k} Lambda={sched.Lambda} "
              f"lambda_1={Fraction(sched.lambdas[0])} rational={'yes' if args.rational else 'no'}\n")
    out.write(f"dp calls checked: {mon.records}\n")
    for name, passed, failed in mon.summary():
        status = "PASS" if not failed else "FAIL"
        out.write(f"{status} {name:<8} {passed} ok, {failed} failed  ({CHECKS[name]})\n")
    for v in mon.violations:
        out.write(f"  {v}\n")
    out.write(f"top chain L: {run.top.L.as_lists()}\n")
    out.write(f"tour {list(run.tour.order)} cost {run.tour.cost:.12g}\n")
    out.write("all checks passed\n" if mon.ok else "invariant failure\n")
    _emit(args, out.getvalue())
    return 0 if mon.ok else EXIT_INVARIANT


# ------------------------------------------------------------------ bench


def _eps_label(eps: float) -> str:
    return f"{eps:g}"


def _bench_one(job):
    family, n, seed, epsilons, timing = job
    inst = gen_random(n, family, seed)
    start = time.perf_counter()
    opt = held_karp_path(inst).opt_cost if n <= HELD_KARP_CAP else None
    row = {"family": family, "seed": seed, "n": n, "opt": opt}
    ch = christofides_hoogeveen(inst).cost
    row["christofides_cost"] = ch
    row["christofides_ratio"] = None if not opt else ch / opt
    for eps in epsilons:
        cost = run_rdp(inst, eps).tour.cost
        row[f"rdp_cost_{_eps_label(eps)}"] = cost
        row[f"rdp_ratio_{_eps_label(eps)}"] = None if not opt else cost / opt
    row["wall_ms"] = (time.perf_counter() - start) * 1000.0 if timing else None
    return row


def bench_rows(family: str, n: int, seeds, epsilons, jobs: int = 1, timing: bool = False) -> list[dict]:
    tasks = [(family, n, seed, tuple(epsilons), timing) for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_bench_one, tasks))
    return [_bench_one(t) for t in tasks]


def cmd_bench(args) -> int:
    if args.n is None or args.n < 2:
        raise UsageError("bench needs --n N with N >= 2")
    if args.count < 1:
        raise UsageError("--count must be positive")
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    seeds = range(args.seed, args.seed + args.count)
    rows = bench_rows(args.family, args.n, seeds, args.epsilon, args.jobs, args.timing)
    if args.csv:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(rows, indent=2) + "\n"
    _emit(args, text)
    return 0


# ------------------------------------------------------------------ plumbing


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _epsilon(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0 < val <= 0.5:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1/2], got {text}")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stpath", description="Metric s-t path TSP solvers and invariant checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance_flags(p, with_input=True):
        if with_input:
            p.add_argument("--input", metavar="PATH", help="instance file (JSON or TSPLIB)")
            p.add_argument("--format", choices=["json", "tsplib"], help="input format (default: from extension)")
        p.add_argument("--n", type=int, help="generate a random instance with this many vertices")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--family", choices=FAMILIES, default=FAMILIES[0])
        p.add_argument("--output", metavar="PATH", help="write to a file instead of standard output")

    p = sub.add_parser("solve", help="solve one instance and print a JSON report")
    instance_flags(p)
    p.add_argument("--algorithm", choices=["christofides", "rdp", "exact"], default="rdp")
    p.add_argument("--epsilon", type=_epsilon, default=0.25)
    p.add_argument("--rational", action="store_true", help="exact rational LP and assembly arithmetic")
    p.add_argument("--trace", metavar="PATH", help="JSON lines, one per computed DP call")
    p.add_argument("--dump-rows", metavar="PATH", help="JSON lines with the generated LP rows and duals")
    p.add_argument("--compare-exact", action="store_true", help="add the Held-Karp optimum and the ratio")
    p.add_argument("--timing", action="store_true", help="record wall_ms (output is no longer reproducible)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run the invariant checks on one instance")
    instance_flags(p)
    p.add_argument("--epsilon", type=_epsilon, default=0.25)
    p.add_argument("--rational", action="store_true")
    p.add_argument("--enum-cap", type=int, default=10, help="largest window checked by full cut enumeration")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="ratio table over a range of seeds")
    instance_flags(p, with_input=False)
    p.add_argument("--count", type=int, default=10, help="number of consecutive seeds starting at --seed")
    p.add_argument("--epsilon", type=_epsilon, nargs="+", default=[0.25])
    p.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceFormatError, MetricViolationError, UsageError, OSError) as exc:
        print(f"stpath: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # anything the solver raises
        print(f"stpath: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
