"""
One small instance, every stage printed
=======================================

s=0, a=1, t=2 with c(s,a) = c(a,t) = 1 and c(s,t) = 2.
"""

import numpy as np

from stpath.cuts import narrow_cuts
from stpath.dp import build_aux_digraph, lambda_schedule
from stpath.instance import MetricInstance
from stpath.lp import DpCall, solve_sub_lp
from stpath.parity import run_rdp

inst = MetricInstance(np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float), 0, 2, name="path3")
sched = lambda_schedule(0.25)
print(f"eps=0.25 -> k={sched.k}, Lambda={sched.Lambda}, lambdas={[str(v) for v in sched.lambdas]}")

# the cut LP of the whole instance, solved exactly
top = DpCall.top(inst)
lp = solve_sub_lp(top, inst, exact=True)
print("x* =", {e: str(v) for e, v in lp.x_star.items()}, " value", lp.value)

# both s-t cuts of the path have value 1, so they form the chain
chain = narrow_cuts(lp.x_star, top, exact=True)
print("narrow cuts:", chain.as_lists())

nodes, arcs = build_aux_digraph(chain, top)
print(f"auxiliary digraph: {len(nodes)} nodes, {len(arcs)} arcs")
for node in nodes:
    print("  ", node.to_json())

run = run_rdp(inst, 0.25, exact=True)
print("tree S =", sorted(run.top.S), " chain L =", run.top.L.as_lists())
print("odd set T =", sorted(run.T), " join J =", run.J.edges)
print("tour", run.tour.order, "cost", run.tour.cost)
