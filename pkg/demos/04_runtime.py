"""
How the running time grows
==========================

Wall time and LP solves for two and three recursion levels.
"""

import time

from stpath.instance import gen_random
from stpath.parity import run_rdp

for eps in (0.25, 0.125):
    for n in (4, 6, 8):
        inst = gen_random(n, "euclidean-unit-square", 0)
        t0 = time.perf_counter()
        run = run_rdp(inst, eps)
        dt = time.perf_counter() - t0
        st = run.stats
        print(f"eps={eps:<6} k={run.schedule.k} n={n:>2}  {dt:7.3f}s  lp solves {st.lp_solves:>5}  "
              f"memo hits {st.memo_hits:>4}  arcs {st.arcs:>6}")
