"""
Tour cost against the optimum
=============================

Held-Karp gives OPT for small n; both heuristics are compared against it.
"""

import numpy as np

from stpath.instance import FAMILIES, gen_random
from stpath.oracle import held_karp_path
from stpath.parity import christofides_hoogeveen, run_rdp

print(f"{'family':<24}{'n':>3}{'OPT':>9}{'LP':>9}{'CH/OPT':>9}{'RDP/OPT':>9}")
rows = []
for family in FAMILIES:
    for n in (5, 7, 9):
        for seed in range(3):
            inst = gen_random(n, family, seed)
            opt = held_karp_path(inst).opt_cost
            run = run_rdp(inst, 0.25)
            ch = christofides_hoogeveen(inst).cost / opt
            rd = run.tour.cost / opt
            rows.append((ch, rd))
            print(f"{family:<24}{n:>3}{opt:>9.4f}{run.lp_value_top:>9.4f}{ch:>9.4f}{rd:>9.4f}")

ch, rd = np.array(rows).T
print(f"\nworst CH ratio {ch.max():.4f} (bound 5/3), worst RDP ratio {rd.max():.4f} (bound 1.6)")
