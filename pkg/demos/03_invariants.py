"""
Watching the invariants
=======================

Every call of the recursion goes through the invariant monitor.
Then one entry of a vector is zeroed on purpose, to see a failure reported.
"""

from stpath.instance import gen_random
from stpath.invariants import CHECKS, verify_instance, zero_largest_entry

inst = gen_random(7, "euclidean-unit-square", 4)
out = verify_instance(inst, 0.25)
for name, passed, failed in out.monitor.summary():
    print(f"{name:<8}{passed:>6} ok {failed:>4} failed   {CHECKS[name]}")

broken = verify_instance(inst, 0.25, corrupt=zero_largest_entry)
print("\nwith a zeroed entry:", "ok" if broken.ok else "caught")
for v in broken.monitor.violations[:3]:
    print("  ", v)
