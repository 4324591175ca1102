"""
Cyclic operads and the inner-product operad built from them
============================================================

"""
from opbench.cyclic import (build_hat, builtin, check_hat_associativity, dffd_resolution_counts,
                            verify_cyclic_axioms)
from opbench.trees import DASHED, FULL, NONE, Signature

# Assoc(n) rotates like cyclic words of n+1 legs
p, cyc = builtin("assoc", 4)
for r in verify_cyclic_axioms(cyc.table, cyc, 4):
    print(f"{r.name:40s} {r.checked:6d} instances  {'ok' if r.ok else r.failures[:2]}")

# spaces with no output are copies of O(n-1) carrying the rotation
hat = build_hat(cyc.table, cyc)
for n in (2, 3, 4):
    sig = Signature((DASHED,) + (FULL,) * (n - 2) + (DASHED,), NONE)
    print(sig, "dim", hat.dim(sig))

for r in check_hat_associativity(hat, 4):
    print(f"{r.name:30s} {r.checked:6d} instances  {'ok' if r.ok else 'FAIL'}")

# the resolution of the (d,f,f,d; none) space next to its predicted sizes
rc = dffd_resolution_counts(p)
print("complex  ", dict(sorted(rc["dims"].items())))
print("predicted", dict(sorted(rc["predicted"].items())))
print("homology ", dict(sorted(rc["homology"].items())), " target", rc["target_dim"])
print("dim O(3) = 3 dim O!(2)^2 - dim O!(3):", rc["identity"])
