"""
Quadratic operads, their duals and the Koszul check
===================================================

"""
from opbench.cobar import koszul_check
from opbench.operad import (assoc_self_duality_map, builtin_presentation, check_generator_map, quadratic_dual,
                            realize)
from opbench.trees import Signature

# Assoc is presented by two binary operations (ab and ba) and the associativity relations
assoc = builtin_presentation("assoc")
table = realize(assoc, 4)
s3 = Signature.full(3)
print("free trees at arity 3:", table.free_dim(s3), " relations:", table.relation_dim(s3))
print("dims of Assoc(n):", [table.dim(Signature.full(n)) for n in range(1, 5)])

# the quadratic dual is again Assoc; the generator map needs one sign
dual = realize(quadratic_dual(assoc), 4, validate=False)
rep = check_generator_map(dual, table, assoc_self_duality_map())
print("Assoc! -> Assoc is an isomorphism:", rep.is_isomorphism)

# Koszulness: the cobar complex of the dual resolves the operad
for name in ("assoc", "comm", "lie"):
    r = koszul_check(builtin_presentation(name), 4)
    print(f"{name:6s} {r.verdict:18s} H0 dims {r.h0_dims()}")
    for s in r.signatures:
        print("   ", s.signature, "complex", dict(sorted(s.dims.items())), "homology", dict(sorted(s.homology.items())))
