"""
Homotopy modules, dual modules and invariant inner products
===========================================================

"""
from fractions import Fraction

from opbench import homotopy as H

# k[x]/(x^2) acting on itself, with the pairing <1,x> = <x,1> = 1
alg = H.dual_numbers()
d, g, f = H.from_strict(alg, H.frobenius_pairing())
module = H.regular_bimodule(alg).module
h = H.induce_dual_module(g, module)
print("d^2:", H.check_d_squared(d).ok, " g^2:", H.check_g_squared(g).ok, " h^2:", H.check_g_squared(h, tag="h").ok)
print(H.check_inner_product(f, g, d, module).as_dict()["verdict"])

# a pairing that is symmetric but not invariant
d, g, f = H.from_strict(alg, {(0, 0): Fraction(1), (1, 1): Fraction(1)})
rep = H.check_inner_product(f, g, d, module)
for r in rep.residuals:
    print(f"{r.name:12s} {'ok' if r.ok else 'fails at ' + str(sorted(r.support)[:3])}")

# the dual module squares to zero on random strict bimodules
bad = 0
for seed in range(50):
    name, m = H.random_strict_module(seed)
    _, g, _ = H.from_strict(m)
    bad += not H.check_g_squared(H.induce_dual_module(g, m.module), 4, tag="h").ok
print("random bimodules whose dual fails h^2 = 0:", bad)
