"""Non-strict test structures: strict ones conjugated by random automorphisms."""
import itertools
import random
from fractions import Fraction

from opbench.homotopy import (GradedSpace, StrictAlgebra, dual_numbers, from_strict, gauge_transform,
                              sample_algebras)


def random_phi(vdeg, rng, max_len=3):
    out = []
    for i in range(len(vdeg)):
        p = {}
        for length in range(2, max_len + 1):
            for w in itertools.product(range(len(vdeg)), repeat=length):
                if sum(vdeg[x] for x in w) == vdeg[i] and rng.random() < 0.5:
                    p[w] = Fraction(rng.randint(-2, 2))
        out.append({k: v for k, v in p.items() if v})
    return out


def random_psi(vdeg, mdeg, rng, max_len=3):
    out = []
    n = len(vdeg)
    for q in range(len(mdeg)):
        p = {}
        for length in range(1, max_len):
            for a in range(length + 1):
                for pre in itertools.product(range(n), repeat=a):
                    for suf in itertools.product(range(n), repeat=length - a):
                        for m in range(len(mdeg)):
                            if sum(vdeg[x] for x in pre + suf) + mdeg[m] == mdeg[q] and rng.random() < 0.5:
                                p[(pre, m, suf)] = Fraction(rng.randint(-2, 2))
        out.append({k: v for k, v in p.items() if v})
    return out


def shifted_regular(alg, r):
    """A acting on the shifted copy A[r], left action signed by the Koszul rule."""
    mdeg = tuple(d + r for d in alg.space.degrees)
    left = {}
    for (i, j), row in alg.mult.items():
        s = -1 if (r * alg.space.degrees[i]) % 2 else 1
        left[(i, j)] = {k: s * c for k, c in row.items()}
    return StrictAlgebra(alg.space, alg.mult, alg.operad, GradedSpace(mdeg), left, dict(alg.mult))


def graded_algebras():
    base = dual_numbers()
    t2 = sample_algebras()["T2"]
    algs = [StrictAlgebra(GradedSpace(deg), base.mult) for deg in [(0, 1), (0, -1), (0, 2), (0, 3)]]
    algs += [StrictAlgebra(GradedSpace((0, 1, 0)), t2.mult), StrictAlgebra(GradedSpace((0, 2, 0)), t2.mult)]
    return algs


def gauge_cases(N=4, seeds=(0, 1), shifts=(0, 1, 2)):
    """(d, g, module) with nonzero higher components; d² = g² = 0 modulo length N."""
    out = []
    for ai, a in enumerate(graded_algebras()):
        for r in shifts:
            m = shifted_regular(a, r)
            d, g, _ = from_strict(m)
            for seed in seeds:
                rng = random.Random(seed * 7 + ai)
                d2, g2 = gauge_transform(d, random_phi(d.letter_degrees, rng), N, g,
                                         random_psi(d.letter_degrees, g.letter_degrees, rng))
                out.append((f"alg{ai}/shift{r}/seed{seed}", d2, g2, m.module))
    return out
