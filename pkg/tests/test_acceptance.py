"""Acceptance criteria 1-7, each at its stated tolerance and time budget.

Each test records one ``criterion N: pass|fail ...`` line; the lines are
printed in the terminal summary (see conftest.py) and when this file is run
as a script.
"""
import time
from math import factorial
from pathlib import Path

import pytest

from opbench import homotopy as H
from opbench import pd
from opbench.cobar import build_cobar, euler_characteristic, koszul_check
from opbench.cyclic import (build_hat, builtin, check_hat_associativity, hat_koszul_check, dffd_resolution_counts,
                            verify_cyclic_axioms)
from opbench.operad import (assoc_self_duality_map, builtin_presentation, check_generator_map, quadratic_dual,
                            realize)
from opbench.trees import Signature

DATA = Path(__file__).resolve().parents[1] / "data"
ALT_SEED = 20240611
RESULTS = {}


def record(n, ok, seconds, budget, detail=""):
    within = seconds < budget
    RESULTS[n] = f"criterion {n}: {'pass' if ok and within else 'fail'} ({seconds:.1f}s / {budget}s) {detail}".rstrip()
    assert ok, RESULTS[n]
    assert within, RESULTS[n]


def test_criterion_1_assoc_self_checks():
    t0 = time.perf_counter()
    p = builtin_presentation("assoc")
    t = realize(p, 4)
    s3 = Signature.full(3)
    free_ok = t.free_dim(s3) == 12 and t.relation_dim(s3) == 6
    dims = [t.dim(Signature.full(n)) for n in range(1, 5)]
    dims_ok = dims == [factorial(n) for n in range(1, 5)]
    q = realize(quadratic_dual(p), 4, validate=False)
    iso = check_generator_map(q, t, assoc_self_duality_map())
    ok = free_ok and dims_ok and iso.is_isomorphism
    record(1, ok, time.perf_counter() - t0, 10, f"free 12, relations 6, dims {dims}, Assoc! ≅ Assoc")


def test_criterion_2_koszulness():
    t0 = time.perf_counter()
    ok = True
    h0 = {}
    for name in ("assoc", "comm", "lie"):
        p, _ = builtin(name, 4)
        rep = koszul_check(p, 4)
        target = realize(p, 4, validate=False)
        quot = [target.dim(Signature.full(n)) for n in range(2, 5)]
        concentrated = all(all(v == 0 for d, v in s.homology.items() if d != 0) for s in rep.signatures)
        ok &= rep.ok and concentrated and rep.h0_dims() == quot
        h0[name] = rep.h0_dims()
    p = builtin_presentation("assoc")
    q = realize(quadratic_dual(p), 4, validate=False)
    tgt = realize(p, 4)
    e3 = euler_characteristic(build_cobar(q, Signature.full(3), tgt))
    e4 = euler_characteristic(build_cobar(q, Signature.full(4), tgt))
    ok &= (e3, e4) == (12 - 6, 120 - 120 + 24)
    record(2, ok, time.perf_counter() - t0, 60, f"H0 {h0}, Euler {e3}, {e4}")


def test_criterion_3_cyclic_axioms_and_hat_associativity():
    t0 = time.perf_counter()
    ok = True
    counts = {}
    for name in ("assoc", "comm"):
        _, c = builtin(name, 4)
        axioms = verify_cyclic_axioms(c.table, c, 4)
        assoc = check_hat_associativity(build_hat(c.table, c), 4)
        chains_exercised = all(r.checked > 0 for r in assoc[:3])
        ok &= all(r.ok for r in axioms + assoc) and chains_exercised
        counts[name] = sum(r.checked for r in axioms + assoc)
    record(3, ok, time.perf_counter() - t0, 60, f"instances {counts}")


def test_criterion_4_d_f_f_d_resolution():
    t0 = time.perf_counter()
    p, _ = builtin("assoc", 4)
    rc = dffd_resolution_counts(p)
    ok = (rc["dims"] == {-2: 6, -1: 32, 0: 32} and rc["predicted"] == rc["dims"]
          and rc["homology"] == {-2: 0, -1: 0, 0: 6} and rc["target_dim"] == 6
          and rc["identity"] == {"lhs": 6, "rhs": 12 - 6} and rc["ok"])
    record(4, ok, time.perf_counter() - t0, 300,
           f"dims 6->32->32, predicted {sorted(rc['predicted'].values())}, H0 {rc['homology'][0]}")


def test_criterion_5_homotopy_property_suite():
    t0 = time.perf_counter()
    N = 4
    cases = 0
    ok = True
    for seed in range(60):
        _, alg = H.random_strict_module(seed, max_dim=3)
        assert alg.operad == "assoc" and alg.space.dim <= 3
        d, g, _ = H.from_strict(alg)
        if H.check_g_squared(g, N).ok:
            cases += 1
            ok &= H.check_g_squared(H.induce_dual_module(g, alg.module), N, tag="h").ok
    alg = H.dual_numbers()
    d, g, f = H.from_strict(alg, H.frobenius_pairing())
    rep = H.check_inner_product(f, g, d, H.regular_bimodule(alg).module, N)
    ok &= cases >= 50 and rep.ok
    record(5, ok, time.perf_counter() - t0, 60,
           f"{cases} random modules with h²=0; Frobenius " + ", ".join(f"{r.name} {'ok' if r.ok else 'FAIL'}" for r in rep.residuals))


def _pd_suite(name, N):
    K = pd.load_complex((DATA / f"{name}.complex").read_text())
    mu = pd.load_cycle((DATA / f"{name}.cycle").read_text(), K)
    r = pd.run_pd(K, mu, N)
    ok = (r.cycle.ok and r.d_squared.ok and not r.coinvariance and not r.locality and not r.chi_locality
          and r.chi_residual.ok and r.lowest_matches_cap and r.f_residual.ok)
    return ok, r


def test_criterion_6_pd_construction():
    t0 = time.perf_counter()
    ok_c, rc = _pd_suite("circle", 4)
    ok_t, rt = _pd_suite("tetrahedron", 3)
    record(6, ok_c and ok_t, time.perf_counter() - t0, 300,
           f"circle N=4 {'ok' if ok_c else 'FAIL'}, tetrahedron N=3 {'ok' if ok_t else 'FAIL'}")


def test_criterion_7_leaf_order_independence():
    t0 = time.perf_counter()
    ok = True
    for name in ("assoc", "comm", "lie"):
        p, _ = builtin(name, 4)
        a = [s.homology for s in koszul_check(p, 4).signatures]
        b = [s.homology for s in koszul_check(p, 4, seed=ALT_SEED).signatures]
        ok &= a == b
    p, _ = builtin("assoc", 4)
    a = [s.homology for s in hat_koszul_check(p, 4).signatures]
    b = [s.homology for s in hat_koszul_check(p, 4, seed=ALT_SEED).signatures]
    ok &= a == b
    ok &= dffd_resolution_counts(p)["homology"] == dffd_resolution_counts(p, seed=ALT_SEED)["homology"]
    record(7, ok, time.perf_counter() - t0, 300, f"alternative leaf-order seed {ALT_SEED}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
