from fractions import Fraction

import pytest

from opbench.cyclic import (build_hat, builtin, check_hat_associativity, compare_hat_presentation,
                            corrupted, hat_koszul_check, dffd_resolution_counts, verify_cyclic_axioms)
from opbench.linalg import IntegrityError
from opbench.trees import DASHED, FULL, NONE, Signature


@pytest.fixture(scope="module", params=["assoc", "comm"])
def structure(request):
    p, c = builtin(request.param, 4)
    return p, c.table, c


def test_cyclic_axioms_hold(structure):
    _, t, c = structure
    reports = verify_cyclic_axioms(t, c, 4)
    assert all(r.ok for r in reports), [r.failures for r in reports]
    assert all(r.checked > 0 for r in reports)


def test_lie_rotation_from_rerooting_satisfies_axioms():
    _, c = builtin("lie", 4)
    assert all(r.ok for r in verify_cyclic_axioms(c.table, c, 4))


def planar_word(t):
    if isinstance(t, int):
        return (t,)
    a, left, right = t
    w = planar_word(left) + planar_word(right)
    return w if a == "mu" else planar_word(right) + planar_word(left)


def cyclic_class(legs):
    """Normalize a cyclic sequence of leg labels to start at its smallest label."""
    k = legs.index(min(legs))
    return tuple(legs[k:]) + tuple(legs[:k])


def test_assoc_rotation_is_word_rotation():
    """τ on Assoc(n) relabels the legs of the cyclic word (w1..wn, out) by a fixed cyclic shift."""
    _, c = builtin("assoc", 4)
    t = c.table
    shifts = {1, -1}
    for n in (2, 3, 4):
        basis = t.basis(Signature.full(n))
        for k, tree in enumerate(basis):
            img = c.apply_tau(n, {k: Fraction(1)})
            assert len(img) == 1 and set(img.values()) == {1}
            (j,) = img
            legs = planar_word(tree) + (n + 1,)
            dst = cyclic_class(planar_word(basis[j]) + (n + 1,))
            shifts &= {s for s in (1, -1) if cyclic_class([(x - 1 + s) % (n + 1) + 1 for x in legs]) == dst}
    assert len(shifts) == 1


def test_corrupted_rotation_is_caught():
    _, c = builtin("assoc", 3)
    reports = verify_cyclic_axioms(c.table, corrupted(c), 3)
    assert not all(r.ok for r in reports)
    with pytest.raises(IntegrityError):
        build_hat(c.table, corrupted(c))


def test_hat_associativity_all_chains(structure):
    _, t, c = structure
    h = build_hat(t, c)
    reports = check_hat_associativity(h, 4)
    assert all(r.ok for r in reports), [r.failures[:2] for r in reports]
    assert all(r.checked > 0 for r in reports[:3])


def test_hat_empty_output_spaces_are_shifted_copies(structure):
    _, t, c = structure
    h = build_hat(t, c)
    for n in (2, 3, 4):
        sig = Signature((DASHED,) + (FULL,) * (n - 2) + (DASHED,), NONE)
        assert h.dim(sig) == t.dim(Signature.full(n - 1))


def test_hat_presentation_maps_isomorphically(structure):
    p, t, c = structure
    h = build_hat(t, c)
    rows = compare_hat_presentation(h, p, 4)
    assert rows and all(r["relations_vanish"] and r["bijective"] for r in rows)


def test_dffd_resolution_counts_for_assoc():
    p, _ = builtin("assoc", 4)
    rc = dffd_resolution_counts(p)
    assert rc["dims"] == {-2: 6, -1: 32, 0: 32}
    assert rc["predicted"] == {-2: 6, -1: 2 * 6 + 5 * 2 ** 2, 0: 8 * 2 ** 2}
    assert rc["homology"] == {-2: 0, -1: 0, 0: 6}
    assert rc["target_dim"] == 6 == rc["identity"]["rhs"] == 3 * 2 ** 2 - 6


@pytest.mark.parametrize("name", ["comm", "lie"])
def test_hat_is_koszul(name):
    p, _ = builtin(name, 4)
    rep = hat_koszul_check(p, 4)
    assert rep.ok
    assert rep.dual_route_agrees == {"cap_sign=+1": False, "cap_sign=-1": True}
