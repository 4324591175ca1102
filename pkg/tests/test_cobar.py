from pathlib import Path

import pytest

from opbench.cobar import augmented_homology, build_cobar, euler_characteristic, koszul_check
from opbench.cyclic import builtin
from opbench.operad import builtin_presentation, quadratic_dual, realize
from opbench.opspec import load_operad_spec
from opbench.trees import Signature

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="module")
def assoc_report():
    return koszul_check(builtin_presentation("assoc"), 4)


def test_assoc_is_koszul_with_factorial_h0(assoc_report):
    assert assoc_report.ok
    assert assoc_report.verdict == "koszul-up-to(4)"
    assert assoc_report.h0_dims() == [2, 6, 24]


@pytest.mark.parametrize("name,h0", [("comm", [1, 1, 1]), ("lie", [1, 2, 6])])
def test_comm_and_lie_are_koszul(name, h0):
    p, _ = builtin(name)
    rep = koszul_check(p, 4)
    assert rep.ok and rep.h0_dims() == h0


def test_assoc_complex_dims_and_euler_counts():
    p = builtin_presentation("assoc")
    q = realize(quadratic_dual(p), 4, validate=False)
    target = realize(p, 4)
    c3 = build_cobar(q, Signature.full(3), target)
    assert c3.dims == {-1: 6, 0: 12}
    assert euler_characteristic(c3) == 12 - 6
    c4 = build_cobar(q, Signature.full(4), target)
    assert c4.dims == {-2: 24, -1: 120, 0: 120}
    assert euler_characteristic(c4) == 120 - 120 + 24
    assert euler_characteristic(c4, augmented=True) == 0
    assert augmented_homology(c4) == {-2: 0, -1: 0, 0: 0, 1: 0}


def test_differential_squares_to_zero():
    p = builtin_presentation("assoc")
    q = realize(quadratic_dual(p), 4, validate=False)
    c = build_cobar(q, Signature.full(4))
    d1, d2 = c.complex.diff(-2), c.complex.diff(-1)
    assert (d2 @ d1).is_zero()


def test_arity_two_is_trivially_koszul():
    rep = koszul_check(builtin_presentation("assoc"), 2)
    assert rep.ok and rep.h0_dims() == [2]


def test_anti_associative_operad_fails_at_arity_five():
    """(ab)c = -a(bc) has a series obstruction 4x^5/5! invisible below arity 5."""
    p = load_operad_spec(str(DATA / "antiassoc.op"))
    low = koszul_check(p, 4)
    assert low.ok and low.h0_dims() == [2, 6, 0]
    high = koszul_check(p, 5)
    assert not high.ok
    assert high.signatures[-1].homology == {-3: 0, -2: 0, -1: 480, 0: 0}


@pytest.mark.parametrize("seed", [3, 11])
def test_homology_is_independent_of_leaf_order(seed, assoc_report):
    other = koszul_check(builtin_presentation("assoc"), 4, seed=seed)
    assert [s.homology for s in other.signatures] == [s.homology for s in assoc_report.signatures]


def test_rejects_tiny_bound():
    with pytest.raises(ValueError):
        koszul_check(builtin_presentation("assoc"), 1)
