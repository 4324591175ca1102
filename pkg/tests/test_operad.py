from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opbench.operad import (Elem, PresentationError, assoc_self_duality_map, block_permutation,
                            builtin_presentation, check_generator_map, check_operad_axioms,
                            comm_dual_to_lie_map, pairing_is_perfect, quadratic_dual, realize)
from opbench.trees import Signature


@pytest.fixture(scope="module")
def assoc():
    return realize(builtin_presentation("assoc"), 4)


def test_assoc_free_and_relation_dims(assoc):
    s3 = Signature.full(3)
    assert assoc.free_dim(s3) == 12
    assert assoc.relation_dim(s3) == 6
    assert assoc.dim(s3) == 6


@pytest.mark.parametrize("name,dims", [
    ("assoc", lambda n: factorial(n)),
    ("comm", lambda n: 1),
    ("lie", lambda n: factorial(n - 1)),
])
def test_realized_dims(name, dims):
    t = realize(builtin_presentation(name), 4)
    assert [t.dim(Signature.full(n)) for n in range(1, 5)] == [dims(n) for n in range(1, 5)]


def test_operad_axioms_hold_exhaustively(assoc):
    assert check_operad_axioms(assoc, 4) == []
    assert check_operad_axioms(realize(builtin_presentation("lie"), 4), 4) == []


def substitute(word_a, i, word_b):
    """Compose two words of labels: letter i of word_a becomes word_b, shifted."""
    n = len(word_b)
    out = []
    for x in word_a:
        if x == i:
            out.extend(y + i - 1 for y in word_b)
        else:
            out.append(x if x < i else x + n - 1)
    return tuple(out)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_block_permutation_matches_word_substitution(m, n, data):
    sigma = data.draw(st.permutations(range(1, m + 1)))
    pi = data.draw(st.permutations(range(1, n + 1)))
    i = data.draw(st.integers(1, m))
    # acting on identity words: relabel letter l as sigma(l), then substitute at sigma(i)
    lhs = substitute(tuple(sigma), sigma[i - 1], tuple(pi))
    tau = block_permutation(sigma, i, pi)
    assert lhs == tau


def test_compose_matches_assoc_word_model(assoc):
    """Assoc basis elements are planar words; composition is substitution."""
    def word(t):
        if isinstance(t, int):
            return (t,)
        a, l, r = t
        w = word(l) + word(r)
        return w if a == "mu" else word(r) + word(l)

    for m in (2, 3):
        for n in (2, 3):
            if m + n - 1 > 4:
                continue
            sa, sb = Signature.full(m), Signature.full(n)
            for ia, ta in enumerate(assoc.basis(sa)):
                for ib, tb in enumerate(assoc.basis(sb)):
                    for i in range(1, m + 1):
                        res = assoc.compose(Elem(sa, {ia: Fraction(1)}), i, Elem(sb, {ib: Fraction(1)}))
                        expect = substitute(word(ta), i, word(tb))
                        words = {word(t): k for k, t in enumerate(assoc.basis(Signature.full(m + n - 1)))}
                        assert res.coeffs == {words[expect]: 1}


def test_assoc_is_self_dual():
    p = builtin_presentation("assoc")
    q = quadratic_dual(p)
    rep = check_generator_map(realize(q, 4, validate=False), realize(p, 4), assoc_self_duality_map())
    assert rep.is_isomorphism
    assert [rep.dims[str(Signature.full(n))] for n in (2, 3, 4)] == [(2, 2), (6, 6), (24, 24)]


def test_unsigned_self_duality_map_is_rejected():
    p = builtin_presentation("assoc")
    q = quadratic_dual(p)
    bad = {"mu!": {"mu": Fraction(1)}, "mu21!": {"mu21": Fraction(1)}}
    rep = check_generator_map(realize(q, 3, validate=False), realize(p, 3), bad)
    assert not rep.is_isomorphism


def test_comm_dual_is_lie():
    q = quadratic_dual(builtin_presentation("comm"))
    rep = check_generator_map(realize(q, 4, validate=False), realize(builtin_presentation("lie"), 4),
                              comm_dual_to_lie_map())
    assert rep.is_isomorphism


@pytest.mark.parametrize("name", ["assoc", "comm", "lie"])
def test_dual_pairing_is_perfect_and_dual_is_involutive_on_dims(name):
    p = builtin_presentation(name)
    assert pairing_is_perfect(p)
    qq = quadratic_dual(quadratic_dual(p))
    a, b = realize(p, 4), realize(qq, 4, validate=False)
    assert [a.dim(Signature.full(n)) for n in range(2, 5)] == [b.dim(Signature.full(n)) for n in range(2, 5)]


def test_bad_permutation_is_rejected(assoc):
    with pytest.raises(ValueError):
        assoc.act(Elem(Signature.full(2), {0: Fraction(1)}), (1, 1))


def test_presentation_error_is_a_value_error():
    assert issubclass(PresentationError, ValueError)
