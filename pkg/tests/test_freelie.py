import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opbench.freelie import (bracket, is_lie_element, letter, lie_basis, lyndon_words, multiply,
                             pbw_dims, spanning_dim, standard_factorization)
from opbench.linalg import vec_iadd


def mobius(n):
    m, k, res = n, 2, 1
    while k * k <= m:
        if m % k == 0:
            m //= k
            if m % k == 0:
                return 0
            res = -res
        k += 1
    return -res if m > 1 else res


def witt(q, n):
    return sum(mobius(d) * q ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


@pytest.mark.parametrize("q,n", [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (3, 3), (3, 4)])
def test_lyndon_counts_follow_witt(q, n):
    assert len(lyndon_words(list(range(q)), n)) == witt(q, n)


degrees_st = st.lists(st.integers(-2, 2), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(degrees_st, st.integers(1, 4))
def test_lie_basis_dim_matches_brute_force_span(degrees, n):
    alphabet = list(range(len(degrees)))
    assert len(lie_basis(alphabet, degrees, n)) == spanning_dim(alphabet, degrees, n)


@settings(max_examples=40, deadline=None)
@given(degrees_st)
def test_graded_pbw_recovers_tensor_dims(degrees):
    k = len(degrees)
    assert pbw_dims(list(range(k)), degrees, 4) == [k ** n for n in range(5)]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-1, 2), min_size=3, max_size=3))
def test_graded_jacobi(degrees):
    x, y, z = letter(0), letter(1), letter(2)
    dx, dy, dz = degrees
    total = {}
    terms = [
        ((-1) ** (dx * dz), bracket(x, bracket(y, z, degrees), degrees)),
        ((-1) ** (dy * dx), bracket(y, bracket(z, x, degrees), degrees)),
        ((-1) ** (dz * dy), bracket(z, bracket(x, y, degrees), degrees)),
    ]
    for s, t in terms:
        vec_iadd(total, t, s)
    assert total == {}


def test_standard_factorization():
    assert standard_factorization((0, 0, 1)) == ((0,), (0, 1))
    assert standard_factorization((0, 1, 1)) == ((0, 1), (1,))


def test_square_of_odd_letter_is_lie_but_product_of_distinct_letters_is_not():
    degrees = [1, 0]
    assert is_lie_element({(0, 0): 2}, degrees)
    assert not is_lie_element(multiply(letter(0), letter(1)), degrees)
    assert not is_lie_element({(1, 1): 1}, degrees)
