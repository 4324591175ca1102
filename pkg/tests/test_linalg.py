from fractions import Fraction
from itertools import combinations

from hypothesis import given, settings
from hypothesis import strategies as st

from opbench.linalg import (ChainComplexData, Echelon, ExactMatrix, homology_dims, nullspace, rank,
                            solve)


def det(rows):
    """Laplace expansion; fine for the tiny matrices used here."""
    if not rows:
        return Fraction(1)
    return sum(((-1) ** j) * rows[0][j] * det([r[:j] + r[j + 1:] for r in rows[1:]])
               for j in range(len(rows)) if rows[0][j])


def minor_rank(dense):
    """Largest k with a nonzero k x k minor."""
    n, m = len(dense), len(dense[0]) if dense else 0
    for k in range(min(n, m), 0, -1):
        for rs in combinations(range(n), k):
            for cs in combinations(range(m), k):
                if det([[dense[r][c] for c in cs] for r in rs]):
                    return k
    return 0


small_ints = st.integers(min_value=-3, max_value=3)


@st.composite
def matrices(draw, max_dim=4):
    n = draw(st.integers(1, max_dim))
    m = draw(st.integers(1, max_dim))
    return [[Fraction(draw(small_ints)) for _ in range(m)] for _ in range(n)]


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_minor_oracle(dense):
    assert rank(ExactMatrix.from_dense(dense)) == minor_rank(dense)


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_rank_nullity_and_kernel(dense):
    m = ExactMatrix.from_dense(dense)
    ker = nullspace(m)
    assert len(ker) + rank(m) == m.cols
    for v in ker:
        assert not m.apply(v)
    assert rank(m.transpose()) == rank(m)


@settings(max_examples=100, deadline=None)
@given(matrices(), st.lists(small_ints, min_size=4, max_size=4))
def test_solve_returns_a_solution_of_consistent_systems(dense, x):
    m = ExactMatrix.from_dense(dense)
    xv = {j: Fraction(c) for j, c in enumerate(x[:m.cols]) if c}
    b = m.apply(xv)
    y = solve(m, b)
    assert y is not None and m.apply(y) == b


def test_solve_reports_inconsistent_system():
    m = ExactMatrix.from_dense([[1, 1], [2, 2]])
    assert solve(m, {0: 1, 1: 3}) is None


def test_exactness_no_float_drift():
    m = ExactMatrix.from_dense([[Fraction(1, 3), Fraction(1, 7)], [Fraction(2, 3), Fraction(2, 7)]])
    assert rank(m) == 1


def test_echelon_membership():
    e = Echelon()
    assert e.add({0: 1, 1: 1})
    assert not e.add({0: 2, 1: 2})
    assert e.contains({0: -3, 1: -3})
    assert not e.contains({0: 1})


def test_homology_of_a_circle():
    # coboundary of the triangle circle: vertices in degree 0, edges in degree 1
    d = ExactMatrix.from_dense([[-1, 0, -1], [1, -1, 0], [0, 1, 1]])
    cx = ChainComplexData({0: 3, 1: 3}, {0: d})
    assert homology_dims(cx) == {0: 1, 1: 1}
    assert cx.euler_characteristic() == 0


def test_matmul_against_dense_product():
    a = [[1, 2], [3, 4], [0, 1]]
    b = [[1, 0, 2], [-1, 1, 0]]
    prod = (ExactMatrix.from_dense(a) @ ExactMatrix.from_dense(b)).to_dense()
    expect = [[sum(a[i][k] * b[k][j] for k in range(2)) for j in range(3)] for i in range(3)]
    assert prod == expect
