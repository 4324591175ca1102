from fractions import Fraction
from pathlib import Path

import pytest

from opbench import pd
from opbench.homotopy import check_d_squared

DATA = Path(__file__).resolve().parents[1] / "data"


def load(name):
    K = pd.load_complex((DATA / f"{name}.complex").read_text())
    return K, pd.load_cycle((DATA / f"{name}.cycle").read_text(), K)


# --------------------------------------------------------------------------- cap oracle

def cochain_cup(alpha, beta, p, sigma):
    """(α ∪ β)(σ) on a vertex tuple, α of degree p."""
    return alpha.get(sigma[:p + 1], 0) * beta.get(sigma[p:], 0)


def cap_oracle(K, mu):
    """½ ε_k [(-1)^{q(p+1)} (ρ*∪τ*)(μ) + (-1)^q (τ*∪ρ*)(μ)] for ρ of dim p, τ of dim q."""
    k = K.dimension
    eps = Fraction((-1) ** (k * (k + 1) // 2), 2)
    out = {}
    for r, rho in enumerate(K.simplices):
        for t, tau in enumerate(K.simplices):
            p, q = len(rho) - 1, len(tau) - 1
            if p + q != k:
                continue
            rs, ts = {rho: 1}, {tau: 1}
            val = Fraction(0)
            for s, c in mu.items():
                sigma = K.simplices[s]
                val += c * ((-1) ** (q * (p + 1)) * cochain_cup(rs, ts, p, sigma)
                            + (-1) ** q * cochain_cup(ts, rs, q, sigma))
            if val:
                out[(r, t)] = eps * val
    return out


@pytest.mark.parametrize("name", ["circle", "tetrahedron"])
def test_cap_pairing_matches_cochain_oracle(name):
    K, mu = load(name)
    assert pd.cap_pairing(K, mu) == cap_oracle(K, mu)


@pytest.mark.parametrize("name", ["circle", "tetrahedron"])
def test_cap_pairing_is_nondegenerate_on_cohomology(name):
    """The unit class pairs nontrivially with the top class."""
    K, mu = load(name)
    P = pd.cap_pairing(K, mu)
    top = max(mu)  # a top simplex; its dual cochain represents the top class
    vertices = [i for i, s in enumerate(K.simplices) if len(s) == 1]
    assert sum(P.get((v, top), 0) for v in vertices) != 0


# --------------------------------------------------------------------------- algebra

def test_two_simplex_d_squared_and_locality():
    K = pd.SimplicialComplex.from_simplices([(0, 1, 2)])
    A = pd.extend_homotopy_comm(K, 4)
    assert check_d_squared(A.d, 4).ok
    assert not A.d.check_coinvariance()
    assert pd.locality_failures(K, A.d.images, lambda w: w) == []


def test_two_simplex_quadratic_part_is_the_symmetrized_diagonal():
    K = pd.SimplicialComplex.from_simplices([(0, 1, 2)])
    A = pd.extend_homotopy_comm(K, 2)
    assert check_d_squared(A.d, 2).ok
    top = K.index[(0, 1, 2)]
    v0, e01, e12, e02 = (K.index[s] for s in [(0,), (0, 1), (1, 2), (0, 2)])
    d = A.d.images[top]
    # d1 is the alternating face sum
    assert {w: c for w, c in d.items() if len(w) == 1} == {(e12,): 1, (e02,): -1, (e01,): 1}
    # p = 0 term: [x_0, x_012] with weight 1/2
    assert d[(v0, top)] == Fraction(1, 2)


def test_dropping_the_quadratic_part_breaks_d_squared():
    K = pd.SimplicialComplex.from_simplices([(0, 1, 2)])
    A = pd.extend_homotopy_comm(K, 3)
    images = [{w: c for w, c in p.items() if len(w) != 2} for p in A.d.images]
    broken = type(A.d)(A.d.space, images, "comm")
    assert not check_d_squared(broken, 3).ok


# --------------------------------------------------------------------------- full pipeline

@pytest.fixture(scope="module")
def circle_report():
    K, mu = load("circle")
    return pd.run_pd(K, mu, 4)


def test_circle_pipeline(circle_report):
    r = circle_report
    assert r.ok
    assert r.d_squared.ok and r.chi_residual.ok and r.f_residual.ok
    assert r.lowest_matches_cap and not r.locality and not r.chi_locality


def test_circle_default_solve_is_not_symmetric_but_symmetric_solve_is(circle_report):
    assert not circle_report.symmetry.ok
    K, mu = load("circle")
    sym = pd.run_pd(K, mu, 4, symmetric=True)
    assert sym.ok and sym.symmetry.ok


def test_lowest_component_is_the_cap(circle_report):
    K, mu = load("circle")
    lowest = {}
    for r, img in enumerate(circle_report.f.images):
        for (pre, t, _), c in img.items():
            if not pre:
                lowest[(r, t)] = lowest.get((r, t), 0) + c
    assert {k: v for k, v in lowest.items() if v} == cap_oracle(K, mu)


def test_chain_map_for_point_and_interval():
    for top in ([(0,)], [(0, 1)]):
        K = pd.SimplicialComplex.from_simplices(top)
        chi = pd.build_chain_map_chi(pd.extend_homotopy_comm(K, 3))
        assert pd.chain_map_residual(chi).ok


def test_report_is_deterministic(circle_report):
    K, mu = load("circle")
    again = pd.run_pd(K, mu, 4)
    assert again.as_dict() == circle_report.as_dict()


# --------------------------------------------------------------------------- input handling

def test_non_cycle_gives_boundary_witness():
    K, _ = load("circle")
    mu = pd.load_cycle((DATA / "circle_not_a_cycle.cycle").read_text(), K)
    v = pd.verify_fundamental_cycle(K, mu)
    assert not v.ok and v.boundary == {"[0]": -1, "[2]": 1}


def test_orientation_is_read_from_vertex_order():
    K, mu = load("circle")
    flipped = pd.load_cycle("1 0 1\n1 1 2\n1 2 0\n", K)
    assert flipped == mu


@pytest.mark.parametrize("text,fragment", [
    ("simplex 0 1\nface 1 2\n", "line 2, column 1"),
    ("simplex 0 x\n", "line 1, column 11"),
    ("simplex 0 1\nsimplex 1 0\n", "duplicate of line 1"),
    ("simplex 0 0\n", "repeated vertex"),
    ("# nothing\n", "no simplices"),
])
def test_complex_parse_errors(text, fragment):
    with pytest.raises(pd.ComplexError, match=fragment):
        pd.load_complex(text)


def test_cycle_errors():
    K, _ = load("circle")
    with pytest.raises(pd.ComplexError, match="not a simplex"):
        pd.load_cycle("1 0 3\n", K)
    with pytest.raises(pd.ComplexError, match="bad coefficient"):
        pd.load_cycle("one 0 1\n", K)
    with pytest.raises(pd.ComplexError, match="top dimension"):
        pd.verify_fundamental_cycle(K, pd.load_cycle("1 0\n", K))
