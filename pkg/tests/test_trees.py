from collections import Counter
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opbench import trees as tr
from opbench.trees import Signature


# number of trees with n labeled leaves, no unary vertices, by internal edge count
SCHROEDER = {2: [1], 3: [1, 3], 4: [1, 10, 15], 5: [1, 25, 105, 105]}


@pytest.mark.parametrize("n", sorted(SCHROEDER))
def test_tree_counts_match_the_schroeder_table(n):
    sig = Signature.full(n)
    assert [len(tr.enumerate_trees(sig, j)) for j in range(n - 1)] == SCHROEDER[n]


def test_binary_trees_count_double_factorial():
    # (2n-3)!! binary trees on n leaves; internal edges may otherwise take either color
    def full_binary(ins, out):
        return tr.binary_only(ins, out) and out == "f" and set(ins) == {"f"}

    for n, expect in [(3, 3), (4, 15), (5, 105)]:
        assert len(tr.enumerate_trees(Signature.full(n), n - 2, full_binary)) == expect


@pytest.mark.parametrize("n", [3, 4, 5])
def test_edge_contraction_squares_to_zero(n):
    """Contracting two edges in either order gives opposite orientation signs."""
    sig = Signature.full(n)
    for j in range(2, n - 1):
        for t in tr.enumerate_trees(sig, j):
            total = Counter()
            for e in tr.internal_edges(t):
                t1, s1 = tr.crunch_edge(t, e)
                for f in tr.internal_edges(t1):
                    t2, s2 = tr.crunch_edge(t1, f)
                    total[tr.serialize(t2)] += s1 * s2
            assert all(v == 0 for v in total.values()), tr.serialize(t)


def test_serialize_roundtrip():
    for t in tr.enumerate_trees(Signature.full(4), 2):
        assert tr.parse(tr.serialize(t)) == t


perms4 = st.permutations([1, 2, 3, 4])


@settings(max_examples=60, deadline=None)
@given(perms4, perms4, st.integers(0, 14))
def test_action_is_a_homomorphism_with_signs(s, t, k):
    tree = tr.enumerate_trees(Signature.full(4), 2)[k]
    a, sa = tr.act_permutation(tree, t)
    b, sb = tr.act_permutation(a, s)
    c, sc = tr.act_permutation(tree, tr.compose_perms(s, t))
    assert b == c and sa * sb == sc


def test_permutation_sign_is_parity():
    for p in permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
        assert tr.permutation_sign(list(p), list(range(4))) == (-1) ** inversions


def test_graft_rejects_color_mismatch():
    dashed = Signature(("f", "d"), "d")
    t = tr.corolla(dashed)
    with pytest.raises(tr.ColorError):
        tr.graft(t, 1, tr.corolla(dashed))


def test_leaf_order_seed_changes_canonical_form_but_not_counts():
    sig = Signature.full(4)
    base = tr.enumerate_trees(sig, 2)
    with tr.leaf_order(7):
        other = tr.enumerate_trees(sig, 2)
    assert len(base) == len(other)
