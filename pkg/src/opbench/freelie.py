"""Graded free Lie algebras inside the tensor algebra.

Elements of T(V) are dicts mapping words (tuples of letter indices) to
Fractions.  Letters carry integer degrees; brackets follow the Koszul rule
``[x, y] = xy - (-1)^{|x||y|} yx``.  Free Lie algebras on graded generators
are super Lie algebras, so the Lyndon basis gains the squares of odd Lyndon
brackets.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Dict, List, Sequence, Tuple

from .linalg import Echelon, vec_iadd

Word = Tuple[int, ...]
Poly = Dict[Word, Fraction]


def word_degree(word: Sequence[int], degrees: Sequence[int]) -> int:
    return sum(degrees[x] for x in word)


def poly_degree(p: Poly, degrees: Sequence[int]) -> int:
    """Degree of a homogeneous element; raises on mixed degrees."""
    degs = {word_degree(w, degrees) for w in p}
    if len(degs) > 1:
        raise ValueError(f"element is not homogeneous: degrees {sorted(degs)}")
    return degs.pop() if degs else 0


def multiply(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            vec_iadd(out, {wa + wb: ca * cb})
    return out


def bracket(a: Poly, b: Poly, degrees: Sequence[int]) -> Poly:
    if not a or not b:
        return {}
    da, db = poly_degree(a, degrees), poly_degree(b, degrees)
    out = multiply(a, b)
    sign = -1 if (da * db) % 2 == 0 else 1
    vec_iadd(out, multiply(b, a), sign)
    return out


def letter(x: int) -> Poly:
    return {(x,): Fraction(1)}


def is_lyndon(w: Word) -> bool:
    return all(w < w[i:] for i in range(1, len(w)))


def lyndon_words(alphabet: Sequence[int], n: int) -> List[Word]:
    """Lyndon words of length ``n`` over ``alphabet`` (order as given), by Duval's algorithm."""
    k = len(alphabet)
    if k == 0 or n < 1:
        return []
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == n:
            out.append(tuple(alphabet[i] for i in w))
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
    return out


def standard_factorization(w: Word) -> Tuple[Word, Word]:
    """Split a Lyndon word as uv with v its longest proper Lyndon suffix."""
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return w[:i], w[i:]
    raise ValueError("a single letter has no standard factorization")


def lyndon_bracket(w: Word, degrees: Sequence[int]) -> Poly:
    if len(w) == 1:
        return letter(w[0])
    u, v = standard_factorization(w)
    return bracket(lyndon_bracket(u, degrees), lyndon_bracket(v, degrees), degrees)


def lie_basis(alphabet: Sequence[int], degrees: Sequence[int], n: int) -> List[Tuple[str, Poly]]:
    """Basis of the length-``n`` part of the free graded Lie algebra on ``alphabet``.

    Lyndon brackets of length n, plus ``[b(u), b(u)]`` for odd Lyndon u of
    length n/2.  Each entry is ``(label, element)``.
    """
    order = sorted(alphabet)
    out = [("".join(f"<{x}>" for x in w), lyndon_bracket(w, degrees)) for w in lyndon_words(order, n)]
    if n % 2 == 0:
        for u in lyndon_words(order, n // 2):
            if word_degree(u, degrees) % 2:
                b = lyndon_bracket(u, degrees)
                out.append(("sq" + "".join(f"<{x}>" for x in u), bracket(b, b, degrees)))
    return out


def spanning_dim(alphabet: Sequence[int], degrees: Sequence[int], n: int) -> int:
    """Dimension of L_n by brute force: rank of all right-nested brackets of letters."""
    words: Dict[Word, int] = {}
    ech = Echelon()
    for seq in product(sorted(alphabet), repeat=n):
        p = letter(seq[-1])
        for x in reversed(seq[:-1]):
            p = bracket(letter(x), p, degrees)
        ech.add({words.setdefault(w, len(words)): c for w, c in p.items()})
    return len(ech)


def pbw_dims(alphabet: Sequence[int], degrees: Sequence[int], n_max: int) -> List[int]:
    """Dimensions of T_n predicted from the Lie basis by graded PBW, for n = 0..n_max.

    Each even basis element of length m contributes 1/(1 - t^m), each odd one
    contributes (1 + t^m).
    """
    series = [1] + [0] * n_max
    for m in range(1, n_max + 1):
        for _, b in lie_basis(alphabet, degrees, m):
            odd = poly_degree(b, degrees) % 2
            new = list(series)
            if odd:
                for k in range(n_max, m - 1, -1):
                    new[k] = series[k] + series[k - m]
            else:
                for k in range(m, n_max + 1):
                    new[k] = series[k] + new[k - m]
            series = new
    return series


class LieSpace:
    """Homogeneous pieces of the free Lie algebra on a subset of letters, with membership tests."""

    def __init__(self, alphabet: Sequence[int], degrees: Sequence[int]):
        self.alphabet = tuple(sorted(alphabet))
        self.degrees = tuple(degrees)
        self._cache: Dict[int, List[Tuple[str, Poly]]] = {}

    def basis(self, n: int, degree: int | None = None) -> List[Tuple[str, Poly]]:
        if n not in self._cache:
            self._cache[n] = lie_basis(self.alphabet, self.degrees, n)
        out = self._cache[n]
        if degree is None:
            return out
        return [(lab, p) for lab, p in out if p and poly_degree(p, self.degrees) == degree]

    def contains(self, p: Poly) -> bool:
        """Whether ``p`` (any mix of lengths) lies in the free Lie algebra."""
        by_len: Dict[int, Poly] = {}
        for w, c in p.items():
            if any(x not in self.alphabet for x in w):
                return False
            by_len.setdefault(len(w), {})[w] = c
        for n, part in by_len.items():
            index: Dict[Word, int] = {}
            ech = Echelon()
            for _, b in self.basis(n):
                ech.add({index.setdefault(w, len(index)): c for w, c in b.items()})
            if any(w not in index for w in part):
                return False
            if not ech.contains({index[w]: c for w, c in part.items()}):
                return False
        return True


def is_lie_element(p: Poly, degrees: Sequence[int]) -> bool:
    letters = sorted({x for w in p for x in w})
    return LieSpace(letters, degrees).contains(p)
