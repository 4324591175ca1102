"""Exact sparse linear algebra over the rationals.

Vectors are plain dicts ``index -> Fraction`` with no stored zeros.  Matrices
are :class:`ExactMatrix` objects holding the same kind of dict keyed by
``(row, col)``.  Nothing here ever touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple


class IntegrityError(RuntimeError):
    """An algebraic identity that must hold exactly was violated."""


Vector = Dict[int, Fraction]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not allowed in exact computations")
    return Fraction(x)


def vec_add(a: Mapping, b: Mapping, scale=1) -> dict:
    """Return a + scale*b as a new sparse vector (keys may be any hashable)."""
    out = dict(a)
    if scale == 0:
        return out
    for k, v in b.items():
        w = out.get(k, 0) + scale * v
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out


def vec_iadd(a: dict, b: Mapping, scale=1) -> dict:
    """In-place a += scale*b."""
    if scale == 0:
        return a
    for k, v in b.items():
        w = a.get(k, 0) + scale * v
        if w:
            a[k] = w
        else:
            a.pop(k, None)
    return a


def vec_scale(a: Mapping, s) -> dict:
    if s == 0:
        return {}
    return {k: s * v for k, v in a.items()}


@dataclass(frozen=True)
class ExactMatrix:
    rows: int
    cols: int
    entries: Mapping[Tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry ({r},{c}) outside a {self.rows}x{self.cols} matrix")
            v = as_fraction(v)
            if v:
                clean[(r, c)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "ExactMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        ent = {(i, j): as_fraction(x) for i, row in enumerate(rows) for j, x in enumerate(row) if x}
        return cls(nr, nc, ent)

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Mapping[int, Fraction]]) -> "ExactMatrix":
        ent = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    ent[(i, j)] = v
        return cls(nrows, len(columns), ent)

    @classmethod
    def zero(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    def row_dicts(self) -> List[Vector]:
        out: List[Vector] = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def col_dicts(self) -> List[Vector]:
        out: List[Vector] = [dict() for _ in range(self.cols)]
        for (r, c), v in self.entries.items():
            out[c][r] = v
        return out

    def to_dense(self) -> List[List[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        left = self.row_dicts()
        right = other.row_dicts()
        ent: Dict[Tuple[int, int], Fraction] = {}
        for i, row in enumerate(left):
            acc: Dict[int, Fraction] = {}
            for k, a in row.items():
                vec_iadd(acc, right[k], a)
            for j, v in acc.items():
                ent[(i, j)] = v
        return ExactMatrix(self.rows, other.cols, ent)

    def apply(self, x: Mapping[int, Fraction]) -> Vector:
        out: Vector = {}
        for (r, c), v in self.entries.items():
            xc = x.get(c)
            if xc:
                w = out.get(r, 0) + v * xc
                if w:
                    out[r] = w
                else:
                    out.pop(r, None)
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def nnz(self) -> int:
        return len(self.entries)


class Echelon:
    """Incrementally maintained row-echelon basis of a subspace.

    Rows are inserted in order; each new row is reduced against the existing
    pivots (in insertion order) and, if nonzero, gets its smallest remaining
    column as pivot and is normalized to 1 there.  ``reduce`` returns the
    unique representative of a vector modulo the span with zeros at all pivot
    columns, which doubles as a normal form for quotient spaces.
    """

    def __init__(self):
        self.pivots: List[int] = []
        self.rows: Dict[int, dict] = {}

    def __len__(self):
        return len(self.pivots)

    def reduce(self, v: Mapping) -> dict:
        w = dict(v)
        for p in self.pivots:
            c = w.get(p)
            if c:
                vec_iadd(w, self.rows[p], -c)
        return w

    def add(self, v: Mapping) -> bool:
        w = self.reduce(v)
        if not w:
            return False
        p = min(w)
        inv = 1 / Fraction(w[p])
        w = {k: x * inv for k, x in w.items()}
        self.pivots.append(p)
        self.rows[p] = w
        return True

    def contains(self, v: Mapping) -> bool:
        return not self.reduce(v)


def rank(m: ExactMatrix) -> int:
    ech = Echelon()
    for row in m.row_dicts():
        if row:
            ech.add(row)
    return len(ech)


def nullspace(m: ExactMatrix) -> List[Vector]:
    """Basis of {x : m x = 0}, one vector per free column of the RREF."""
    rows = [r for r in m.row_dicts() if r]
    ech = Echelon()
    for r in rows:
        ech.add(r)
    # full back-reduction so each pivot row involves only free columns
    piv = list(ech.pivots)
    full = {p: dict(ech.rows[p]) for p in piv}
    for p in reversed(piv):
        row = full[p]
        for q in piv:
            if q == p:
                continue
            c = full[q].get(p)
            if c:
                vec_iadd(full[q], row, -c)
    pivset = set(piv)
    free = [j for j in range(m.cols) if j not in pivset]
    basis = []
    for f in free:
        x: Vector = {f: Fraction(1)}
        for p in piv:
            c = full[p].get(f)
            if c:
                x[p] = -c
        basis.append(x)
    return basis


def solve(m: ExactMatrix, b: Sequence | Mapping[int, Fraction]) -> Optional[Vector]:
    """A particular solution of m x = b, or None when the system is inconsistent.

    Rows are processed in index order, pivots are the smallest available
    column, and free variables are set to zero, so the answer is
    deterministic.
    """
    if isinstance(b, Mapping):
        bvec = {i: as_fraction(v) for i, v in b.items() if v}
        if any(not (0 <= i < m.rows) for i in bvec):
            raise ValueError("right-hand side index out of range")
    else:
        if len(b) != m.rows:
            raise ValueError(f"right-hand side has length {len(b)}, expected {m.rows}")
        bvec = {i: as_fraction(v) for i, v in enumerate(b) if v}
    rows = m.row_dicts()
    piv_order: List[int] = []
    prow: Dict[int, dict] = {}
    prhs: Dict[int, Fraction] = {}
    for i, row in enumerate(rows):
        w = dict(row)
        r = bvec.get(i, Fraction(0))
        for p in piv_order:
            c = w.get(p)
            if c:
                vec_iadd(w, prow[p], -c)
                r -= c * prhs[p]
        if not w:
            if r != 0:
                return None
            continue
        p = min(w)
        inv = 1 / w[p]
        prow[p] = {k: x * inv for k, x in w.items()}
        prhs[p] = r * inv
        piv_order.append(p)
    x: Vector = {}
    for p in reversed(piv_order):
        s = prhs[p]
        for k, c in prow[p].items():
            if k != p:
                xv = x.get(k)
                if xv:
                    s -= c * xv
        if s:
            x[p] = s
    return x


@dataclass
class ChainComplexData:
    """Cochain complex: ``differentials[d]`` maps degree d to degree d+1."""

    dims: Dict[int, int]
    differentials: Dict[int, ExactMatrix]
    check: bool = True

    def __post_init__(self):
        degs = sorted(self.dims)
        if degs and degs != list(range(degs[0], degs[-1] + 1)):
            raise ValueError("degrees must form a contiguous range")
        for d, m in self.differentials.items():
            src = self.dims.get(d, 0)
            tgt = self.dims.get(d + 1, 0)
            if (m.rows, m.cols) != (tgt, src):
                raise ValueError(f"differential at degree {d} has shape {m.rows}x{m.cols}, expected {tgt}x{src}")
        if self.check:
            self.verify_square_zero()

    @property
    def degrees(self) -> List[int]:
        return sorted(self.dims)

    def diff(self, d: int) -> ExactMatrix:
        m = self.differentials.get(d)
        if m is None:
            return ExactMatrix.zero(self.dims.get(d + 1, 0), self.dims.get(d, 0))
        return m

    def verify_square_zero(self):
        for d in self.degrees:
            a = self.differentials.get(d)
            b = self.differentials.get(d + 1)
            if a is None or b is None:
                continue
            prod = b @ a
            if not prod.is_zero():
                raise IntegrityError(f"d∘d is nonzero at degree {d} ({prod.nnz()} entries)")

    def euler_characteristic(self) -> int:
        return sum((-1) ** (d % 2) * n for d, n in self.dims.items())


def homology_dims(c: ChainComplexData) -> Dict[int, int]:
    c.verify_square_zero()
    ranks = {d: rank(c.diff(d)) for d in c.degrees}
    out = {}
    for d in c.degrees:
        ker = c.dims[d] - ranks[d]
        im = ranks.get(d - 1, 0)
        out[d] = ker - im
    return out
