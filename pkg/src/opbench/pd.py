"""Chain-level Poincaré duality on finite simplicial complexes.

Letters are the simplices of K, ordered by dimension and then by vertex
tuple; the letter of a k-simplex has degree 1 - k.  The construction:

1. ``d1`` is the simplicial boundary and ``d2`` the symmetrized
   Alexander-Whitney coproduct, both as Lie elements.
2. ``d3, d4, ...`` are found simplex by simplex in increasing dimension, by
   solving ``d1(y) = -(lower terms of d²) - d_i(∂σ)`` inside the free Lie algebra
   on the closure of σ.
3. The same recipe builds a chain map χ from chains into the inner-product
   complex, starting from the symmetrized Alexander-Whitney diagonal.
4. ``f = χ(μ)`` for a fundamental cycle μ.
"""
from __future__ import annotations

import itertools
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .freelie import LieSpace, Poly, Word, bracket, letter, word_degree
from .homotopy import (LEFT, DerivationData, GradedSpace, MPoly, ModuleDerivationData, ModuleMapData,
                       Residual, apply_derivation, check_d_squared, full_to_left, induce_dual_module,
                       module_map_differential, mword_length, symmetry_residual, transpose_map, _fmt_mword)
from .linalg import ExactMatrix, IntegrityError, solve, vec_iadd
from .trees import permutation_sign

Simplex = Tuple[int, ...]


class ComplexError(ValueError):
    """Malformed simplicial complex or cycle input."""


# --------------------------------------------------------------------------- complexes

@dataclass(frozen=True)
class SimplicialComplex:
    simplices: Tuple[Simplex, ...]

    @classmethod
    def from_simplices(cls, top: Sequence[Sequence[int]]) -> "SimplicialComplex":
        faces = set()
        for s in top:
            s = tuple(sorted(s))
            if len(set(s)) != len(s) or not s:
                raise ComplexError(f"bad simplex {s}")
            for k in range(1, len(s) + 1):
                faces.update(itertools.combinations(s, k))
        return cls(tuple(sorted(faces, key=lambda s: (len(s), s))))

    @property
    def index(self) -> Dict[Simplex, int]:
        return {s: i for i, s in enumerate(self.simplices)}

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def dim_of(self, i: int) -> int:
        return len(self.simplices[i]) - 1

    def space(self) -> GradedSpace:
        return GradedSpace(tuple(self.dim_of(i) for i in range(len(self.simplices))),
                           tuple("".join(map(str, s)) for s in self.simplices))

    def boundary(self, i: int) -> Dict[int, Fraction]:
        s = self.simplices[i]
        if len(s) == 1:
            return {}
        idx = self.index
        return {idx[s[:j] + s[j + 1:]]: Fraction((-1) ** j) for j in range(len(s))}

    def closure(self, i: int) -> List[int]:
        idx = self.index
        s = self.simplices[i]
        return sorted(idx[f] for k in range(1, len(s) + 1) for f in itertools.combinations(s, k))


def load_complex(text: str) -> SimplicialComplex:
    """Parse lines ``simplex v0 v1 ... vk``; faces are completed, duplicates rejected."""
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        if toks[0][0] != "simplex":
            raise ComplexError(f"line {lineno}, column {toks[0][1]}: expected 'simplex'")
        if len(toks) == 1:
            raise ComplexError(f"line {lineno}, column {len(line) + 1}: simplex needs vertices")
        verts = []
        for tok, col in toks[1:]:
            if not re.fullmatch(r"\d+", tok):
                raise ComplexError(f"line {lineno}, column {col}: vertex {tok!r} is not a non-negative integer")
            verts.append(int(tok))
        key = tuple(sorted(verts))
        if len(set(verts)) != len(verts):
            raise ComplexError(f"line {lineno}, column {toks[1][1]}: repeated vertex")
        if key in seen:
            raise ComplexError(f"line {lineno}, column {toks[1][1]}: duplicate of line {seen[key]}")
        seen[key] = lineno
    if not seen:
        raise ComplexError("no simplices given")
    return SimplicialComplex.from_simplices(list(seen))


def load_cycle(text: str, K: SimplicialComplex) -> Dict[int, Fraction]:
    """Parse lines ``coeff v0 ... vk``; the listed order fixes the orientation."""
    idx = K.index
    mu: Dict[int, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        try:
            c = Fraction(toks[0][0])
        except (ValueError, ZeroDivisionError):
            raise ComplexError(f"line {lineno}, column {toks[0][1]}: bad coefficient {toks[0][0]!r}") from None
        try:
            verts = [int(t) for t, _ in toks[1:]]
        except ValueError:
            raise ComplexError(f"line {lineno}, column {toks[1][1]}: vertices must be integers") from None
        key = tuple(sorted(verts))
        if key not in idx:
            raise ComplexError(f"line {lineno}, column {toks[1][1] if len(toks) > 1 else 1}: "
                               f"{verts} is not a simplex of the complex")
        sign = permutation_sign(verts, list(key))
        vec_iadd(mu, {idx[key]: sign * c})
    return mu


@dataclass
class CycleVerdict:
    ok: bool
    boundary: Dict[str, Fraction]
    degree: Optional[int]

    def as_dict(self) -> dict:
        return {"verdict": "pass" if self.ok else "fail", "degree": self.degree,
                "boundary": {k: str(v) for k, v in sorted(self.boundary.items())}}


def verify_fundamental_cycle(K: SimplicialComplex, mu: Mapping[int, Fraction]) -> CycleVerdict:
    dims = {K.dim_of(i) for i, c in mu.items() if c}
    if len(dims) > 1:
        raise ComplexError(f"cycle mixes dimensions {sorted(dims)}")
    if dims and dims != {K.dimension}:
        raise ComplexError(f"cycle lives in dimension {dims.pop()}, not the top dimension {K.dimension}")
    bd: Dict[int, Fraction] = {}
    for i, c in mu.items():
        vec_iadd(bd, K.boundary(i), c)
    names = {k: "[" + "".join(map(str, K.simplices[k])) + "]" for k in bd}
    return CycleVerdict(not bd, {names[k]: v for k, v in bd.items()}, dims.pop() if dims else None)


# --------------------------------------------------------------------------- Alexander-Whitney

def aw_terms(K: SimplicialComplex, i: int) -> List[Tuple[int, int, int]]:
    """(p, front face, back face) for the p-th Alexander-Whitney term of simplex i."""
    s = K.simplices[i]
    idx = K.index
    return [(p, idx[s[:p + 1]], idx[s[p:]]) for p in range(len(s))]


def aw_coproduct_symmetrized(K: SimplicialComplex) -> List[Poly]:
    """d2(x_σ) = 1/2 Σ_p (-1)^p [x_front, x_back], a Lie element on the closure of σ."""
    vdeg = K.space().dual_suspended()
    out = []
    for i in range(len(K.simplices)):
        acc: Poly = {}
        for p, a, b in aw_terms(K, i):
            vec_iadd(acc, bracket(letter(a), letter(b), vdeg), Fraction((-1) ** p, 2))
        out.append(acc)
    return out


def boundary_derivation(K: SimplicialComplex) -> List[Poly]:
    return [{(j,): c for j, c in K.boundary(i).items()} for i in range(len(K.simplices))]


# --------------------------------------------------------------------------- local solves

def _solve_local(columns: List[Dict], rhs: Dict, what: str):
    """Solve Σ a_j columns[j] = rhs over a shared key space; raise if infeasible."""
    keys: Dict = {}
    cols = [{keys.setdefault(k, len(keys)): c for k, c in col.items()} for col in columns]
    b = {keys.setdefault(k, len(keys)): c for k, c in rhs.items()}
    m = ExactMatrix.from_columns(len(keys), cols)
    x = solve(m, b) if cols else (None if b else {})
    if x is None:
        raise IntegrityError(f"local equation has no solution: {what}")
    return x


def _length_part(p: Mapping, n: int, length=len) -> dict:
    return {w: c for w, c in p.items() if length(w) == n}


@dataclass
class StageInfo:
    stage: int
    unknowns: int
    nonzero_simplices: int
    seconds: float

    def as_dict(self, timing: bool = False) -> dict:
        d = {"stage": self.stage, "unknowns": self.unknowns, "nonzero_simplices": self.nonzero_simplices}
        if timing:
            d["seconds"] = round(self.seconds, 3)
        return d


@dataclass
class PDAlgebra:
    complex: SimplicialComplex
    d: DerivationData
    N: int
    stages: List[StageInfo] = field(default_factory=list)


def extend_homotopy_comm(K: SimplicialComplex, N: int = 3) -> PDAlgebra:
    """d = d1 + d2 + ... + dN on the free Lie algebra, with d² = 0 modulo words longer than N."""
    if N < 2:
        raise ValueError("N must be at least 2")
    space = K.space()
    vdeg = space.dual_suspended()
    n = len(K.simplices)
    images = [dict(p) for p in boundary_derivation(K)]
    for i, p in enumerate(aw_coproduct_symmetrized(K)):
        vec_iadd(images[i], p)
    d1 = boundary_derivation(K)
    stages = []
    for stage in range(3, N + 1):
        t0 = time.perf_counter()
        new: List[Poly] = [{} for _ in range(n)]
        unknowns = 0
        for s in range(n):  # simplices come in increasing dimension
            sq = _length_part(apply_derivation(images, vdeg, images[s], stage), stage)
            rhs: Poly = {}
            vec_iadd(rhs, sq, -1)
            for f, c in K.boundary(s).items():
                vec_iadd(rhs, new[f], -c)
            lie = LieSpace(K.closure(s), vdeg)
            basis = lie.basis(stage, vdeg[s] + 1)
            unknowns += len(basis)
            cols = [apply_derivation(d1, vdeg, b, stage) for _, b in basis]
            x = _solve_local(cols, rhs, f"d_{stage} on simplex {K.simplices[s]}")
            for j, c in x.items():
                vec_iadd(new[s], basis[j][1], c)
        for s in range(n):
            vec_iadd(images[s], new[s])
        stages.append(StageInfo(stage, unknowns, sum(1 for p in new if p), time.perf_counter() - t0))
    return PDAlgebra(K, DerivationData(space, images, "comm"), N, stages)


def locality_failures(K: SimplicialComplex, images: Sequence[Mapping], letters_of) -> List[str]:
    """Simplices whose image uses a letter outside the closure."""
    bad = []
    for s, img in enumerate(images):
        allowed = set(K.closure(s))
        for key in img:
            if not set(letters_of(key)) <= allowed:
                bad.append(f"{K.simplices[s]}: {key}")
                break
    return bad


# --------------------------------------------------------------------------- module data

def regular_module(A: PDAlgebra) -> ModuleDerivationData:
    """The algebra as a left module over itself: replace the last letter of d(x_σ) by w."""
    space = A.complex.space()
    images = [{(w[:-1], w[-1], ()): c for w, c in p.items()} for p in A.d.images]
    return ModuleDerivationData(A.d, space.dual_suspended(), images, LEFT, space.names)


def aw_sign(p: int, q: int) -> Tuple[int, int]:
    """Signs of u_front -> w_back and u_back -> w_front in χ0 of a (p+q)-simplex, as exponents."""
    return (q * (p + 1)) % 2, p % 2


def chi0(K: SimplicialComplex, s: int) -> List[MPoly]:
    """Symmetrized Alexander-Whitney diagonal of simplex s, as a map u_ρ -> w_τ."""
    out: List[MPoly] = [{} for _ in K.simplices]
    k = K.dim_of(s)
    scale = Fraction((-1) ** (k * (k + 1) // 2), 2)
    for p, a, b in aw_terms(K, s):
        e1, e2 = aw_sign(p, k - p)
        vec_iadd(out[a], {((), b, ()): scale * (-1) ** e1})
        vec_iadd(out[b], {((), a, ()): scale * (-1) ** e2})
    return out


@dataclass
class ChainMap:
    complex: SimplicialComplex
    g: ModuleDerivationData
    h: ModuleDerivationData
    images: List[List[MPoly]]  # images[σ][ρ] = χ(σ)(u_ρ)
    N: int
    stages: List[StageInfo] = field(default_factory=list)

    def as_map(self, s: int) -> ModuleMapData:
        K = self.complex
        sp = K.space()
        return ModuleMapData(sp.suspended(), sp.dual_suspended(), self.images[s],
                             self.g.algebra.letter_degrees, LEFT)

    def apply(self, chain: Mapping[int, Fraction]) -> List[MPoly]:
        out: List[MPoly] = [{} for _ in self.complex.simplices]
        for s, c in chain.items():
            for r, img in enumerate(self.images[s]):
                vec_iadd(out[r], img, c)
        return out


def _map(K: SimplicialComplex, vdeg, images: List[MPoly]) -> ModuleMapData:
    sp = K.space()
    return ModuleMapData(sp.suspended(), sp.dual_suspended(), images, vdeg, LEFT)


def _local_module_basis(K: SimplicialComplex, s: int, length: int, degree: int, vdeg) -> List[Tuple[int, Word, int]]:
    sp = K.space()
    ud, wd = sp.suspended(), sp.dual_suspended()
    cl = K.closure(s)
    out = []
    for r in cl:
        for word in itertools.product(cl, repeat=length):
            wdeg_ = word_degree(word, vdeg)
            for t in cl:
                if wdeg_ + wd[t] - ud[r] == degree:
                    out.append((r, word, t))
    return out


def _antisymmetrize(K: SimplicialComplex, vdeg, imgs: List[MPoly]) -> List[MPoly]:
    """f - f^T in left form; these span the maps that pass the symmetry check."""
    t = transpose_map(_map(K, vdeg, imgs), K.space().dual_suspended())
    out = [dict(x) for x in imgs]
    for r, x in enumerate(t.images):
        vec_iadd(out[r], full_to_left(x), -1)
    return out


def build_chain_map_chi(A: PDAlgebra, N: Optional[int] = None, symmetric: bool = False) -> ChainMap:
    """χ = χ0 + ... + χ_{N-1} with D∘χ = χ∘d1 modulo module words longer than N.

    With ``symmetric`` the local unknowns range over maps f with f^T = -f
    only.  D preserves that subspace and χ0 lies in it, so the solves stay
    feasible and every χ(σ) passes the symmetry check.
    """
    K = A.complex
    N = A.N if N is None else N
    g = regular_module(A)
    h = induce_dual_module(g, K.space())
    vdeg = A.d.letter_degrees
    n = len(K.simplices)
    images = [chi0(K, s) for s in range(n)]
    stages = []
    for i in range(1, N):
        t0 = time.perf_counter()
        new: List[List[MPoly]] = [[{} for _ in range(n)] for _ in range(n)]
        unknowns = 0
        for s in range(n):
            k = K.dim_of(s)
            low = module_map_differential(_map(K, vdeg, images[s]), g, h, i + 1)
            rhs: Dict = {}
            for r in range(n):
                for w, c in low[r].items():
                    if mword_length(w) == i + 1:
                        vec_iadd(rhs, {(r, w): -c})
            for f, c in K.boundary(s).items():
                for r in range(n):
                    vec_iadd(rhs, {(r, w): x for w, x in new[f][r].items()}, c)
            basis = _local_module_basis(K, s, i, -k, vdeg)
            unknowns += len(basis)
            cols, vecs = [], []
            for r, word, t in basis:
                imgs: List[MPoly] = [{} for _ in range(n)]
                imgs[r] = {(word, t, ()): Fraction(1)}
                if symmetric:
                    imgs = _antisymmetrize(K, vdeg, imgs)
                vecs.append(imgs)
                dm = module_map_differential(_map(K, vdeg, imgs), g, h, i + 1)
                cols.append({(q, w): c for q in range(n) for w, c in dm[q].items() if mword_length(w) == i + 1})
            x = _solve_local(cols, rhs, f"χ_{i} on simplex {K.simplices[s]}")
            for j, c in x.items():
                for r, img in enumerate(vecs[j]):
                    vec_iadd(new[s][r], img, c)
        for s in range(n):
            for r in range(n):
                vec_iadd(images[s][r], new[s][r])
        stages.append(StageInfo(i, unknowns, sum(1 for s in range(n) if any(new[s])), time.perf_counter() - t0))
    return ChainMap(K, g, h, images, N, stages)


def chain_map_residual(chi: ChainMap) -> Residual:
    """D(χ(σ)) - χ(∂σ) for every simplex, modulo module words longer than N."""
    K = chi.complex
    support = {}
    for s in range(len(K.simplices)):
        dm = module_map_differential(chi.as_map(s), chi.g, chi.h, chi.N)
        for f, c in K.boundary(s).items():
            for r in range(len(K.simplices)):
                vec_iadd(dm[r], {w: x for w, x in chi.images[f][r].items() if mword_length(w) <= chi.N}, -c)
        bad = {f"u{K.space().names[r]}:{_fmt_mword(w)}": c for r in range(len(dm)) for w, c in dm[r].items()}
        if bad:
            support[K.space().names[s]] = bad
    return Residual("D∘χ-χ∘d1", support, chi.N)


# --------------------------------------------------------------------------- inner product

def cap_pairing(K: SimplicialComplex, mu: Mapping[int, Fraction]) -> Dict[Tuple[int, int], Fraction]:
    """The lowest inner product: χ0(μ) read as a pairing (ρ, τ) -> coefficient of u_ρ -> w_τ."""
    out: Dict[Tuple[int, int], Fraction] = {}
    for s, c in mu.items():
        for r, img in enumerate(chi0(K, s)):
            for (pre, t, _), x in img.items():
                vec_iadd(out, {(r, t): c * x})
    return out


@dataclass
class PDReport:
    complex: SimplicialComplex
    N: int
    cycle: CycleVerdict
    d_squared: Residual
    coinvariance: Dict[int, Poly]
    locality: List[str]
    chi_locality: List[str]
    chi_residual: Residual
    f: Optional[ModuleMapData]
    f_residual: Residual
    lowest_matches_cap: bool
    symmetry: Residual
    algebra_stages: List[StageInfo]
    chi_stages: List[StageInfo]

    @property
    def ok(self) -> bool:
        """Everything required of the construction; symmetry is reported separately."""
        return (self.cycle.ok and self.d_squared.ok and not self.coinvariance and not self.locality
                and not self.chi_locality and self.chi_residual.ok and self.f_residual.ok
                and self.lowest_matches_cap)

    def f_coefficients(self) -> Dict[str, Dict[str, str]]:
        if self.f is None:
            return {}
        names = self.complex.space().names
        return {f"u{names[r]}": {_fmt_mword(w, names, names): str(c) for w, c in sorted(img.items())}
                for r, img in enumerate(self.f.images) if img}

    def as_dict(self, timing: bool = False) -> dict:
        return {
            "complex": ["".join(map(str, s)) for s in self.complex.simplices],
            "truncation": self.N,
            "cycle": self.cycle.as_dict(),
            "d_squared": self.d_squared.as_dict(),
            "lie_images": "pass" if not self.coinvariance else "fail",
            "locality": {"d": self.locality, "chi": self.chi_locality},
            "chain_map": self.chi_residual.as_dict(),
            "f_differential": self.f_residual.as_dict(),
            "lowest_matches_cap": self.lowest_matches_cap,
            "symmetry": self.symmetry.as_dict(),
            "stages": {"d": [s.as_dict(timing) for s in self.algebra_stages],
                       "chi": [s.as_dict(timing) for s in self.chi_stages]},
            "f": self.f_coefficients(),
            "verdict": "pass" if self.ok else "fail",
        }


def inner_product_from_cycle(chi: ChainMap, mu: Mapping[int, Fraction]) -> Tuple[ModuleMapData, Residual]:
    """f = χ(μ) together with the residual of D(f) modulo truncation."""
    K = chi.complex
    vdeg = chi.g.algebra.letter_degrees
    f = _map(K, vdeg, chi.apply(mu))
    dm = module_map_differential(f, chi.g, chi.h, chi.N)
    names = K.space().names
    support = {f"u{names[r]}": {_fmt_mword(w): c for w, c in img.items()} for r, img in enumerate(dm) if img}
    return f, Residual("D(f)", support, chi.N)


def run_pd(K: SimplicialComplex, mu: Mapping[int, Fraction], N: int = 3, symmetric: bool = False) -> PDReport:
    cyc = verify_fundamental_cycle(K, mu)
    A = extend_homotopy_comm(K, N)
    chi = build_chain_map_chi(A, symmetric=symmetric)
    f, f_res = inner_product_from_cycle(chi, mu)
    lowest: Dict[Tuple[int, int], Fraction] = {}
    for r, img in enumerate(f.images):
        for (pre, t, _), c in img.items():
            if not pre:
                vec_iadd(lowest, {(r, t): c})
    cap = cap_pairing(K, mu)
    sym = symmetry_residual(f, N)
    return PDReport(
        K, N, cyc, check_d_squared(A.d, N), A.d.check_coinvariance(),
        locality_failures(K, A.d.images, lambda w: w),
        locality_failures(K, [{(r,) + w[0] + (w[1],): 1 for r, img in enumerate(imgs) for w in img}
                              for imgs in chi.images], lambda w: w),
        chain_map_residual(chi), f, f_res, lowest == cap,
        Residual("symmetry", {k: {"coefficient": v} for k, v in sym.items()}, N),
        A.stages, chi.stages)
