"""Quadratic colored operads: free spaces, relation ideals, quotient tables, duals.

Decorated binary trees are nested tuples: a leaf is its integer label and an
internal vertex is ``(name, left, right)`` where ``name`` is a generator in
``E^{y,z}_x`` with ``y``/``z`` the output colors of ``left``/``right``.  A
generator's S2 data identifies ``(a, L, R)`` with ``s * (b, R, L)`` whenever
``swap[a] == (s, b)``; canonical representatives put the child with the
smaller leaf key on the left.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import trees as tr
from .linalg import Echelon, ExactMatrix, IntegrityError, nullspace, rank, vec_iadd
from .trees import FULL, NONE, ColorError, Signature, label_key

DTree = Union[int, tuple]
FreeVec = Dict[DTree, Fraction]


class PresentationError(ValueError):
    """Quadratic data is inconsistent (bad action, relations not S-closed, ...)."""


# ---------------------------------------------------------------------------
# generators


class GeneratorData:
    """Binary generators ``E^{y,z}_x`` with an S2 action by signed permutations.

    ``tau`` optionally gives the rotation ``τ3`` on ``E^{f,f}_f`` as a map
    name -> {name: coeff}, making the data cyclic.  Odd elements of S3 act
    through ``swap`` and even ones through powers of ``tau``.
    """

    def __init__(self, spaces: Mapping[Tuple[str, str, str], Sequence[str]],
                 swap: Mapping[str, Tuple[int, str]],
                 tau: Optional[Mapping[str, Mapping[str, Fraction]]] = None):
        self.spaces: Dict[Tuple[str, str, str], Tuple[str, ...]] = {}
        self.type_of: Dict[str, Tuple[str, str, str]] = {}
        for typ, names in spaces.items():
            typ = tuple(typ)
            if len(typ) != 3 or typ[0] not in tr.COLORS or typ[1] not in tr.COLORS or typ[2] not in tr.OUTPUTS:
                raise PresentationError(f"bad generator type {typ}")
            self.spaces[typ] = tuple(names)
            for n in names:
                if n in self.type_of:
                    raise PresentationError(f"generator name {n!r} used twice")
                self.type_of[n] = typ
        self.swap: Dict[str, Tuple[int, str]] = {k: (int(s), b) for k, (s, b) in swap.items()}
        self.tau = None if tau is None else {k: {n: Fraction(c) for n, c in v.items() if c} for k, v in tau.items()}
        self._validate()

    def _validate(self):
        for a, typ in self.type_of.items():
            if a not in self.swap:
                raise PresentationError(f"no S2 action given for {a!r}")
            s, b = self.swap[a]
            if s not in (1, -1):
                raise PresentationError(f"swap sign of {a!r} must be ±1")
            if b not in self.type_of:
                raise PresentationError(f"swap of {a!r} names unknown generator {b!r}")
            y, z, x = typ
            if self.type_of[b] != (z, y, x):
                raise PresentationError(f"swap of {a!r} has type {self.type_of[b]}, expected {(z, y, x)}")
            s2, a2 = self.swap[b]
            if a2 != a or s * s2 != 1:
                raise PresentationError(f"swap is not an involution on {a!r}")
        if self.tau is not None:
            names = self.spaces.get((FULL, FULL, FULL), ())
            if set(self.tau) != set(names):
                raise PresentationError("tau must be given on exactly the full generators")
            t = self.tau_matrix()
            ident = {(n, n): Fraction(1) for n in names}
            if _mat_mul(t, _mat_mul(t, t)) != ident:
                raise PresentationError("tau does not have order 3")
            s = self.swap_matrix()
            st = _mat_mul(s, t)
            if _mat_mul(st, st) != ident:
                raise PresentationError("swap and tau do not generate an S3 action")

    @property
    def names(self) -> List[str]:
        return [n for typ in sorted(self.spaces) for n in self.spaces[typ]]

    def colors(self) -> Tuple[set, set]:
        ins, outs = set(), set()
        for y, z, x in self.spaces:
            if self.spaces[(y, z, x)]:
                ins |= {y, z}
                outs.add(x)
        return ins, outs

    def is_cyclic(self) -> bool:
        return self.tau is not None

    def swap_matrix(self) -> Dict[Tuple[str, str], Fraction]:
        names = self.spaces.get((FULL, FULL, FULL), ())
        out = {}
        for a in names:
            s, b = self.swap[a]
            out[(b, a)] = Fraction(s)
        return out

    def tau_matrix(self) -> Dict[Tuple[str, str], Fraction]:
        out = {}
        if self.tau is None:
            names = self.spaces.get((FULL, FULL, FULL), ())
            return {(a, a): Fraction(1) for a in names}
        for a, col in self.tau.items():
            for b, c in col.items():
                out[(b, a)] = c
        return out

    def s3_matrix(self, rho: Sequence[int]) -> Dict[Tuple[str, str], Fraction]:
        """Matrix of the leg relabeling ``k -> rho[k-1]`` on ``E^{f,f}_f``."""
        word = _s3_word(tuple(rho))
        names = self.spaces.get((FULL, FULL, FULL), ())
        m = {(a, a): Fraction(1) for a in names}
        s, t = self.swap_matrix(), self.tau_matrix()
        for g in word:
            m = _mat_mul(m, s if g == "s" else t)
        return m


def _mat_mul(a, b):
    out: Dict[Tuple[str, str], Fraction] = {}
    for (i, k), x in a.items():
        for (k2, j), y in b.items():
            if k == k2:
                v = out.get((i, j), 0) + x * y
                if v:
                    out[(i, j)] = v
                else:
                    out.pop((i, j), None)
    return out


def _perm_mul(p, q):
    return tuple(p[q[i] - 1] for i in range(len(q)))


_S = (2, 1, 3)
_T = (2, 3, 1)


def _s3_word(rho) -> List[str]:
    # breadth-first search for a word in s, t whose product is rho
    words = {(1, 2, 3): []}
    frontier = [(1, 2, 3)]
    while rho not in words:
        nxt = []
        for p in frontier:
            for g, gp in (("s", _S), ("t", _T)):
                q = _perm_mul(p, gp)
                if q not in words:
                    words[q] = words[p] + [g]
                    nxt.append(q)
        frontier = nxt
    return words[rho]


# ---------------------------------------------------------------------------
# decorated binary trees


def dt_leaves(t: DTree) -> List[int]:
    if isinstance(t, int):
        return [t]
    return dt_leaves(t[1]) + dt_leaves(t[2])


def dt_min(t: DTree) -> int:
    if isinstance(t, int):
        return label_key(t)
    return min(dt_min(t[1]), dt_min(t[2]))


def dt_color(t: DTree, gens: GeneratorData, leaf_colors: Mapping[int, str]) -> str:
    if isinstance(t, int):
        return leaf_colors[t]
    return gens.type_of[t[0]][2]


def dt_canon(t: DTree, gens: GeneratorData) -> Tuple[DTree, int]:
    if isinstance(t, int):
        return t, 1
    a, left, right = t
    left, s1 = dt_canon(left, gens)
    right, s2 = dt_canon(right, gens)
    if dt_min(right) < dt_min(left):
        s, b = gens.swap[a]
        return (b, right, left), s1 * s2 * s
    return (a, left, right), s1 * s2


def dt_relabel(t: DTree, f) -> DTree:
    if isinstance(t, int):
        return f(t)
    return (t[0], dt_relabel(t[1], f), dt_relabel(t[2], f))


def dt_graft(t1: DTree, i: int, t2: DTree) -> DTree:
    n2 = len(dt_leaves(t2))
    r2 = dt_relabel(t2, lambda l: l + i - 1)

    def put(t):
        if isinstance(t, int):
            if t == i:
                return r2
            return t if t < i else t + n2 - 1
        return (t[0], put(t[1]), put(t[2]))

    return put(t1)


def dt_shape(t: DTree) -> tr.Node:
    """Undecorated trees-module version (all edges full; only the shape matters)."""
    if isinstance(t, int):
        return tr.Leaf(t)
    return tr.Vertex((dt_shape(t[1]), dt_shape(t[2])))


def dt_str(t: DTree) -> str:
    if isinstance(t, int):
        return str(t)
    return f"{t[0]}({dt_str(t[1])},{dt_str(t[2])})"


def det_reference_sign(t: DTree) -> int:
    """Orientation of the canonical edge order against (internal edges, then leaves 1..n)."""
    node = dt_shape(t)
    edges = tr.dfs_edges(node)
    internal = [e for e in edges if len(e) > 1]
    ref = internal + [frozenset({l}) for l in sorted(dt_leaves(t))]
    return tr.permutation_sign(ref, edges)


def canon_vector(v: Mapping[DTree, Fraction], gens: GeneratorData) -> FreeVec:
    out: FreeVec = {}
    for t, c in v.items():
        ct, s = dt_canon(t, gens)
        vec_iadd(out, {ct: Fraction(c) * s})
    return out


def leaf_colors_of(sig: Signature) -> Dict[int, str]:
    return {i + 1: c for i, c in enumerate(sig.inputs)}


def check_tree_colors(t: DTree, gens: GeneratorData, sig: Signature) -> None:
    cols = leaf_colors_of(sig)
    if sorted(dt_leaves(t)) != list(range(1, sig.arity + 1)):
        raise PresentationError(f"tree {dt_str(t)} does not have leaves 1..{sig.arity}")

    def walk(u, top):
        if isinstance(u, int):
            return cols[u]
        typ = gens.type_of.get(u[0])
        if typ is None:
            raise PresentationError(f"unknown generator {u[0]!r}")
        if walk(u[1], False) != typ[0] or walk(u[2], False) != typ[1]:
            raise ColorError(f"colors do not match generator {u[0]} in {dt_str(t)}")
        if typ[2] == NONE and not top:
            raise ColorError("a generator with empty output can only sit at the root")
        return typ[2]

    if walk(t, True) != sig.output:
        raise ColorError(f"tree {dt_str(t)} has the wrong output color")


def sig_of_tree(t: DTree, gens: GeneratorData, leaf_colors: Mapping[int, str]) -> Signature:
    labs = sorted(dt_leaves(t))
    return Signature(tuple(leaf_colors[l] for l in labs), dt_color(t, gens, leaf_colors))


# ---------------------------------------------------------------------------
# free spaces

_FREE_CACHE: Dict[tuple, List[DTree]] = {}


def free_space(gens: GeneratorData, sig: Signature) -> List[DTree]:
    """Canonical decorated binary trees forming a basis of F(E)(sig)."""
    key = (id(gens), sig, tr.current_order_seed())
    hit = _FREE_CACHE.get(key)
    if hit is not None and hit[0] is gens:
        return hit[1]
    cols = leaf_colors_of(sig)
    by_out: Dict[str, List[Tuple[str, str, str]]] = {}
    for (y, z, x), names in gens.spaces.items():
        for n in names:
            by_out.setdefault(x, []).append((y, z, n))
    memo: Dict[Tuple[Tuple[int, ...], str, bool], List[DTree]] = {}

    def build(labels: Tuple[int, ...], color: str, top: bool) -> List[DTree]:
        k = (labels, color, top)
        if k in memo:
            return memo[k]
        res: List[DTree] = []
        if len(labels) == 1:
            if cols[labels[0]] == color:
                res.append(labels[0])
        elif color != NONE or top:
            first = min(labels, key=label_key)
            rest = [l for l in labels if l != first]
            for r in range(0, len(rest)):
                for extra in itertools.combinations(rest, r):
                    left = tuple(sorted((first,) + extra))
                    right = tuple(l for l in rest if l not in extra)
                    for y, z, name in by_out.get(color, ()):
                        if gens.type_of[name][2] == NONE and not top:
                            continue
                        for lt in build(left, y, False):
                            for rt in build(right, z, False):
                                res.append((name, lt, rt))
        memo[k] = res
        return res

    out = build(tuple(range(1, sig.arity + 1)), sig.output, True)
    out.sort(key=dt_str)
    _FREE_CACHE[key] = (gens, out)
    return out


# ---------------------------------------------------------------------------
# presentations


@dataclass
class OperadPresentation:
    """Generators plus arity-3 relations (vectors over decorated trees, any representative)."""

    name: str
    gens: GeneratorData
    relations: Dict[Signature, List[Dict[DTree, Fraction]]] = field(default_factory=dict)
    check: bool = True

    def __post_init__(self):
        rels = {}
        for sig, vecs in self.relations.items():
            if sig.arity != 3:
                raise PresentationError("relations must have three inputs")
            clean = []
            for v in vecs:
                v = {t: Fraction(c) for t, c in v.items() if c}
                for t in v:
                    check_tree_colors(t, self.gens, sig)
                if v:
                    clean.append(v)
            if clean:
                rels[sig] = clean
        self.relations = rels
        if self.check:
            validate_s_closed(self)

    def relation_signatures(self) -> List[Signature]:
        return sorted(self.relations, key=str)


def _act_free_vec(v: Mapping[DTree, Fraction], sigma: Sequence[int], gens) -> FreeVec:
    return canon_vector({dt_relabel(t, lambda l: sigma[l - 1]): c for t, c in v.items()}, gens)


def permute_sig(sig: Signature, sigma: Sequence[int]) -> Signature:
    ins = [None] * sig.arity
    for l in range(1, sig.arity + 1):
        ins[sigma[l - 1] - 1] = sig.inputs[l - 1]
    return Signature(tuple(ins), sig.output)


def _span_echelon(gens, sig, vecs, index) -> Echelon:
    ech = Echelon()
    for v in vecs:
        cv = canon_vector(v, gens)
        ech.add({index[t]: c for t, c in cv.items()})
    return ech


def validate_s_closed(p: OperadPresentation) -> None:
    """Reject relation sets whose span is not stable under S3."""
    for sig, vecs in p.relations.items():
        for sigma in itertools.permutations((1, 2, 3)):
            tsig = permute_sig(sig, sigma)
            basis = free_space(p.gens, tsig)
            index = {t: i for i, t in enumerate(basis)}
            ech = _span_echelon(p.gens, tsig, p.relations.get(tsig, []), index)
            for v in vecs:
                w = _act_free_vec(v, sigma, p.gens)
                if not ech.contains({index[t]: c for t, c in w.items()}):
                    raise PresentationError(
                        f"relations are not closed under the permutation {sigma} at {sig}")


def s_closure(gens: GeneratorData, relations: Mapping[Signature, Sequence[Mapping[DTree, Fraction]]]):
    """Add all S3 translates of the given relations."""
    out: Dict[Signature, List[FreeVec]] = {}
    for sig, vecs in relations.items():
        for v in vecs:
            for sigma in itertools.permutations((1, 2, 3)):
                out.setdefault(permute_sig(sig, sigma), []).append(_act_free_vec(v, sigma, gens))
    return out


def _local_relation_rows(p: OperadPresentation, sig: Signature, cache: dict) -> List[FreeVec]:
    """Echelon-reduced basis of the relation span at an arity-3 signature."""
    key = (sig, tr.current_order_seed())
    if key in cache:
        return cache[key]
    basis = free_space(p.gens, sig)
    index = {t: i for i, t in enumerate(basis)}
    ech = _span_echelon(p.gens, sig, p.relations.get(sig, []), index)
    rows = [{basis[i]: c for i, c in ech.rows[piv].items()} for piv in ech.pivots]
    cache[key] = rows
    return rows


def _edge_contexts(t: DTree):
    """Yield (rebuild, pieces, vertex) for each internal edge: a vertex and one internal child."""
    if isinstance(t, int):
        return
    a, left, right = t
    for side in (1, 2):
        child = t[side]
        other = t[3 - side]
        if not isinstance(child, int):
            yield (lambda sub: sub), (child[1], child[2], other), t
    for side in (1, 2):
        child = t[side]
        for rebuild, pieces, v in _edge_contexts(child):
            if side == 1:
                yield (lambda sub, rb=rebuild: (a, rb(sub), right)), pieces, v
            else:
                yield (lambda sub, rb=rebuild: (a, left, rb(sub))), pieces, v


def relation_consequences(p: OperadPresentation, sig: Signature, _cache: Optional[dict] = None) -> List[FreeVec]:
    """Spanning set of the ideal (R) inside F(E)(sig): one relation at one internal edge."""
    cache = {} if _cache is None else _cache
    cols = leaf_colors_of(sig)
    out: List[FreeVec] = []
    if sig.arity < 3:
        return out
    for t in free_space(p.gens, sig):
        for rebuild, pieces, v in _edge_contexts(t):
            pieces = sorted(pieces, key=dt_min)
            local = Signature(tuple(dt_color(x, p.gens, cols) for x in pieces), p.gens.type_of[v[0]][2])
            for rel in _local_relation_rows(p, local, cache):
                vec: FreeVec = {}
                for t3, c in rel.items():
                    sub = _substitute(t3, pieces)
                    full, s = dt_canon(rebuild(sub), p.gens)
                    vec_iadd(vec, {full: c * s})
                if vec:
                    out.append(vec)
    return out


def _substitute(t3: DTree, pieces) -> DTree:
    if isinstance(t3, int):
        return pieces[t3 - 1]
    return (t3[0], _substitute(t3[1], pieces), _substitute(t3[2], pieces))


# ---------------------------------------------------------------------------
# quotient tables


@dataclass(frozen=True)
class Elem:
    sig: Signature
    coeffs: Mapping[int, Fraction]


@dataclass
class _Space:
    free: List[DTree]
    index: Dict[DTree, int]
    ideal: Echelon
    reps: List[int]  # free indices of the quotient basis
    coord: Dict[int, int]


class OperadTable:
    """Realization of F(E)/(R) for all signatures up to ``max_arity``, computed on demand.

    The quotient basis of each space consists of the free basis trees at
    non-pivot columns of the ideal's echelon form; ``reduce`` maps any free
    vector to coordinates in that basis.
    """

    def __init__(self, presentation: OperadPresentation, max_arity: int):
        if max_arity < 1:
            raise ValueError("max_arity must be positive")
        self.presentation = presentation
        self.gens = presentation.gens
        self.max_arity = max_arity
        self.seed = tr.current_order_seed()
        self._spaces: Dict[Signature, _Space] = {}
        self._rel_cache: dict = {}
        self._compose_cache: Dict[tuple, Dict[int, Fraction]] = {}

    @property
    def name(self) -> str:
        return self.presentation.name

    def _ctx(self):
        return tr.leaf_order(self.seed)

    def _check(self, sig: Signature):
        if sig.arity > self.max_arity:
            raise ValueError(f"arity {sig.arity} exceeds the realized bound {self.max_arity}")

    def space(self, sig: Signature) -> _Space:
        sp = self._spaces.get(sig)
        if sp is not None:
            return sp
        self._check(sig)
        with self._ctx():
            free = free_space(self.gens, sig)
            index = {t: i for i, t in enumerate(free)}
            ech = Echelon()
            for v in relation_consequences(self.presentation, sig, self._rel_cache):
                ech.add({index[t]: c for t, c in v.items()})
        piv = set(ech.pivots)
        reps = [i for i in range(len(free)) if i not in piv]
        sp = _Space(free, index, ech, reps, {r: k for k, r in enumerate(reps)})
        self._spaces[sig] = sp
        return sp

    def free_dim(self, sig: Signature) -> int:
        return len(self.space(sig).free)

    def relation_dim(self, sig: Signature) -> int:
        return len(self.space(sig).ideal)

    def dim(self, sig: Signature) -> int:
        if sig.arity == 1:
            return 1 if sig.inputs[0] == sig.output else 0
        return len(self.space(sig).reps)

    def basis(self, sig: Signature) -> List[DTree]:
        if sig.arity == 1:
            return [1] if sig.inputs[0] == sig.output else []
        sp = self.space(sig)
        return [sp.free[i] for i in sp.reps]

    def reduce(self, sig: Signature, v: Mapping[DTree, Fraction]) -> Dict[int, Fraction]:
        """Coordinates in the quotient basis of a vector of (not necessarily canonical) trees."""
        if sig.arity == 1:
            c = sum((Fraction(x) for t, x in v.items()), Fraction(0))
            return {0: c} if c else {}
        sp = self.space(sig)
        with self._ctx():
            cv = canon_vector(v, self.gens)
        w = sp.ideal.reduce({sp.index[t]: c for t, c in cv.items()})
        return {sp.coord[i]: c for i, c in w.items()}

    def lift(self, sig: Signature, coords: Mapping[int, Fraction]) -> FreeVec:
        reps = self.basis(sig)
        return {reps[k]: Fraction(c) for k, c in coords.items() if c}

    def unit(self, color: str = FULL) -> Elem:
        return Elem(Signature((color,), color), {0: Fraction(1)})

    def compose_basis(self, sa: Signature, ia: int, i: int, sb: Signature, ib: int) -> Dict[int, Fraction]:
        key = (sa, ia, i, sb, ib)
        hit = self._compose_cache.get(key)
        if hit is not None:
            return hit
        ta = self.basis(sa)[ia]
        tb = self.basis(sb)[ib]
        out_sig = composed_signature(sa, i, sb)
        res = self.reduce(out_sig, {dt_graft(ta, i, tb): Fraction(1)})
        self._compose_cache[key] = res
        return res

    def compose(self, a: Elem, i: int, b: Elem) -> Elem:
        out_sig = composed_signature(a.sig, i, b.sig)
        out: Dict[int, Fraction] = {}
        for ka, ca in a.coeffs.items():
            for kb, cb in b.coeffs.items():
                vec_iadd(out, self.compose_basis(a.sig, ka, i, b.sig, kb), ca * cb)
        return Elem(out_sig, out)

    def act(self, a: Elem, sigma: Sequence[int]) -> Elem:
        """Relabel input ``l`` as ``sigma[l-1]``."""
        n = a.sig.arity
        if sorted(sigma) != list(range(1, n + 1)):
            raise ValueError(f"{tuple(sigma)} is not a permutation of 1..{n}")
        tsig = permute_sig(a.sig, sigma)
        if n == 1:
            return Elem(tsig, dict(a.coeffs))
        v = {dt_relabel(t, lambda l: sigma[l - 1]): c for t, c in self.lift(a.sig, a.coeffs).items()}
        return Elem(tsig, self.reduce(tsig, v))

    def action_matrix(self, sig: Signature, sigma: Sequence[int]) -> ExactMatrix:
        tsig = permute_sig(sig, sigma)
        cols = [self.act(Elem(sig, {k: Fraction(1)}), sigma).coeffs for k in range(self.dim(sig))]
        return ExactMatrix.from_columns(self.dim(tsig), cols)

    def signatures(self, arity: int, outputs: Optional[Iterable[str]] = None) -> List[Signature]:
        ins, outs = self.gens.colors()
        if arity == 1:
            return [Signature((c,), c) for c in sorted(ins)]
        outs = sorted(outs) if outputs is None else list(outputs)
        res = []
        for inputs in itertools.product(sorted(ins), repeat=arity):
            for o in outs:
                res.append(Signature(tuple(inputs), o))
        return res

    def dims_table(self, max_arity: Optional[int] = None) -> Dict[str, Dict[str, int]]:
        top = self.max_arity if max_arity is None else max_arity
        out = {}
        for n in range(2, top + 1):
            for sig in self.signatures(n):
                if self.free_dim(sig):
                    out[str(sig)] = {"free": self.free_dim(sig), "relations": self.relation_dim(sig),
                                     "quotient": self.dim(sig)}
        return out


def composed_signature(sa: Signature, i: int, sb: Signature) -> Signature:
    if not 1 <= i <= sa.arity:
        raise ValueError(f"slot {i} out of range for arity {sa.arity}")
    if sa.inputs[i - 1] != sb.output:
        raise ColorError(f"output color {sb.output} does not match input {i} of {sa}")
    return Signature(sa.inputs[:i - 1] + sb.inputs + sa.inputs[i:], sa.output)


def compose(t: OperadTable, a: Elem, i: int, b: Elem) -> Elem:
    return t.compose(a, i, b)


def realize(p: OperadPresentation, max_arity: int, validate: bool = True) -> OperadTable:
    if max_arity < 2:
        raise ValueError("max_arity must be at least 2")
    t = OperadTable(p, max_arity)
    if validate:
        failures = check_operad_axioms(t, max_arity)
        if failures:
            raise IntegrityError(f"operad axioms fail: {failures[:3]}")
    return t


def check_operad_axioms(t: OperadTable, max_arity: int, limit: int = 20) -> List[str]:
    """Exhaustive unit, associativity and equivariance checks on basis elements."""
    bad: List[str] = []
    sigs = {n: [s for s in t.signatures(n) if t.dim(s)] for n in range(1, max_arity + 1)}

    def basis_elems(sig):
        return [Elem(sig, {k: Fraction(1)}) for k in range(t.dim(sig))]

    for n in range(2, max_arity + 1):
        for sig in sigs[n]:
            for a in basis_elems(sig):
                for i in range(1, n + 1):
                    u = t.unit(sig.inputs[i - 1])
                    if t.compose(a, i, u).coeffs != a.coeffs:
                        bad.append(f"right unit fails at {sig} slot {i}")
                if sig.output != NONE and t.compose(t.unit(sig.output), 1, a).coeffs != a.coeffs:
                    bad.append(f"left unit fails at {sig}")
    # sequential and parallel associativity
    for m in range(2, max_arity + 1):
        for n in range(2, max_arity + 2 - m):
            for k in range(2, max_arity + 3 - m - n):
                for sa in sigs[m]:
                    for sb in sigs[n]:
                        for sc in sigs[k]:
                            bad += _assoc_checks(t, sa, sb, sc, basis_elems)
                            if len(bad) > limit:
                                return bad
    # equivariance
    for m in range(2, max_arity + 1):
        for n in range(2, max_arity + 2 - m):
            for sa in sigs[m]:
                for sb in sigs[n]:
                    for i in range(1, m + 1):
                        if sa.inputs[i - 1] != sb.output:
                            continue
                        for a in basis_elems(sa):
                            for b in basis_elems(sb):
                                bad += _equivariance(t, a, i, b)
                                if len(bad) > limit:
                                    return bad
    return bad


def _assoc_checks(t, sa, sb, sc, basis_elems) -> List[str]:
    bad = []
    m, n = sa.arity, sb.arity
    for a in basis_elems(sa):
        for b in basis_elems(sb):
            for c in basis_elems(sc):
                for i in range(1, m + 1):
                    if sa.inputs[i - 1] != sb.output:
                        continue
                    ab = t.compose(a, i, b)
                    for j in range(1, n + 1):
                        if sb.inputs[j - 1] != sc.output:
                            continue
                        lhs = t.compose(ab, i + j - 1, c)
                        rhs = t.compose(a, i, t.compose(b, j, c))
                        if lhs.coeffs != rhs.coeffs:
                            bad.append(f"sequential associativity fails: {sa}∘{i}{sb}∘{j}{sc}")
                    for j in range(i + 1, m + 1):
                        if sa.inputs[j - 1] != sc.output:
                            continue
                        lhs = t.compose(ab, j + n - 1, c)
                        rhs = t.compose(t.compose(a, j, c), i, b)
                        if lhs.coeffs != rhs.coeffs:
                            bad.append(f"parallel associativity fails: {sa} slots {i},{j}")
    return bad


def _equivariance(t, a: Elem, i: int, b: Elem) -> List[str]:
    """(σ.a)∘_{σ(i)}(π.b) equals the block permutation applied to a∘_i b."""
    bad = []
    m, n = a.sig.arity, b.sig.arity
    base = t.compose(a, i, b)
    for sigma in itertools.permutations(range(1, m + 1)):
        for pi in itertools.permutations(range(1, n + 1)):
            lhs = t.compose(t.act(a, sigma), sigma[i - 1], t.act(b, pi))
            rhs = t.act(base, block_permutation(sigma, i, pi))
            if lhs.coeffs != rhs.coeffs or lhs.sig != rhs.sig:
                bad.append(f"equivariance fails: {a.sig} slot {i} σ={sigma} π={pi}")
                return bad
    return bad


def block_permutation(sigma: Sequence[int], i: int, pi: Sequence[int]) -> Tuple[int, ...]:
    """Permutation of 1..m+n-1 induced by σ on blocks with π inside block i."""
    m, n = len(sigma), len(pi)
    # new starting position of each block
    sizes = {sigma[k - 1]: (n if k == i else 1) for k in range(1, m + 1)}
    start = {}
    pos = 1
    for target in range(1, m + 1):
        start[target] = pos
        pos += sizes[target]
    out = []
    for k in range(1, m + 1):
        if k == i:
            out.extend(start[sigma[k - 1]] + pi[r] - 1 for r in range(n))
        else:
            out.append(start[sigma[k - 1]])
    return tuple(out)


# ---------------------------------------------------------------------------
# quadratic duals


def dual_name(a: str) -> str:
    return a[:-1] if a.endswith("!") else a + "!"


def dual_generators(gens: GeneratorData) -> GeneratorData:
    spaces = {typ: [dual_name(n) for n in names] for typ, names in gens.spaces.items()}
    swap = {dual_name(a): (-s, dual_name(b)) for a, (s, b) in gens.swap.items()}
    tau = None
    if gens.tau is not None:
        # the rotation is even, so twisting by the sign leaves it alone; the
        # dual representation of tau is the inverse transpose, here tau^2 transposed
        t = gens.tau_matrix()
        t2 = _mat_mul(t, t)
        tau = {}
        for (i, j), c in t2.items():
            tau.setdefault(dual_name(i), {})[dual_name(j)] = c
        for n in gens.spaces.get((FULL, FULL, FULL), ()):
            tau.setdefault(dual_name(n), {})
    return GeneratorData(spaces, swap, tau)


def _rename(t: DTree) -> DTree:
    if isinstance(t, int):
        return t
    return (dual_name(t[0]), _rename(t[1]), _rename(t[2]))


def pairing_sign(t: DTree) -> int:
    return det_reference_sign(t)


def arity3_signatures(gens: GeneratorData) -> List[Signature]:
    ins, outs = gens.colors()
    res = []
    for inputs in itertools.product(sorted(ins), repeat=3):
        for o in sorted(outs):
            sig = Signature(tuple(inputs), o)
            if free_space(gens, sig):
                res.append(sig)
    return res


def quadratic_dual(p: OperadPresentation, name: Optional[str] = None) -> OperadPresentation:
    """Twisted dual generators with relations the Det-twisted annihilator of R."""
    dg = dual_generators(p.gens)
    rels: Dict[Signature, List[FreeVec]] = {}
    cache: dict = {}
    for sig in arity3_signatures(p.gens):
        basis = free_space(p.gens, sig)
        index = {t: i for i, t in enumerate(basis)}
        rows = _local_relation_rows(p, sig, cache)
        m = ExactMatrix.from_columns(len(basis), [
            {index[t]: c * pairing_sign(t) for t, c in r.items()} for r in rows]).transpose()
        vecs = []
        for x in nullspace(m):
            v = {}
            for i, c in x.items():
                dt, s = dt_canon(_rename(basis[i]), dg)
                v[dt] = v.get(dt, 0) + c * s
            vecs.append({t: c for t, c in v.items() if c})
        if vecs:
            rels[dual_sig(sig)] = vecs
    return OperadPresentation(name or (p.name + "!"), dg, rels)


def dual_sig(sig: Signature) -> Signature:
    return sig


def pairing_is_perfect(p: OperadPresentation) -> bool:
    """The Det-twisted pairing F(E)(3) x F(E^v)(3) -> k is nondegenerate at every signature."""
    dg = dual_generators(p.gens)
    for sig in arity3_signatures(p.gens):
        basis = free_space(p.gens, sig)
        dbasis = free_space(dg, sig)
        dindex = {t: i for i, t in enumerate(dbasis)}
        ent = {}
        for i, t in enumerate(basis):
            dt, s = dt_canon(_rename(t), dg)
            ent[(i, dindex[dt])] = Fraction(s * pairing_sign(t))
        if rank(ExactMatrix(len(basis), len(dbasis), ent)) != len(basis) or len(basis) != len(dbasis):
            return False
    return True


# ---------------------------------------------------------------------------
# built-in operads


def planar(word, gen: str = "mu", gens: Optional[GeneratorData] = None) -> DTree:
    """Decorated tree of a nested planar bracketing, e.g. ((1, 2), 3), with one generator."""
    if isinstance(word, int):
        return word
    left, right = word
    return (gen, planar(left, gen), planar(right, gen))


def _assoc_presentation() -> OperadPresentation:
    gens = GeneratorData({(FULL, FULL, FULL): ["mu", "mu21"]},
                         {"mu": (1, "mu21"), "mu21": (1, "mu")},
                         tau={"mu": {"mu": 1}, "mu21": {"mu21": 1}})
    sig = Signature.full(3)
    rels = []
    for a, b, c in itertools.permutations((1, 2, 3)):
        rels.append({planar(((a, b), c)): Fraction(1), planar((a, (b, c))): Fraction(-1)})
    return OperadPresentation("assoc", gens, {sig: rels})


def _comm_presentation() -> OperadPresentation:
    gens = GeneratorData({(FULL, FULL, FULL): ["c"]}, {"c": (1, "c")}, tau={"c": {"c": 1}})
    sig = Signature.full(3)
    base = ("c", ("c", 1, 2), 3)
    rels = [{base: Fraction(1), ("c", ("c", 1, 3), 2): Fraction(-1)},
            {base: Fraction(1), ("c", 1, ("c", 2, 3)): Fraction(-1)}]
    return OperadPresentation("comm", gens, {sig: rels})


def _lie_presentation() -> OperadPresentation:
    gens = GeneratorData({(FULL, FULL, FULL): ["b"]}, {"b": (-1, "b")}, tau={"b": {"b": 1}})
    sig = Signature.full(3)
    jacobi = {("b", ("b", 1, 2), 3): Fraction(1), ("b", ("b", 2, 3), 1): Fraction(1),
              ("b", ("b", 3, 1), 2): Fraction(1)}
    return OperadPresentation("lie", gens, {sig: [jacobi]})


BUILTINS = ("assoc", "comm", "lie")


def builtin_presentation(name: str) -> OperadPresentation:
    if name == "assoc":
        return _assoc_presentation()
    if name == "comm":
        return _comm_presentation()
    if name == "lie":
        return _lie_presentation()
    raise KeyError(f"unknown builtin operad {name!r}; choose from {BUILTINS}")


# ---------------------------------------------------------------------------
# maps defined on generators


GenMap = Mapping[str, Mapping[str, Fraction]]


def map_tree(t: DTree, gen_map: GenMap) -> FreeVec:
    """Image of a decorated tree under a vertex-wise linear substitution of generators."""
    if isinstance(t, int):
        return {t: Fraction(1)}
    out: FreeVec = {}
    left, right = map_tree(t[1], gen_map), map_tree(t[2], gen_map)
    for b, c in gen_map.get(t[0], {}).items():
        for lt, x in left.items():
            for rt, y in right.items():
                vec_iadd(out, {(b, lt, rt): Fraction(c) * x * y})
    return out


@dataclass
class GeneratorMapReport:
    dims: Dict[str, Tuple[int, int]]
    ranks: Dict[str, int]
    relation_failures: List[str]
    composition_failures: List[str]

    @property
    def is_isomorphism(self) -> bool:
        return (not self.relation_failures and not self.composition_failures
                and all(a == b == self.ranks[k] for k, (a, b) in self.dims.items()))


def check_generator_map(src: OperadTable, dst: OperadTable, gen_map: GenMap,
                        max_arity: Optional[int] = None) -> GeneratorMapReport:
    """Check that ``gen_map`` induces a morphism ``src -> dst`` and whether it is bijective.

    The map must be S2-equivariant on generators, send every relation into the
    target ideal, and commute with every basis composition up to ``max_arity``.
    """
    top = min(src.max_arity, dst.max_arity) if max_arity is None else max_arity
    rel_bad: List[str] = []
    for a, (s, b) in src.gens.swap.items():
        lhs = dict(gen_map.get(b, {}))
        rhs: Dict[str, Fraction] = {}
        for x, c in gen_map.get(a, {}).items():
            s2, y = dst.gens.swap[x]
            vec_iadd(rhs, {y: s * s2 * Fraction(c)})
        if vec_iadd(dict(lhs), rhs, -1):
            rel_bad.append(f"not equivariant on {a}")
    for sig, vecs in src.presentation.relations.items():
        for v in vecs:
            img: FreeVec = {}
            for t, c in v.items():
                vec_iadd(img, map_tree(t, gen_map), c)
            if dst.reduce(sig, img):
                rel_bad.append(f"relation at {sig} not sent into the ideal")
    matrices: Dict[Signature, ExactMatrix] = {}
    dims: Dict[str, Tuple[int, int]] = {}
    ranks: Dict[str, int] = {}
    for n in range(2, top + 1):
        for sig in src.signatures(n):
            if not src.dim(sig) and not dst.dim(sig):
                continue
            cols = []
            for t in src.basis(sig):
                cols.append(dst.reduce(sig, map_tree(t, gen_map)))
            m = ExactMatrix.from_columns(dst.dim(sig), cols)
            matrices[sig] = m
            dims[str(sig)] = (src.dim(sig), dst.dim(sig))
            ranks[str(sig)] = rank(m)

    def image(e: Elem) -> Elem:
        if e.sig.arity == 1:
            return e
        out: Dict[int, Fraction] = {}
        for k, c in e.coeffs.items():
            vec_iadd(out, matrices[e.sig].col_dicts()[k], c)
        return Elem(e.sig, out)

    comp_bad: List[str] = []
    for n in range(2, top):
        for m_ in range(2, top - n + 2):
            for sa in src.signatures(n):
                for sb in src.signatures(m_):
                    for i in range(1, n + 1):
                        if sa.inputs[i - 1] != sb.output or sb.output == NONE:
                            continue
                        for ka in range(src.dim(sa)):
                            for kb in range(src.dim(sb)):
                                a, b = Elem(sa, {ka: Fraction(1)}), Elem(sb, {kb: Fraction(1)})
                                lhs = image(src.compose(a, i, b))
                                rhs = dst.compose(image(a), i, image(b))
                                if vec_iadd(dict(lhs.coeffs), rhs.coeffs, -1):
                                    comp_bad.append(f"{sa}[{ka}] o{i} {sb}[{kb}]")
    return GeneratorMapReport(dims, ranks, rel_bad, comp_bad)


def assoc_self_duality_map() -> Dict[str, Dict[str, Fraction]]:
    """Generator map Assoc! -> Assoc: mu! -> mu and mu21! -> -mu21."""
    return {"mu!": {"mu": Fraction(1)}, "mu21!": {"mu21": Fraction(-1)}}


def comm_dual_to_lie_map() -> Dict[str, Dict[str, Fraction]]:
    """Generator map Comm! -> Lie sending the dual of the product to the bracket."""
    return {"c!": {"b": Fraction(1)}}
