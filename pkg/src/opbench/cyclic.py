"""Cyclic operads, the module operad Ō and the inner-product 0/1-operad Ô.

Throughout, an element of ``O(n)`` is viewed cyclically as an operation with
legs ``1..n+1`` where leg ``n+1`` is the output.  ``τ_{n+1}`` relabels leg
``l`` as ``l+1`` (mod ``n+1``), so the old output becomes input 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import trees as tr
from .linalg import Echelon, ExactMatrix, IntegrityError, rank, vec_iadd
from .operad import (DTree, Elem, GeneratorData, OperadPresentation, OperadTable, block_permutation,
                     builtin_presentation, composed_signature, dt_leaves, dt_relabel, free_space,
                     permute_sig, planar, quadratic_dual, realize, s_closure)
from .trees import DASHED, FULL, NONE, Signature


def rotation(n: int) -> Tuple[int, ...]:
    """τ_{n+1} as a tuple of images of legs 1..n+1."""
    return tuple(l % (n + 1) + 1 for l in range(1, n + 2))


def perm_compose(s: Sequence[int], t: Sequence[int]) -> Tuple[int, ...]:
    return tuple(s[t[i] - 1] for i in range(len(t)))


def perm_inverse(s: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * len(s)
    for i, x in enumerate(s, start=1):
        out[x - 1] = i
    return tuple(out)


# ---------------------------------------------------------------------------
# cyclic structures


class CyclicStructure:
    """Matrices of τ_{n+1} on the full-colored spaces O(n) of a table."""

    def __init__(self, table: OperadTable, tau: Mapping[int, ExactMatrix], source: str = ""):
        self.table = table
        self.tau: Dict[int, ExactMatrix] = dict(tau)
        self.source = source
        self._full: Dict[Tuple[int, Tuple[int, ...]], ExactMatrix] = {}
        for n, m in self.tau.items():
            d = table.dim(Signature.full(n))
            if (m.rows, m.cols) != (d, d):
                raise ValueError(f"rotation matrix at arity {n} has the wrong shape")

    @property
    def max_n(self) -> int:
        return max(self.tau)

    def apply_tau(self, n: int, coeffs: Mapping[int, Fraction], power: int = 1) -> Dict[int, Fraction]:
        out = dict(coeffs)
        for _ in range(power % (n + 1)):
            out = self.tau[n].apply(out)
        return out

    def act(self, n: int, coeffs: Mapping[int, Fraction], mu: Sequence[int]) -> Dict[int, Fraction]:
        """Action of μ ∈ S_{n+1} (leg relabeling) on O(n), built from S_n and τ_{n+1}."""
        mu = tuple(mu)
        if sorted(mu) != list(range(1, n + 2)):
            raise ValueError(f"{mu} is not a permutation of 1..{n + 1}")
        k = (n + 1 - perm_inverse(mu)[n]) % (n + 1)
        tau_k = rotation(n)
        t = tuple(range(1, n + 2))
        for _ in range(k):
            t = perm_compose(tau_k, t)
        sigma = perm_compose(mu, perm_inverse(t))
        if sigma[n] != n + 1:
            raise IntegrityError("cyclic decomposition failed")
        out = self.apply_tau(n, coeffs, k)
        if n == 1:
            return out
        return dict(self.table.act(Elem(Signature.full(n), out), sigma[:n]).coeffs)

    def matrix(self, n: int, mu: Sequence[int]) -> ExactMatrix:
        key = (n, tuple(mu))
        hit = self._full.get(key)
        if hit is None:
            d = self.table.dim(Signature.full(n))
            hit = ExactMatrix.from_columns(d, [self.act(n, {k: Fraction(1)}, mu) for k in range(d)])
            self._full[key] = hit
        return hit


def _assoc_words(table: OperadTable, n: int):
    sig = Signature.full(n)
    words = list(itertools.permutations(range(1, n + 1)))
    cols = []
    for w in words:
        nested = w[0]
        for x in w[1:]:
            nested = (nested, x)
        cols.append(table.reduce(sig, {planar(nested): Fraction(1)}))
    return words, cols


def assoc_cyclic(table: OperadTable, max_n: int) -> CyclicStructure:
    """Rotation on Assoc via cyclic words: relabel the word (w, n+1) and rotate it to end in n+1."""
    tau = {}
    for n in range(1, max_n + 1):
        if n == 1:
            tau[1] = ExactMatrix.identity(1)
            continue
        words, cols = _assoc_words(table, n)
        d = table.dim(Signature.full(n))
        w_mat = ExactMatrix.from_columns(d, cols)
        if rank(w_mat) != d or len(words) != d:
            raise IntegrityError("monomials do not form a basis of Assoc")
        pos = {w: i for i, w in enumerate(words)}
        t = rotation(n)
        p_ent = {}
        for i, w in enumerate(words):
            cyc = [t[x - 1] for x in w] + [t[n]]
            r = cyc.index(n + 1)
            rot = cyc[r + 1:] + cyc[:r]
            p_ent[(pos[tuple(rot)], i)] = Fraction(1)
        perm = ExactMatrix(d, d, p_ent)
        tau[n] = w_mat @ perm @ _inverse(w_mat)
    return CyclicStructure(table, tau, "assoc-words")


def trivial_cyclic(table: OperadTable, max_n: int) -> CyclicStructure:
    return CyclicStructure(table, {n: ExactMatrix.identity(table.dim(Signature.full(n)))
                                   for n in range(1, max_n + 1)}, "trivial")


def _inverse(m: ExactMatrix) -> ExactMatrix:
    from .linalg import solve
    cols = []
    for j in range(m.rows):
        x = solve(m, {j: 1})
        if x is None:
            raise IntegrityError("matrix is not invertible")
        cols.append(x)
    return ExactMatrix.from_columns(m.cols, cols)


def _reroot(t: DTree, gens: GeneratorData, out_label: int, new_root: int) -> Dict[DTree, Fraction]:
    """Re-hang a full-colored decorated tree from leaf ``new_root``; the old output becomes ``out_label``."""
    path = []
    node = t
    while not isinstance(node, int):
        side = 1 if new_root in dt_leaves(node[1]) else 2
        path.append((node, side))
        node = node[side]
    mats = {1: gens.s3_matrix((3, 1, 2)), 2: gens.s3_matrix((1, 3, 2))}
    current: Dict[DTree, Fraction] = {out_label: Fraction(1)}
    for (a, left, right), side in path:
        other = right if side == 1 else left
        nxt: Dict[DTree, Fraction] = {}
        for up, cu in current.items():
            for (b, a2), c in mats[side].items():
                if a2 == a:
                    key = (b, other, up)
                    nxt[key] = nxt.get(key, 0) + cu * c
        current = {k: v for k, v in nxt.items() if v}
    return current


def generic_cyclic(table: OperadTable, max_n: int) -> CyclicStructure:
    """Rotation on a cyclic quadratic operad obtained by re-rooting decorated trees."""
    gens = table.gens
    if not gens.is_cyclic():
        raise ValueError("generators carry no S3 data")
    tau = {1: ExactMatrix.identity(1)}
    for n in range(2, max_n + 1):
        sig = Signature.full(n)
        t = rotation(n)
        cols = []
        for rep in table.basis(sig):
            moved = dt_relabel(rep, lambda l: t[l - 1])
            cols.append(table.reduce(sig, _reroot(moved, gens, t[n], n + 1)))
        tau[n] = ExactMatrix.from_columns(table.dim(sig), cols)
    return CyclicStructure(table, tau, "reroot")


def cyclic_structure(table: OperadTable, max_n: Optional[int] = None) -> CyclicStructure:
    top = table.max_arity if max_n is None else max_n
    if table.name == "assoc":
        return assoc_cyclic(table, top)
    if table.name == "comm":
        return trivial_cyclic(table, top)
    return generic_cyclic(table, top)


def builtin(name: str, max_arity: int = 4) -> Tuple[OperadPresentation, CyclicStructure]:
    """Presentation plus cyclic data; Lie's rotation comes from the dual S3 data of Comm."""
    p = builtin_presentation(name)
    if name == "lie":
        p = quadratic_dual(builtin_presentation("comm"), name="lie")
    table = realize(p, max_arity, validate=False)
    return p, cyclic_structure(table, max_arity)


# ---------------------------------------------------------------------------
# cyclic axioms


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg: str, limit: int = 25):
        if len(self.failures) < limit:
            self.failures.append(msg)
        else:
            self.failures[-1] = f"... more failures ({msg})"

    def as_dict(self) -> dict:
        return {"check": self.name, "instances": self.checked,
                "verdict": "pass" if self.ok else "fail", "witnesses": list(self.failures)}


def verify_cyclic_axioms(t: OperadTable, c: CyclicStructure, max_n: int) -> List[CheckReport]:
    """Unit rotation, the two composition identities and consistency of the S_{n+1} action."""
    unit = CheckReport("rotation fixes the unit")
    unit.checked = 1
    if c.apply_tau(1, {0: Fraction(1)}) != {0: Fraction(1)}:
        unit.fail("τ2(1) != 1")
    order = CheckReport("rotation has order n+1")
    inner = CheckReport("rotation commutes past inner slots")
    last = CheckReport("rotation exchanges the last slot")
    group = CheckReport("S_{n+1} action is a homomorphism")
    for n in range(1, max_n + 1):
        d = t.dim(Signature.full(n))
        for k in range(d):
            order.checked += 1
            if c.apply_tau(n, {k: Fraction(1)}, n + 1) != {k: Fraction(1)}:
                order.fail(f"τ_{n + 1}^{n + 1} moves basis element {k} of O({n})")
    for m in range(1, max_n + 1):
        for n in range(1, max_n + 2 - m):
            sa, sb = Signature.full(m), Signature.full(n)
            for ia in range(t.dim(sa)):
                for ib in range(t.dim(sb)):
                    a = Elem(sa, {ia: Fraction(1)})
                    b = Elem(sb, {ib: Fraction(1)})
                    ta = Elem(sa, c.apply_tau(m, a.coeffs))
                    tb = Elem(sb, c.apply_tau(n, b.coeffs))
                    for k in range(1, m):
                        inner.checked += 1
                        lhs = c.apply_tau(m + n - 1, t.compose(a, k, b).coeffs)
                        rhs = t.compose(ta, k + 1, b).coeffs
                        if lhs != rhs:
                            inner.fail(f"O({m})[{ia}] ∘_{k} O({n})[{ib}]")
                    last.checked += 1
                    lhs = c.apply_tau(m + n - 1, t.compose(a, m, b).coeffs)
                    rhs = t.compose(tb, 1, ta).coeffs
                    if lhs != rhs:
                        last.fail(f"O({m})[{ia}] ∘_{m} O({n})[{ib}]")
    for n in range(1, max_n + 1):
        d = t.dim(Signature.full(n))
        gens = [tuple(list(range(1, i)) + [i + 1, i] + list(range(i + 2, n + 2))) for i in range(1, n + 1)]
        for mu in itertools.permutations(range(1, n + 2)):
            m_mu = c.matrix(n, mu)
            for g in gens:
                group.checked += 1
                if c.matrix(n, perm_compose(mu, g)).entries != (m_mu @ c.matrix(n, g)).entries:
                    group.fail(f"ρ({mu}∘{g}) != ρ({mu})ρ({g}) on O({n})")
    return [unit, order, inner, last, group]


def corrupted(c: CyclicStructure, n: int = 2) -> CyclicStructure:
    """A deliberately wrong rotation (negated at one arity) for negative controls."""
    tau = dict(c.tau)
    m = tau[n]
    tau[n] = ExactMatrix(m.rows, m.cols, {k: -v for k, v in m.entries.items()})
    return CyclicStructure(c.table, tau, c.source + "+corrupted")


# ---------------------------------------------------------------------------
# Ō: algebra plus module


def bar_dim_kind(sig: Signature) -> Optional[str]:
    dashed = sum(1 for x in sig.inputs if x == DASHED)
    if sig.output == FULL and dashed == 0:
        return "algebra"
    if sig.output == DASHED and dashed == 1:
        return "module"
    return None


class BarTable:
    """Ō(X;f) = O(n) when all inputs are full, Ō(X;d) = O(n) with exactly one dashed input."""

    def __init__(self, table: OperadTable):
        self.table = table
        self.max_arity = table.max_arity

    def dim(self, sig: Signature) -> int:
        if bar_dim_kind(sig) is None:
            return 0
        return self.table.dim(Signature.full(sig.arity))

    def compose(self, a: Elem, i: int, b: Elem) -> Elem:
        sig = composed_signature(a.sig, i, b.sig)
        if self.dim(a.sig) == 0 or self.dim(b.sig) == 0:
            return Elem(sig, {})
        res = self.table.compose(Elem(Signature.full(a.sig.arity), a.coeffs), i,
                                 Elem(Signature.full(b.sig.arity), b.coeffs))
        return Elem(sig, dict(res.coeffs))

    def act(self, a: Elem, sigma: Sequence[int]) -> Elem:
        res = self.table.act(Elem(Signature.full(a.sig.arity), a.coeffs), sigma)
        return Elem(permute_sig(a.sig, sigma), dict(res.coeffs))

    def unit(self, color: str) -> Elem:
        return Elem(Signature((color,), color), {0: Fraction(1)})


def build_bar(t: OperadTable) -> BarTable:
    return BarTable(t)


# ---------------------------------------------------------------------------
# Ô: inner products


def hat_kind(sig: Signature) -> Optional[str]:
    dashed = sum(1 for x in sig.inputs if x == DASHED)
    if sig.output == FULL and dashed == 0:
        return "algebra"
    if sig.output == DASHED and dashed == 1:
        return "module"
    if sig.output == NONE and dashed == 2:
        return "inner"
    return None


def standard_placement(sig: Signature) -> Tuple[int, ...]:
    """σ_X: sends the standard dashed positions (1, n) onto those of ``sig``, the rest in order."""
    dashed = [k for k, x in enumerate(sig.inputs, start=1) if x == DASHED]
    full = [k for k, x in enumerate(sig.inputs, start=1) if x == FULL]
    return tuple([dashed[0]] + full + [dashed[1]])


class HatTable:
    """The 0/1-operad Ô built from a cyclic operad.

    Spaces with empty output store coordinates of the standard form in
    ``O(n-1)``: the element of Ô(X;∅) is ``σ_X`` applied to an operation whose
    inputs 1..n-1 are its Ô-inputs 1..n-1 and whose output is Ô-input n.
    """

    def __init__(self, table: OperadTable, cyc: CyclicStructure):
        self.table = table
        self.cyc = cyc
        self.max_arity = min(table.max_arity, cyc.max_n) + 1

    def dim(self, sig: Signature) -> int:
        kind = hat_kind(sig)
        if kind is None:
            return 0
        if kind == "inner":
            if sig.arity - 1 > self.cyc.max_n:
                raise ValueError("arity beyond the realized cyclic structure")
            return self.table.dim(Signature.full(sig.arity - 1))
        return self.table.dim(Signature.full(sig.arity))

    def signatures(self, arity: int) -> List[Signature]:
        out = []
        for inputs in itertools.product((DASHED, FULL), repeat=arity):
            for o in (FULL, DASHED, NONE):
                s = Signature(inputs, o)
                if hat_kind(s) is not None:
                    out.append(s)
        return out

    def unit(self, color: str) -> Elem:
        return Elem(Signature((color,), color), {0: Fraction(1)})

    def inner_unit(self) -> Elem:
        return Elem(Signature((DASHED, DASHED), NONE), {0: Fraction(1)})

    # -- cyclic-leg representation of empty-output elements

    def _to_legs(self, a: Elem) -> Tuple[Dict[int, Fraction], Tuple[int, ...]]:
        """Underlying O(n-1) coordinates and the map Ô-position -> leg."""
        sx = standard_placement(a.sig)
        return dict(a.coeffs), perm_inverse(sx)

    def _from_legs(self, sig: Signature, coeffs, legmap: Sequence[int]) -> Elem:
        """Standardize an operation whose Ô-input p is leg ``legmap[p-1]``."""
        n = sig.arity
        sx = standard_placement(sig)
        mu = perm_compose(perm_inverse(sx), perm_inverse(legmap))
        return Elem(sig, self.cyc.act(n - 1, coeffs, mu))

    def compose(self, a: Elem, i: int, b: Elem) -> Elem:
        sig = composed_signature(a.sig, i, b.sig)
        if self.dim(a.sig) == 0 or self.dim(b.sig) == 0:
            return Elem(sig, {})
        if a.sig.output != NONE:
            res = self.table.compose(Elem(Signature.full(a.sig.arity), a.coeffs), i,
                                     Elem(Signature.full(b.sig.arity), b.coeffs))
            return Elem(sig, dict(res.coeffs))
        na, m = a.sig.arity, b.sig.arity
        big = na + m - 1  # Ô inputs of the result; underlying arity big-1
        coeffs, legs = self._to_legs(a)
        leg = legs[i - 1]
        bfull = Elem(Signature.full(m), dict(b.coeffs))
        if leg < na:
            res = self.table.compose(Elem(Signature.full(na - 1), coeffs), leg, bfull).coeffs

            def shift(l):
                return l if l < leg else l + m - 1
            newlegs = []
            for p in range(1, big + 1):
                if p < i:
                    newlegs.append(shift(legs[p - 1]))
                elif p < i + m:
                    newlegs.append(leg + p - i)
                else:
                    newlegs.append(shift(legs[p - m]))
        else:
            # gluing into the output leg: rotate b so that its dashed input becomes its output
            q = b.sig.inputs.index(DASHED) + 1
            mu = []
            for l in range(1, m + 2):
                if l == q:
                    mu.append(m + 1)
                elif l == m + 1:
                    mu.append(1)
                else:
                    mu.append(l + 1 if l < q else l)
            rotated = self.cyc.act(m, b.coeffs, mu)
            res = self.table.compose(Elem(Signature.full(m), rotated), 1, Elem(Signature.full(na - 1), coeffs)).coeffs
            newlegs = []
            for p in range(1, big + 1):
                if p < i:
                    newlegs.append(legs[p - 1])
                elif p < i + m:
                    s = p - i + 1
                    if s == q:
                        newlegs.append(big)
                    else:
                        newlegs.append(na - 1 + (s if s < q else s - 1))
                else:
                    newlegs.append(legs[p - m])
        return self._from_legs(sig, res, tuple(newlegs))

    def act(self, a: Elem, sigma: Sequence[int]) -> Elem:
        tsig = permute_sig(a.sig, sigma)
        if self.dim(a.sig) == 0:
            return Elem(tsig, {})
        if a.sig.output != NONE:
            res = self.table.act(Elem(Signature.full(a.sig.arity), a.coeffs), sigma)
            return Elem(tsig, dict(res.coeffs))
        coeffs, legs = self._to_legs(a)
        # Ô-input sigma(p) is the old input p
        newlegs = [0] * a.sig.arity
        for p in range(1, a.sig.arity + 1):
            newlegs[sigma[p - 1] - 1] = legs[p - 1]
        return self._from_legs(tsig, coeffs, tuple(newlegs))


def build_hat(t: OperadTable, c: CyclicStructure, validate: bool = True) -> HatTable:
    if validate:
        reports = verify_cyclic_axioms(t, c, c.max_n)
        bad = [r for r in reports if not r.ok]
        if bad:
            raise IntegrityError(f"cyclic axioms fail: {bad[0].failures[:3]}")
    return HatTable(t, c)


def hat_basis(h, sig: Signature) -> List[Elem]:
    return [Elem(sig, {k: Fraction(1)}) for k in range(h.dim(sig))]


def check_hat_associativity(h: HatTable, max_inputs: int) -> List[CheckReport]:
    """Exhaustive associativity of Ô with results of at most ``max_inputs`` inputs.

    Instances composing first into the last slot of an empty-output element
    are sorted into the three chains: the second element lands in the first
    operand's own inputs, in the inner inputs of the second operand, or in the
    new last slot.
    """
    chains = {k: CheckReport(f"last-slot chain {k}") for k in (1, 2, 3)}
    rest = CheckReport("associativity (other slots)")
    equi = CheckReport("equivariance")
    sigs = {n: [s for s in h.signatures(n) if h.dim(s)] for n in range(1, max_inputs + 1)}
    for n in range(1, max_inputs + 1):
        sigs[n] = [s for s in sigs[n] if s.output != NONE or n >= 2]
    for na in range(1, max_inputs + 1):
        for nb in range(1, max_inputs + 2 - na):
            for nc in range(1, max_inputs + 3 - na - nb):
                for sa in sigs[na]:
                    for sb in sigs[nb]:
                        if sb.output == NONE:
                            continue
                        for sc in sigs[nc]:
                            if sc.output == NONE:
                                continue
                            _assoc_instances(h, sa, sb, sc, chains, rest)
    for na in range(2, max_inputs + 1):
        for nb in range(1, max_inputs + 2 - na):
            for sa in sigs[na]:
                for sb in sigs[nb]:
                    if sb.output == NONE:
                        continue
                    for i in range(1, na + 1):
                        if sa.inputs[i - 1] != sb.output:
                            continue
                        for a in hat_basis(h, sa):
                            for b in hat_basis(h, sb):
                                base = h.compose(a, i, b)
                                for sigma in itertools.permutations(range(1, na + 1)):
                                    for pi in itertools.permutations(range(1, nb + 1)):
                                        equi.checked += 1
                                        lhs = h.compose(h.act(a, sigma), sigma[i - 1], h.act(b, pi))
                                        rhs = h.act(base, block_permutation(sigma, i, pi))
                                        if lhs.sig != rhs.sig or lhs.coeffs != rhs.coeffs:
                                            equi.fail(f"{sa} ∘_{i} {sb} σ={sigma} π={pi}")
    return [chains[1], chains[2], chains[3], rest, equi]


def _assoc_instances(h, sa, sb, sc, chains, rest):
    na, nb = sa.arity, sb.arity
    for i in range(1, na + 1):
        if sa.inputs[i - 1] != sb.output:
            continue
        for j in range(1, na + nb):
            if composed_signature(sa, i, sb).inputs[j - 1] != sc.output:
                continue
            if sa.output == NONE and i == na:
                chain = chains[1 if j < i else (2 if j < na + nb - 1 else 3)]
            else:
                chain = rest
            for a in hat_basis(h, sa):
                for b in hat_basis(h, sb):
                    ab = h.compose(a, i, b)
                    for c in hat_basis(h, sc):
                        chain.checked += 1
                        lhs = h.compose(ab, j, c)
                        if j < i:
                            rhs = h.compose(h.compose(a, j, c), i + sc.arity - 1, b)
                        elif j < i + nb:
                            rhs = h.compose(a, i, h.compose(b, j - i + 1, c))
                        else:
                            rhs = h.compose(h.compose(a, j - nb + 1, c), i, b)
                        if lhs.coeffs != rhs.coeffs:
                            chain.fail(f"({sa}∘_{i}{sb})∘_{j}{sc} basis ({a.coeffs},{b.coeffs},{c.coeffs})")


# ---------------------------------------------------------------------------
# quadratic presentation of Ô


CAP = "cap"


def _recolor(t: DTree, k: int) -> DTree:
    """Make leaf ``k`` dashed, renaming generators along its path to the root."""
    if isinstance(t, int):
        return t
    a, left, right = t
    if k in dt_leaves(left):
        return (a + ".df", _recolor(left, k), right)
    if k in dt_leaves(right):
        return (a + ".fd", left, _recolor(right, k))
    return t


def hat_generators(gens: GeneratorData, cap_sign: int = 1) -> GeneratorData:
    full = gens.spaces.get((FULL, FULL, FULL), ())
    spaces = {(FULL, FULL, FULL): list(full),
              (DASHED, FULL, DASHED): [a + ".df" for a in full],
              (FULL, DASHED, DASHED): [a + ".fd" for a in full],
              (DASHED, DASHED, NONE): [CAP]}
    swap = {}
    for a in full:
        s, b = gens.swap[a]
        swap[a] = (s, b)
        swap[a + ".df"] = (s, b + ".fd")
        swap[a + ".fd"] = (s, b + ".df")
    swap[CAP] = (cap_sign, CAP)
    return GeneratorData(spaces, swap)


def hat_presentation(p: OperadPresentation, cap_sign: int = 1, name: Optional[str] = None) -> OperadPresentation:
    """Three recolored copies of E and a cap; recolored copies of R plus the cap-slide relations."""
    gens = p.gens
    if not gens.is_cyclic():
        raise ValueError("the presentation carries no cyclic S3 data")
    hg = hat_generators(gens, cap_sign)
    rels: Dict[Signature, List[Dict[DTree, Fraction]]] = {}
    full3 = Signature.full(3)
    for v in p.relations.get(full3, []):
        rels.setdefault(full3, []).append(dict(v))
        for k in (1, 2, 3):
            sig = Signature(tuple(DASHED if l == k else FULL for l in (1, 2, 3)), DASHED)
            rels.setdefault(sig, []).append({_recolor(t, k): c for t, c in v.items()})
    slide = {}
    g_sig = Signature((DASHED, FULL, DASHED), NONE)
    tau = gens.tau
    g_rels = []
    for a in gens.spaces.get((FULL, FULL, FULL), ()):
        vec = {(CAP, (a + ".df", 1, 2), 3): Fraction(1)}
        for b, c in tau[a].items():
            key = (CAP, 1, (b + ".fd", 2, 3))
            vec[key] = vec.get(key, 0) - c
        g_rels.append(vec)
    slide[g_sig] = g_rels
    for sig, vecs in s_closure(hg, slide).items():
        rels.setdefault(sig, []).extend(vecs)
    return OperadPresentation(name or f"hat({p.name})", hg, rels)


def hat_generator_images(h: HatTable, p: OperadPresentation) -> Dict[str, Elem]:
    """Where the generators of the hat presentation go in Ô."""
    out = {}
    base = h.table
    sig2 = Signature.full(2)
    for a in p.gens.spaces.get((FULL, FULL, FULL), ()):
        coords = base.reduce(sig2, {(a, 1, 2): Fraction(1)})
        out[a] = Elem(sig2, coords)
        out[a + ".df"] = Elem(Signature((DASHED, FULL), DASHED), coords)
        out[a + ".fd"] = Elem(Signature((FULL, DASHED), DASHED), coords)
    out[CAP] = h.inner_unit()
    return out


def evaluate_tree(h, t: DTree, images: Mapping[str, Elem], leaf_colors: Mapping[int, str]) -> Elem:
    """Value in Ô of a decorated tree whose generators are sent to ``images``."""
    if isinstance(t, int):
        c = leaf_colors[t]
        return Elem(Signature((c,), c), {0: Fraction(1)})
    a, left, right = t
    lv = evaluate_tree(h, left, images, leaf_colors)
    rv = evaluate_tree(h, right, images, leaf_colors)
    g = images[a]
    res = h.compose(h.compose(g, 2, rv), 1, lv)
    # inputs are now ordered as the leaves of left then right; restore label order
    labels = sorted(dt_leaves(left)) + sorted(dt_leaves(right))
    order = sorted(labels)
    rank_of = {l: r for r, l in enumerate(order, start=1)}
    sigma = tuple(rank_of[l] for l in labels)
    return h.act(res, sigma)


def compare_hat_presentation(h: HatTable, p: OperadPresentation, max_inputs: int) -> List[dict]:
    """Realize the hat presentation and map it into Ô: the map must kill relations and be bijective."""
    hp = hat_presentation(p)
    ht = realize(hp, max_inputs, validate=False)
    images = hat_generator_images(h, p)
    rows = []
    for n in range(2, max_inputs + 1):
        for sig in h.signatures(n):
            fd = ht.free_dim(sig)
            if fd == 0:
                continue
            cols = {i + 1: x for i, x in enumerate(sig.inputs)}
            sp = ht.space(sig)
            vals = []
            for tree in sp.free:
                vals.append(evaluate_tree(h, tree, images, cols).coeffs)
            kills = True
            for piv in sp.ideal.pivots:
                acc: Dict[int, Fraction] = {}
                for idx, c in sp.ideal.rows[piv].items():
                    vec_iadd(acc, vals[idx], c)
                if acc:
                    kills = False
            img = ExactMatrix.from_columns(h.dim(sig), [vals[i] for i in sp.reps])
            rows.append({"signature": str(sig), "free": fd, "relations": ht.relation_dim(sig),
                         "quotient": ht.dim(sig), "hat_dim": h.dim(sig),
                         "relations_vanish": kills, "bijective": rank(img) == h.dim(sig) == ht.dim(sig)})
    return rows


# ---------------------------------------------------------------------------
# Koszulness of Ô


def _dual_hat_name(name: str) -> str:
    """Name in the dual of hat(p) of a generator of hat(p!)."""
    from .operad import dual_name
    if name == CAP:
        return CAP + "!"
    if "." in name:
        base, tag = name.split(".", 1)
        return dual_name(dual_name(base) + "." + tag)
    return name


def _rename_tree(t: DTree, f) -> DTree:
    if isinstance(t, int):
        return t
    return (f(t[0]), _rename_tree(t[1], f), _rename_tree(t[2], f))


def same_presentation(p1: OperadPresentation, p2: OperadPresentation, rename=lambda s: s) -> bool:
    """Equal generators, S2 data and relation spans after renaming the generators of ``p1``."""
    g1, g2 = p1.gens, p2.gens
    if {typ: sorted(rename(n) for n in names) for typ, names in g1.spaces.items()} != \
            {typ: sorted(names) for typ, names in g2.spaces.items()}:
        return False
    for a, (s, b) in g1.swap.items():
        if g2.swap.get(rename(a)) != (s, rename(b)):
            return False
    from .operad import arity3_signatures, canon_vector
    for sig in arity3_signatures(g2):
        basis = free_space(g2, sig)
        index = {t: i for i, t in enumerate(basis)}
        e1, e2 = Echelon(), Echelon()
        for v in p1.relations.get(sig, []):
            cv = canon_vector({_rename_tree(t, rename): c for t, c in v.items()}, g2)
            e1.add({index[t]: c for t, c in cv.items()})
        for v in p2.relations.get(sig, []):
            cv = canon_vector(v, g2)
            e2.add({index[t]: c for t, c in cv.items()})
        if len(e1) != len(e2) or any(not e1.contains(e2.rows[p]) for p in e2.pivots):
            return False
    return True


@dataclass
class HatKoszulReport:
    operad: str
    max_inputs: int
    signatures: list
    dual_route_agrees: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.signatures)

    @property
    def verdict(self) -> str:
        return f"koszul-up-to({self.max_inputs})" if self.ok else "not-koszul"

    def as_dict(self, timing: bool = False) -> dict:
        return {"operad": self.operad, "max_inputs": self.max_inputs, "verdict": self.verdict,
                "dual_presentation_matches": dict(self.dual_route_agrees),
                "signatures": [s.as_dict(timing) for s in self.signatures]}


def hat_koszul_check(p: OperadPresentation, max_inputs: int = 4, seed: Optional[int] = None) -> HatKoszulReport:
    """Resolve every signature of the hat presentation of ``p`` by the cobar dual of its quadratic dual.

    The dual used is ``quadratic_dual(hat_presentation(p))``; the report
    also records whether it agrees with the hat presentation of ``p!``
    built with an untwisted or a twisted cap.
    """
    from .cobar import check_signature
    with tr.leaf_order(seed):
        hp = hat_presentation(p)
        q = quadratic_dual(hp)
        pd = quadratic_dual(p)
        agrees = {f"cap_sign={s:+d}": same_presentation(hat_presentation(pd, cap_sign=s), q, _dual_hat_name)
                  for s in (1, -1)}
        target = realize(hp, max_inputs, validate=False)
        qt = realize(q, max_inputs, validate=False)
        reports = []
        for n in range(2, max_inputs + 1):
            for sig in target.signatures(n):
                if target.free_dim(sig) == 0:
                    continue
                reports.append(check_signature(qt, target, sig))
    return HatKoszulReport(p.name, max_inputs, reports, agrees)


def dffd_resolution_counts(p: OperadPresentation, seed: Optional[int] = None) -> dict:
    """The D(Ô!)(d,f,f,d;∅) resolution next to the counts predicted from dim O!(2), dim O!(3)."""
    from .cobar import check_signature
    sig = Signature((DASHED, FULL, FULL, DASHED), NONE)
    with tr.leaf_order(seed):
        hp = hat_presentation(p)
        q = quadratic_dual(hp)
        target = realize(hp, 4, validate=False)
        qt = realize(q, 4, validate=False)
        rep = check_signature(qt, target, sig)
        dual1 = realize(quadratic_dual(p), 3, validate=False)
        d2 = dual1.dim(Signature.full(2))
        d3 = dual1.dim(Signature.full(3))
    return {
        "dims": rep.dims, "homology": rep.homology, "target_dim": rep.target_dim,
        "tree_counts": rep.tree_counts,
        "predicted": {-2: d3, -1: 2 * d3 + 5 * d2 ** 2, 0: 8 * d2 ** 2},
        "identity": {"lhs": rep.target_dim, "rhs": 3 * d2 ** 2 - d3},
        "ok": rep.ok,
    }
