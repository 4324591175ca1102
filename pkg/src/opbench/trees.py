"""Rooted colored trees with labeled leaves and orientation signs.

A tree is built from :class:`Leaf` and :class:`Vertex` nodes.  Every edge
except the root carries an orientation slot; the orientation of a tree is
recorded relative to its canonical edge order, which is the root-first
depth-first listing of edges with the children of each vertex sorted by
their smallest leaf label.  Every edge is named by the set of leaf labels
above it, which is unambiguous because vertices have valence 1 or at least 3.

Which labels count as "smallest" can be changed with :func:`leaf_order`;
that is how the convention-robustness checks scramble the reference order.
"""
from __future__ import annotations

import contextlib
import contextvars
import random
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

FULL = "f"
DASHED = "d"
NONE = "none"
COLORS = (FULL, DASHED)
OUTPUTS = (FULL, DASHED, NONE)


class TreeError(ValueError):
    """Malformed tree or invalid edge."""


class ColorError(TypeError):
    """Colors of a graft or relabeling do not match."""


@dataclass(frozen=True)
class Leaf:
    label: int
    color: str = FULL


@dataclass(frozen=True)
class Vertex:
    children: Tuple["Node", ...]
    color: str = FULL  # color of the output edge, NONE only at the root
    deco: object = None


Node = Union[Leaf, Vertex]


@dataclass(frozen=True)
class Signature:
    inputs: Tuple[str, ...]
    output: str = FULL

    def __post_init__(self):
        if not self.inputs:
            raise TreeError("a signature needs at least one input")
        for c in self.inputs:
            if c not in COLORS:
                raise TreeError(f"bad input color {c!r}")
        if self.output not in OUTPUTS:
            raise TreeError(f"bad output color {self.output!r}")

    @property
    def arity(self) -> int:
        return len(self.inputs)

    @classmethod
    def full(cls, n: int) -> "Signature":
        return cls((FULL,) * n, FULL)

    def __str__(self):
        return "(" + ",".join(self.inputs) + ";" + ("∅" if self.output == NONE else self.output) + ")"


# ---------------------------------------------------------------------------
# leaf ordering convention

_ORDER_SEED: contextvars.ContextVar[Optional[int]] = contextvars.ContextVar("leaf_order_seed", default=None)
_PRIORITY_CACHE: Dict[int, List[int]] = {}
_MAX_LABEL = 64


def current_order_seed() -> Optional[int]:
    return _ORDER_SEED.get()


@contextlib.contextmanager
def leaf_order(seed: Optional[int]):
    """Use a scrambled (but fixed) priority of leaf labels for canonical forms."""
    tok = _ORDER_SEED.set(seed)
    try:
        yield
    finally:
        _ORDER_SEED.reset(tok)


def label_key(label: int) -> int:
    seed = _ORDER_SEED.get()
    if seed is None:
        return label
    pri = _PRIORITY_CACHE.get(seed)
    if pri is None:
        pri = list(range(_MAX_LABEL + 1))
        random.Random(seed).shuffle(pri)
        _PRIORITY_CACHE[seed] = pri
    return pri[label]


# ---------------------------------------------------------------------------
# basic queries

def leaves(node: Node) -> List[int]:
    if isinstance(node, Leaf):
        return [node.label]
    out: List[int] = []
    for c in node.children:
        out.extend(leaves(c))
    return out


def leaf_set(node: Node) -> FrozenSet[int]:
    return frozenset(leaves(node))


def min_key(node: Node) -> int:
    if isinstance(node, Leaf):
        return label_key(node.label)
    return min(min_key(c) for c in node.children)


def out_color(node: Node) -> str:
    return node.color


def dfs_edges(root: Node) -> List[FrozenSet[int]]:
    """Non-root edges in root-first depth-first order, as they are stored."""
    out: List[FrozenSet[int]] = []

    def walk(node):
        if isinstance(node, Vertex):
            for c in node.children:
                out.append(leaf_set(c))
                walk(c)

    walk(root)
    return out


def grouped_edges(root: Node) -> List[FrozenSet[int]]:
    """Non-root edges listed vertex by vertex (preorder), each vertex's inputs together."""
    out: List[FrozenSet[int]] = []
    for v in vertices(root):
        out.extend(leaf_set(c) for c in v.children)
    return out


def grouped_sign(root: Node) -> int:
    """Orientation of the depth-first edge order relative to the vertex-grouped order."""
    return permutation_sign(grouped_edges(root), dfs_edges(root))


def internal_edges(root: Node) -> List[FrozenSet[int]]:
    out: List[FrozenSet[int]] = []

    def walk(node):
        if isinstance(node, Vertex):
            for c in node.children:
                if isinstance(c, Vertex):
                    out.append(leaf_set(c))
                walk(c)

    walk(root)
    return out


def vertices(root: Node) -> List[Vertex]:
    out: List[Vertex] = []

    def walk(node):
        if isinstance(node, Vertex):
            out.append(node)
            for c in node.children:
                walk(c)

    walk(root)
    return out


def count_internal_edges(root: Node) -> int:
    return len(internal_edges(root))


def signature_of(root: Node) -> Signature:
    labs = sorted(leaves(root))
    colors = {}

    def walk(node):
        if isinstance(node, Leaf):
            colors[node.label] = node.color
        else:
            for c in node.children:
                walk(c)

    walk(root)
    return Signature(tuple(colors[l] for l in labs), root.color)


def vertex_signature(v: Vertex) -> Signature:
    return Signature(tuple(c.color for c in v.children), v.color)


def permutation_sign(src: Sequence, dst: Sequence) -> int:
    """Sign of the permutation taking the list ``src`` to the list ``dst``."""
    if len(src) != len(dst):
        raise TreeError("edge lists differ in length")
    pos = {e: i for i, e in enumerate(dst)}
    if len(pos) != len(dst):
        raise TreeError("repeated edge in ordering")
    try:
        seq = [pos[e] for e in src]
    except KeyError as exc:
        raise TreeError(f"edge {sorted(exc.args[0])} missing from target ordering") from None
    return perm_parity(seq)


def perm_parity(seq: Sequence[int]) -> int:
    seen = [False] * len(seq)
    sign = 1
    for i in range(len(seq)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = seq[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# validation and canonical form

def validate(root: Node) -> Signature:
    labs = leaves(root)
    if sorted(labs) != list(range(1, len(labs) + 1)):
        raise TreeError(f"leaf labels {labs} are not a bijection onto 1..{len(labs)}")

    def walk(node, is_root):
        if isinstance(node, Leaf):
            if node.color not in COLORS:
                raise TreeError(f"leaf {node.label} has bad color {node.color!r}")
            return
        if len(node.children) < 2:
            raise TreeError("internal vertices need at least two inputs")
        if node.color == NONE and not is_root:
            raise TreeError("the empty output color can only sit at the root")
        if node.color not in OUTPUTS:
            raise TreeError(f"bad vertex color {node.color!r}")
        for c in node.children:
            walk(c, False)

    walk(root, True)
    return signature_of(root)


def _canon(node: Node) -> Node:
    if isinstance(node, Leaf):
        return node
    kids = sorted((_canon(c) for c in node.children), key=min_key)
    return Vertex(tuple(kids), node.color, node.deco)


def canonicalize(root: Node) -> Tuple[Node, int]:
    """Canonical representative and the orientation sign relating the two edge orders."""
    validate(root)
    canon = _canon(root)
    return canon, permutation_sign(dfs_edges(root), dfs_edges(canon))


def is_canonical(root: Node) -> bool:
    return _canon(root) == root


# ---------------------------------------------------------------------------
# enumeration

def _set_partitions(items: Sequence[int]) -> Iterator[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


VertexFilter = Callable[[Tuple[str, ...], str], bool]


def _type_filter(vertex_types, sig: Signature) -> VertexFilter:
    if vertex_types is None:
        # only the colors that occur in the signature itself
        present = set(sig.inputs) | {sig.output}
        return lambda ins, out: out in present and set(ins) <= present
    if callable(vertex_types):
        return vertex_types
    allowed = set()
    for vt in vertex_types:
        if isinstance(vt, Signature):
            allowed.add((tuple(sorted(vt.inputs)), vt.output))
        else:
            ins, out = vt
            allowed.add((tuple(sorted(ins)), out))
    return lambda ins, out: (tuple(sorted(ins)), out) in allowed


def binary_only(ins, out) -> bool:
    return len(ins) == 2


def enumerate_trees(sig: Signature, internal_edges: int, vertex_types=None) -> List[Node]:
    """All canonical trees of type ``sig`` with the given number of internal edges."""
    allowed = _type_filter(vertex_types, sig)
    colors = {i + 1: c for i, c in enumerate(sig.inputs)}
    memo: Dict[Tuple[FrozenSet[int], str], List[Tuple[Node, int]]] = {}

    def build(labels: Tuple[int, ...], color: str) -> List[Tuple[Node, int]]:
        key = (frozenset(labels), color)
        if key in memo:
            return memo[key]
        res: List[Tuple[Node, int]] = []
        if len(labels) == 1:
            if colors[labels[0]] == color:
                res.append((Leaf(labels[0], color), 0))
            memo[key] = res
            return res
        for part in _set_partitions(list(labels)):
            if len(part) < 2:
                continue
            blocks = sorted((tuple(b) for b in part), key=lambda b: min(label_key(x) for x in b))
            # every assignment of edge colors to the blocks
            options: List[List[Tuple[Node, int]]] = []
            ok = True
            for b in blocks:
                opts = []
                for c in COLORS:
                    for t, k in build(b, c):
                        opts.append((t, k + (0 if len(b) == 1 else 1)))
                if not opts:
                    ok = False
                    break
                options.append(opts)
            if not ok:
                continue
            for combo in _product(options):
                kids = tuple(t for t, _ in combo)
                ins = tuple(k.color for k in kids)
                if not allowed(ins, color):
                    continue
                res.append((Vertex(kids, color), sum(k for _, k in combo)))
        memo[key] = res
        return res

    labels = tuple(range(1, sig.arity + 1))
    out = [t for t, k in build(labels, sig.output) if k == internal_edges]
    out.sort(key=serialize)
    return out


def _product(options):
    if not options:
        yield ()
        return
    for head in options[0]:
        for tail in _product(options[1:]):
            yield (head,) + tail


def corolla(sig: Signature) -> Node:
    if sig.arity == 1:
        return Leaf(1, sig.inputs[0])
    return _canon(Vertex(tuple(Leaf(i + 1, c) for i, c in enumerate(sig.inputs)), sig.output))


# ---------------------------------------------------------------------------
# edge crunching, grafting, relabeling

def _find_and_merge(node: Node, edge: FrozenSet[int]) -> Tuple[Node, bool]:
    if isinstance(node, Leaf):
        return node, False
    kids: List[Node] = []
    hit = False
    for c in node.children:
        if isinstance(c, Vertex) and leaf_set(c) == edge:
            kids.extend(c.children)
            hit = True
        else:
            nc, h = _find_and_merge(c, edge)
            kids.append(nc)
            hit = hit or h
    return Vertex(tuple(kids), node.color, node.deco), hit


def crunch_edge(root: Node, edge: FrozenSet[int]) -> Tuple[Node, int]:
    """Contract an internal edge; the sign comes from deleting it from the edge order."""
    edge = frozenset(edge)
    if edge not in internal_edges(root):
        raise TreeError(f"{sorted(edge)} is not an internal edge")
    order = dfs_edges(root)
    pos = order.index(edge)
    remaining = order[:pos] + order[pos + 1:]
    merged, _ = _find_and_merge(root, edge)
    canon = _canon(merged)
    sign = (-1) ** pos * permutation_sign(remaining, dfs_edges(canon))
    return canon, sign


def _relabel(node: Node, f: Callable[[int], int]) -> Node:
    if isinstance(node, Leaf):
        return Leaf(f(node.label), node.color)
    return Vertex(tuple(_relabel(c, f) for c in node.children), node.color, node.deco)


def graft(t1: Node, i: int, t2: Node) -> Tuple[Node, int]:
    """Fuse the root of ``t2`` into leaf ``i`` of ``t1`` (operadic ∘_i).

    The orientation of the result is compared with Det(t1)⊗Det(t2) followed
    by the newly created internal edge.
    """
    sig1 = validate(t1)
    sig2 = validate(t2)
    n1, n2 = sig1.arity, sig2.arity
    if not 1 <= i <= n1:
        raise TreeError(f"slot {i} out of range for arity {n1}")
    if sig1.inputs[i - 1] != sig2.output:
        raise ColorError(f"cannot graft output {sig2.output} into input {i} of color {sig1.inputs[i - 1]}")

    def f1(l):
        return l if l < i else l + n2 - 1

    def f2(l):
        return l + i - 1

    if isinstance(t2, Leaf):
        return t1, 1
    if isinstance(t1, Leaf):
        return _relabel(t2, f2), 1
    r2 = _relabel(t2, f2)
    e_new = leaf_set(r2)

    def map_edge(e):
        return frozenset(x for l in e for x in ((e_new) if l == i else (f1(l),)))

    ref = [map_edge(e) for e in dfs_edges(t1) if e != frozenset({i})]
    ref += dfs_edges(r2) + [e_new]

    def put(node):
        if isinstance(node, Leaf):
            return r2 if node.label == i else Leaf(f1(node.label), node.color)
        return Vertex(tuple(put(c) for c in node.children), node.color, node.deco)

    joined = put(t1)
    canon = _canon(joined)
    return canon, permutation_sign(ref, dfs_edges(canon))


def act_permutation(root: Node, sigma: Sequence[int], check_colors: Optional[Signature] = None) -> Tuple[Node, int]:
    """Relabel leaf ``l`` as ``sigma[l-1]`` (1-based images) and canonicalize."""
    sig = validate(root)
    n = sig.arity
    if sorted(sigma) != list(range(1, n + 1)):
        raise TreeError(f"{tuple(sigma)} is not a permutation of 1..{n}")
    if check_colors is not None:
        for l in range(1, n + 1):
            if check_colors.inputs[sigma[l - 1] - 1] != sig.inputs[l - 1]:
                raise ColorError("permutation does not respect the input colors")
    moved = _relabel(root, lambda l: sigma[l - 1])
    ref = [frozenset(sigma[x - 1] for x in e) for e in dfs_edges(root)]
    canon = _canon(moved)
    return canon, permutation_sign(ref, dfs_edges(canon))


def compose_perms(s: Sequence[int], t: Sequence[int]) -> Tuple[int, ...]:
    """(s∘t)(l) = s(t(l)), both 1-based."""
    return tuple(s[t[l] - 1] for l in range(len(t)))


# ---------------------------------------------------------------------------
# debug serialization

def serialize(node: Node) -> str:
    if isinstance(node, Leaf):
        return f"{node.label}" + ("~" if node.color == DASHED else "")
    inner = " ".join(serialize(c) for c in node.children)
    suffix = {FULL: "", DASHED: "~", NONE: "."}[node.color]
    deco = "" if node.deco is None else f"<{node.deco}>"
    return f"({inner}){suffix}{deco}"


def parse(text: str) -> Node:
    """Inverse of :func:`serialize` for undecorated trees."""
    pos = 0
    s = text.strip()

    def node():
        nonlocal pos
        if s[pos] == "(":
            pos += 1
            kids = []
            while True:
                while s[pos] == " ":
                    pos += 1
                if s[pos] == ")":
                    pos += 1
                    break
                kids.append(node())
            color = FULL
            if pos < len(s) and s[pos] == "~":
                color = DASHED
                pos += 1
            elif pos < len(s) and s[pos] == ".":
                color = NONE
                pos += 1
            return Vertex(tuple(kids), color)
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        if start == pos:
            raise TreeError(f"unexpected character {s[pos]!r} at column {pos + 1}")
        lab = int(s[start:pos])
        color = FULL
        if pos < len(s) and s[pos] == "~":
            color = DASHED
            pos += 1
        return Leaf(lab, color)

    out = node()
    if pos != len(s):
        raise TreeError(f"trailing text at column {pos + 1}")
    return out
