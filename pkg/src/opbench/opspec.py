"""Plain-text operad presentations.

Example::

    [generators]
    f f f : mu mu21
    swap mu = mu21
    swap mu21 = mu
    tau mu = mu
    tau mu21 = mu21

    [relations]
    (mu o1 mu) - (mu o2 mu)
    (mu o1 mu)[2 1 3] - (mu o2 mu)[2 1 3]

A generator line ``y z x : names`` declares ``E^{y,z}_x`` with colors
``f``/``d`` (``none`` or ``-`` for an empty output).  ``swap a = [-]b`` gives
the S2 action and optional ``tau`` lines the rotation of arity-3 legs.  A
relation term is ``c * (a oI b)``: graft b into input I of a, then relabel
leaf l as the l-th entry of the optional permutation.  Lines starting with
``#`` are comments.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .operad import DTree, GeneratorData, OperadPresentation, PresentationError, dt_graft, dt_relabel, sig_of_tree
from .trees import NONE, ColorError, Signature, TreeError


class SpecSyntaxError(PresentationError):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


_COLOR = {"f": "f", "d": "d", "none": NONE, "-": NONE, "∅": NONE}
_TERM = re.compile(r"\s*([+-])?\s*(?:([0-9]+(?:/[0-9]+)?)\s*\*?\s*)?\(\s*([^\s()]+)\s+o([1-9])\s+([^\s()]+)\s*\)"
                   r"(?:\s*\[([0-9,\s]+)\])?")
_COMBO = re.compile(r"\s*([+-])?\s*(?:([0-9]+(?:/[0-9]+)?)\s*\*?\s*)?([A-Za-z_][\w!']*)")


def _linear_combination(text: str, lineno: int, col0: int) -> Dict[str, Fraction]:
    out: Dict[str, Fraction] = {}
    pos = 0
    first = True
    while pos < len(text.rstrip()):
        m = _COMBO.match(text, pos)
        if not m or (not first and not m.group(1)):
            raise SpecSyntaxError(lineno, col0 + pos + 1, "expected [sign] [coefficient] name")
        c = Fraction(m.group(2) or 1) * (-1 if m.group(1) == "-" else 1)
        out[m.group(3)] = out.get(m.group(3), Fraction(0)) + c
        pos = m.end()
        first = False
    return out


def parse_operad_spec(text: str, name: str = "custom") -> OperadPresentation:
    spaces: Dict[Tuple[str, str, str], List[str]] = {}
    swap: Dict[str, Tuple[int, str]] = {}
    tau: Dict[str, Dict[str, Fraction]] = {}
    raw_relations: List[Tuple[int, str, int]] = []
    section: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        col0 = len(line) - len(line.lstrip())
        if stripped in ("[generators]", "[relations]"):
            section = stripped[1:-1]
            continue
        if stripped.startswith("["):
            raise SpecSyntaxError(lineno, col0 + 1, f"unknown section {stripped}")
        if section is None:
            raise SpecSyntaxError(lineno, col0 + 1, "content before any [generators] or [relations] header")
        if section == "relations":
            raw_relations.append((lineno, line, col0))
            continue
        words = stripped.split()
        if words[0] in ("swap", "tau"):
            if len(words) < 4 or words[2] != "=":
                raise SpecSyntaxError(lineno, col0 + 1, f"expected '{words[0]} name = ...'")
            rhs_col = line.index("=") + 1
            combo = _linear_combination(line[rhs_col:], lineno, rhs_col)
            if words[0] == "swap":
                if len(combo) != 1 or abs(next(iter(combo.values()))) != 1:
                    raise SpecSyntaxError(lineno, rhs_col + 1, "swap must be a signed generator")
                (b, c), = combo.items()
                swap[words[1]] = (int(c), b)
            else:
                tau[words[1]] = combo
            continue
        if ":" not in words:
            raise SpecSyntaxError(lineno, col0 + 1, "expected 'y z x : names'")
        k = words.index(":")
        if k != 3:
            raise SpecSyntaxError(lineno, col0 + 1, "a generator type has exactly three colors")
        try:
            typ = tuple(_COLOR[w] for w in words[:3])
        except KeyError as exc:
            raise SpecSyntaxError(lineno, col0 + 1, f"unknown color {exc.args[0]!r}") from None
        if typ[0] == NONE or typ[1] == NONE:
            raise SpecSyntaxError(lineno, col0 + 1, "inputs cannot have the empty color")
        spaces.setdefault(typ, []).extend(words[k + 1:])
    try:
        gens = GeneratorData(spaces, swap, tau or None)
    except PresentationError as exc:
        raise SpecSyntaxError(0, 0, str(exc)) from None
    relations: Dict[Signature, List[Dict[DTree, Fraction]]] = {}
    for lineno, line, col0 in raw_relations:
        vec, sig = _parse_relation(line, lineno, gens)
        relations.setdefault(sig, []).append(vec)
    return OperadPresentation(name, gens, relations)


def _parse_relation(line: str, lineno: int, gens: GeneratorData):
    vec: Dict[DTree, Fraction] = {}
    sig: Optional[Signature] = None
    pos, first = 0, True
    while line[pos:].strip():
        m = _TERM.match(line, pos)
        if not m or (not first and not m.group(1)):
            col = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
            raise SpecSyntaxError(lineno, col, "expected a term like 'c * (a o1 b)[perm]'")
        sign = -1 if m.group(1) == "-" else 1
        coeff = Fraction(m.group(2) or 1) * sign
        a, i, b = m.group(3), int(m.group(4)), m.group(5)
        for g, grp in ((a, 3), (b, 5)):
            if g not in gens.type_of:
                raise SpecSyntaxError(lineno, m.start(grp) + 1, f"unknown generator {g!r}")
        if i > 2:
            raise SpecSyntaxError(lineno, m.start(4), "binary generators have slots 1 and 2")
        tree = dt_graft((a, 1, 2), i, (b, 1, 2))
        if m.group(6):
            perm = [int(x) for x in re.split(r"[,\s]+", m.group(6).strip())]
            if sorted(perm) != [1, 2, 3]:
                raise SpecSyntaxError(lineno, m.start(6) + 1, "leaf labeling must be a permutation of 1 2 3")
            tree = dt_relabel(tree, lambda l: perm[l - 1])
        try:
            colors = _leaf_colors(tree, gens)
            s = sig_of_tree(tree, gens, colors)
        except (ColorError, TreeError, KeyError) as exc:
            raise SpecSyntaxError(lineno, m.start() + 1, f"colors do not fit: {exc}") from None
        if sig is not None and s != sig:
            raise SpecSyntaxError(lineno, m.start() + 1, f"term has signature {s}, expected {sig}")
        sig = s
        vec[tree] = vec.get(tree, Fraction(0)) + coeff
        pos, first = m.end(), False
    if sig is None:
        raise SpecSyntaxError(lineno, 1, "empty relation")
    return vec, sig


def _leaf_colors(tree: DTree, gens: GeneratorData) -> Dict[int, str]:
    out: Dict[int, str] = {}

    def walk(t, expect):
        if isinstance(t, int):
            out[t] = expect
            return
        y, z, x = gens.type_of[t[0]]
        if expect is not None and x != expect:
            raise ColorError(f"{t[0]} outputs {x}, slot needs {expect}")
        walk(t[1], y)
        walk(t[2], z)

    walk(tree, None)
    return out


def load_operad_spec(path: str) -> OperadPresentation:
    import os
    with open(path, encoding="utf-8") as fh:
        return parse_operad_spec(fh.read(), os.path.splitext(os.path.basename(path))[0])
