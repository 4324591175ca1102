from pathlib import Path

import pytest

from opbench.cobar import koszul_check
from opbench.operad import builtin_presentation, realize
from opbench.opspec import SpecSyntaxError, load_operad_spec, parse_operad_spec
from opbench.trees import Signature

DATA = Path(__file__).resolve().parents[1] / "data"

COMM = """
[generators]
f f f : c
swap c = c
[relations]
(c o1 c) - (c o2 c)
(c o1 c) - (c o1 c)[1 3 2]
"""


def dims(p, top=4):
    t = realize(p, top, validate=False)
    return [t.dim(Signature.full(n)) for n in range(2, top + 1)]


def test_assoc_file_matches_builtin():
    p = load_operad_spec(str(DATA / "assoc.op"))
    assert dims(p) == dims(builtin_presentation("assoc")) == [2, 6, 24]
    assert koszul_check(p, 4).ok


def test_inline_comm():
    assert dims(parse_operad_spec(COMM, "comm2")) == [1, 1, 1]


@pytest.mark.parametrize("text,line,col,fragment", [
    ("[generators]\nf f f : mu\nswap mu = mu\n[relations]\n(mu o1 nu) - (mu o2 mu)\n", 5, 8, "unknown generator"),
    ("[generators]\nf f q : mu\n", 2, 1, "unknown color"),
    ("f f f : mu\n", 1, 1, "before any"),
    ("[stuff]\n", 1, 1, "unknown section"),
    ("[generators]\nf f : mu\n", 2, 1, "three colors"),
    ("[generators]\nf f f : mu\nswap mu = 2 mu\n", 3, 10, "signed generator"),
])
def test_errors_carry_positions(text, line, col, fragment):
    with pytest.raises(SpecSyntaxError) as exc:
        parse_operad_spec(text)
    assert exc.value.line == line
    assert exc.value.col == col
    assert fragment in str(exc.value)
