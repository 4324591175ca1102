import json
import subprocess
import sys
from pathlib import Path

import pytest

from opbench.cli import SCHEMA_VERSION, main, render, run

DATA = Path(__file__).resolve().parents[1] / "data"


def report(argv):
    status, rep, _ = run(argv)
    return status, rep


@pytest.mark.parametrize("argv,status,h0", [
    (["check-koszul", "--operad", "assoc", "--max-arity", "4"], 0, [2, 6, 24]),
    (["check-koszul", "--operad", "comm", "--max-arity", "4"], 0, [1, 1, 1]),
    (["check-koszul", "--operad", "assoc", "--max-arity", "2"], 0, [2]),
])
def test_check_koszul(argv, status, h0):
    s, rep = report(argv)
    assert s == status and rep["h0_dims"] == h0
    assert rep["schema_version"] == SCHEMA_VERSION and rep["verdict"] == "pass"


def test_hat_comm_and_counts():
    s, rep = report(["hat", "--operad", "comm"])
    assert s == 0
    assert rep["d_f_f_d"]["homology"]["0"] == 1


def test_dims_and_verify_cyclic():
    s, rep = report(["dims", "--operad", "lie", "--max-arity", "3"])
    assert s == 0 and rep["dual"]["dims"]["(f,f,f;f)"]["quotient"] == 1
    s, rep = report(["verify-cyclic", "--operad", str(DATA / "assoc.op")])
    assert s == 0 and all(c["verdict"] == "pass" for c in rep["checks"])


@pytest.mark.parametrize("name,status", [("frobenius", 0), ("noninvariant", 1), ("zero", 0)])
def test_homotopy_check_files(name, status):
    s, rep = report(["homotopy-check", str(DATA / f"{name}.json")])
    assert s == status
    if status:
        failing = [r for r in rep["inner_product"]["residuals"] if r["verdict"] == "fail"]
        assert failing and failing[0]["witness"]


def test_homotopy_suite_uses_seed():
    s, rep = report(["homotopy-check", "--seed", "100", "--count", "5"])
    assert s == 0 and [c["seed"] for c in rep["cases"]] == [100, 101, 102, 103, 104]


def test_pd_circle_and_non_cycle():
    s, rep = report(["pd", str(DATA / "circle.complex"), str(DATA / "circle.cycle"), "--truncate", "4"])
    assert s == 0 and rep["f"] and rep["lowest_matches_cap"]
    s, rep = report(["pd", str(DATA / "circle.complex"), str(DATA / "circle_not_a_cycle.cycle")])
    assert s == 1 and rep["cycle"]["boundary"] == {"[0]": "-1", "[2]": "1"}


@pytest.mark.parametrize("argv,fragment", [
    (["check-koszul", "--operad", "nope"], "unknown operad"),
    (["check-koszul", "--max-arity", "0"], "must be positive"),
    (["check-koszul", "--max-arity", "6"], "--slow"),
    (["hat", "--operad", "BAD"], "line"),
    (["homotopy-check", "missing.json"], "FileNotFoundError"),
])
def test_errors_exit_two(argv, fragment, tmp_path):
    if "BAD" in argv:
        bad = tmp_path / "bad.op"
        bad.write_text((DATA / "assoc.op").read_text().replace("mu o2 mu", "mu o2 nu"))
        argv = [a if a != "BAD" else str(bad) for a in argv]
    s, rep = report(argv)
    assert s == 2 and rep["verdict"] == "error" and fragment in rep["error"]


def test_reports_are_byte_identical_and_written_to_out(tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["homotopy-check", "--seed", "7", "--count", "4"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()
    assert json.loads(out1.read_text())["schema_version"] == SCHEMA_VERSION


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "opbench", "dims", "--operad", "comm", "--max-arity", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "pass"


def test_render_is_sorted_json():
    text = render({"b": 1, "a": 2})
    assert text.index('"a"') < text.index('"b"') and text.endswith("\n")


@pytest.mark.parametrize("argv", [
    ["check-koszul", "--operad", "assoc", "--max-arity", "4"],
    ["hat", "--operad", "comm"],
])
def test_reports_do_not_depend_on_order_seed(argv):
    _, base = report(argv)
    for seed in (3, 17):
        _, rep = report(argv + ["--order-seed", str(seed)])
        assert render(rep) == render(base)
