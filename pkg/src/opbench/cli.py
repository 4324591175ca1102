"""Command-line entry point: ``opbench <command> [options]``.

Every command prints one JSON report and exits 0 exactly when every check in
it passes, 1 when some check fails, and 2 on unreadable or inconsistent input.
Reports are deterministic for fixed inputs and seed; ``--timing`` adds wall
times and so gives up byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

from . import cobar, cyclic, homotopy, pd
from .linalg import IntegrityError
from .operad import (BUILTINS, OperadPresentation, PresentationError, builtin_presentation, quadratic_dual,
                     realize)
from .opspec import load_operad_spec

SCHEMA_VERSION = 1
DEFAULT_SEED = 0
# bounds that run in seconds to a few minutes; larger ones need --slow
DESK_ARITY = 4
DESK_TRUNCATION = 4


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    operad: str = "assoc"
    max_arity: int = 4
    max_inputs: int = 4
    truncate: Optional[int] = None
    slow: bool = False
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    timing: bool = False

    def __post_init__(self):
        for name in ("max_arity", "max_inputs"):
            v = getattr(self, name)
            if v < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
            if v > DESK_ARITY and not self.slow:
                raise UsageError(f"--{name.replace('_', '-')} {v} exceeds {DESK_ARITY}; pass --slow to allow it")
        if self.truncate is not None:
            if self.truncate < 1:
                raise UsageError("--truncate must be positive")
            if self.truncate > DESK_TRUNCATION and not self.slow:
                raise UsageError(f"--truncate {self.truncate} exceeds {DESK_TRUNCATION}; pass --slow to allow it")

    def as_dict(self) -> dict:
        return {"operad": self.operad, "max_arity": self.max_arity, "max_inputs": self.max_inputs,
                "truncate": self.truncate, "slow": self.slow, "seed": self.seed}


def load_presentation(source: str) -> OperadPresentation:
    """A builtin name, or a path to an operad description file."""
    if source in BUILTINS:
        if source == "lie":
            return quadratic_dual(builtin_presentation("comm"), name="lie")
        return builtin_presentation(source)
    if os.path.exists(source):
        return load_operad_spec(source)
    raise UsageError(f"unknown operad {source!r}: not one of {', '.join(BUILTINS)} and not a file")


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


# --------------------------------------------------------------------------- commands

def cmd_check_koszul(cfg: RunConfig, args) -> dict:
    p = load_presentation(cfg.operad)
    rep = cobar.koszul_check(p, cfg.max_arity, seed=args.order_seed)
    out = rep.as_dict(cfg.timing)
    out["h0_dims"] = rep.h0_dims()
    out["ok"] = rep.ok
    return out


def cmd_dims(cfg: RunConfig, args) -> dict:
    p = load_presentation(cfg.operad)
    t = realize(p, cfg.max_arity)
    dual = realize(quadratic_dual(p), cfg.max_arity, validate=False)
    return {"operad": p.name, "dims": t.dims_table(), "dual": {"operad": dual.name, "dims": dual.dims_table()},
            "ok": True}


def _cyclic_checks(cfg: RunConfig):
    p = load_presentation(cfg.operad)
    top = cfg.max_inputs
    t = realize(p, top, validate=False)
    c = cyclic.cyclic_structure(t, top)
    return p, t, c, cyclic.verify_cyclic_axioms(t, c, top)


def cmd_verify_cyclic(cfg: RunConfig, args) -> dict:
    p, t, c, checks = _cyclic_checks(cfg)
    return {"operad": p.name, "rotation_source": c.source, "bound": "m+n-1 <= %d" % cfg.max_inputs,
            "checks": [r.as_dict() for r in checks], "ok": all(r.ok for r in checks)}


def cmd_hat(cfg: RunConfig, args) -> dict:
    p, t, c, checks = _cyclic_checks(cfg)
    h = cyclic.build_hat(t, c)
    assoc = cyclic.check_hat_associativity(h, cfg.max_inputs)
    pres = cyclic.compare_hat_presentation(h, p, cfg.max_inputs)
    kz = cyclic.hat_koszul_check(p, cfg.max_inputs, seed=args.order_seed)
    out = {
        "operad": p.name,
        "cyclic_axioms": [r.as_dict() for r in checks],
        "associativity": [r.as_dict() for r in assoc],
        "presentation": pres,
        "koszul": kz.as_dict(cfg.timing),
    }
    ok = (all(r.ok for r in checks) and all(r.ok for r in assoc)
          and all(r["relations_vanish"] and r["bijective"] for r in pres) and kz.ok)
    if cfg.max_inputs >= 4:
        rc = cyclic.dffd_resolution_counts(p, seed=args.order_seed)
        counts_ok = (rc["ok"] and all(rc["dims"].get(k) == v for k, v in rc["predicted"].items())
                     and rc["identity"]["lhs"] == rc["identity"]["rhs"])
        out["d_f_f_d"] = {
            "dims": {str(k): v for k, v in sorted(rc["dims"].items())},
            "predicted": {str(k): v for k, v in sorted(rc["predicted"].items())},
            "homology": {str(k): v for k, v in sorted(rc["homology"].items())},
            "target_dim": rc["target_dim"], "identity": rc["identity"], "verdict": _verdict(counts_ok)}
        ok = ok and counts_ok
    out["ok"] = ok
    return out


def homotopy_file_report(text: str, N: Optional[int], convention: str = "cyclic") -> dict:
    doc = homotopy.load_structure(text)
    n = N if N is not None else int(doc.get("truncate", DESK_TRUNCATION))
    d, g, f, module = homotopy.structure_from_document(doc)
    h = homotopy.induce_dual_module(g, module, convention)
    res = [homotopy.check_d_squared(d, n), homotopy.check_g_squared(g, n), homotopy.check_g_squared(h, n, tag="h")]
    ip = homotopy.check_inner_product(f, g, d, module, n, h=h)
    return {"operad": d.operad, "truncation": n, "convention": convention,
            "derivations": [r.as_dict() for r in res], "inner_product": ip.as_dict(),
            "ok": all(r.ok for r in res) and ip.ok}


def homotopy_suite(seed: int, count: int, N: int) -> dict:
    """g² = 0 forces h² = 0 on seeded random strict bimodules."""
    cases = []
    for k in range(count):
        name, alg = homotopy.random_strict_module(seed + k)
        d, g, _ = homotopy.from_strict(alg)
        h = homotopy.induce_dual_module(g, alg.module)
        g2 = homotopy.check_g_squared(g, N)
        h2 = homotopy.check_g_squared(h, N, tag="h")
        cases.append({"seed": seed + k, "structure": name, "g_squared": g2.as_dict(),
                      "h_squared": h2.as_dict(), "verdict": _verdict(g2.ok and h2.ok)})
    return {"cases": cases, "ok": all(c["verdict"] == "pass" for c in cases)}


def cmd_homotopy_check(cfg: RunConfig, args) -> dict:
    if args.structure:
        with open(args.structure, encoding="utf-8") as fh:
            text = fh.read()
        return homotopy_file_report(text, cfg.truncate, args.convention)
    return homotopy_suite(cfg.seed, args.count, cfg.truncate or DESK_TRUNCATION)


def cmd_pd(cfg: RunConfig, args) -> dict:
    with open(args.complex, encoding="utf-8") as fh:
        K = pd.load_complex(fh.read())
    with open(args.cycle, encoding="utf-8") as fh:
        mu = pd.load_cycle(fh.read(), K)
    N = cfg.truncate or 3
    cyc = pd.verify_fundamental_cycle(K, mu)
    if not cyc.ok:
        return {"cycle": cyc.as_dict(), "ok": False}
    rep = pd.run_pd(K, mu, N, symmetric=args.symmetric_solve)
    out = rep.as_dict(cfg.timing)
    out["symmetric_solve"] = args.symmetric_solve
    out["ok"] = rep.ok
    return out


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], dict]] = {
    "check-koszul": cmd_check_koszul,
    "hat": cmd_hat,
    "dims": cmd_dims,
    "verify-cyclic": cmd_verify_cyclic,
    "homotopy-check": cmd_homotopy_check,
    "pd": cmd_pd,
}


# --------------------------------------------------------------------------- parsing and output

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--operad", default="assoc", help="builtin name (assoc, comm, lie) or operad file")
    common.add_argument("--max-arity", type=int, default=4)
    common.add_argument("--max-inputs", type=int, default=4)
    common.add_argument("--truncate", type=int, default=None, help="drop words longer than N")
    common.add_argument("--slow", action="store_true", help="allow bounds beyond desk scale")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed of randomized suites")
    common.add_argument("--order-seed", type=int, default=None, help="alternative leaf-ordering seed")
    common.add_argument("--out", default=None, help="also write the report to this file")
    common.add_argument("--timing", action="store_true", help="include wall times")

    parser = argparse.ArgumentParser(prog="opbench", description="Exact checks for quadratic operads, "
                                     "cyclic 0/1-operads and homotopy inner products.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check-koszul", parents=[common], help="cobar resolution of the quadratic dual")
    sub.add_parser("hat", parents=[common], help="build Ô and check it")
    sub.add_parser("dims", parents=[common], help="dimension table of the operad and its dual")
    sub.add_parser("verify-cyclic", parents=[common], help="cyclic operad axioms")
    hc = sub.add_parser("homotopy-check", parents=[common], help="homotopy inner product residuals")
    hc.add_argument("structure", nargs="?", help="JSON structure file; omit to run the random suite")
    hc.add_argument("--count", type=int, default=50, help="cases in the random suite")
    hc.add_argument("--convention", choices=homotopy.CONVENTIONS, default="cyclic")
    p = sub.add_parser("pd", parents=[common], help="inner product from a fundamental cycle")
    p.add_argument("complex", help="file of 'simplex v0 ... vk' lines")
    p.add_argument("cycle", help="file of 'coeff v0 ... vk' lines")
    p.add_argument("--symmetric-solve", action="store_true",
                   help="solve for the inner product inside the antisymmetrized span")
    return parser


def render(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False, default=str) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> tuple:
    """Return (exit status, report, parsed arguments) without printing."""
    parser = build_parser()
    args = parser.parse_args(argv)
    head = {"schema_version": SCHEMA_VERSION, "command": args.command}
    t0 = time.perf_counter()
    try:
        cfg = RunConfig(args.command, args.operad, args.max_arity, args.max_inputs, args.truncate,
                        args.slow, args.seed, args.out, args.timing)
        head["config"] = cfg.as_dict()
        body = COMMANDS[args.command](cfg, args)
    except (UsageError, PresentationError, homotopy.StructureError, pd.ComplexError,
            OSError, IntegrityError, ValueError) as exc:
        head.update({"verdict": "error", "error": f"{type(exc).__name__}: {exc}"})
        return 2, head, args
    ok = bool(body.pop("ok"))
    head.update(body)
    head["verdict"] = _verdict(ok)
    if args.timing:
        head["seconds"] = round(time.perf_counter() - t0, 3)
    return (0 if ok else 1), head, args


def main(argv: Optional[Sequence[str]] = None) -> int:
    status, report, args = run(argv)
    text = render(report)
    sys.stdout.write(text)
    if status == 2:
        sys.stderr.write(f"opbench: {report['error']}\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
