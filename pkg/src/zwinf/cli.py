"""Command-line front end.

Exit codes: 0 when every verdict passes, 1 when some check fails, 2 on
usage or input errors (bad flags, unreadable or malformed diagrams,
dimensions that cannot hold a photon number).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from zwinf import hamiltonians as ham
from zwinf import rules
from zwinf.diagram import DiagramError, to_dot
from zwinf.dsl import parse_dsl
from zwinf.qudit import dumps_tensor, interp_diagram
from zwinf.truncation import lifted_equal, truncate, truncated_equal

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_dims(text: str) -> list[int]:
    """``2..6`` or ``2,3,5``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            dims = list(range(int(lo), int(hi) + 1))
        else:
            dims = [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None
    if not dims or min(dims) < 2:
        raise argparse.ArgumentTypeError("dimensions must be at least 2")
    return dims


def parse_policy(text: str):
    if text in ("bare", "projector-d", "projector_d"):
        return text.replace("-", "_")
    for prefix in ("projector-n:", "projector_n:"):
        if text.startswith(prefix):
            try:
                return ("projector_n", int(text[len(prefix):]))
            except ValueError:
                break
    raise argparse.ArgumentTypeError(f"unknown policy {text!r} (bare, projector-d, projector-n:N)")


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_dsl(text)
    except DiagramError as e:
        raise UsageError(f"{path}:{e}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


# --- commands ---------------------------------------------------------------

def cmd_eval(args) -> int:
    diagram = _load(args.file)
    t = interp_diagram(truncate(diagram, args.d).diagram, args.d)
    _emit(dumps_tensor(t) + "\n", args.out)
    return OK


def cmd_export_tensor(args) -> int:
    diagram = _load(args.file)
    t = interp_diagram(truncate(diagram, args.d).diagram, args.d)
    if args.out.endswith(".npy"):
        np.save(args.out, t.matrix)
    else:
        _emit(dumps_tensor(t) + "\n", args.out)
    return OK


def cmd_export_dot(args) -> int:
    _emit(to_dot(_load(args.file), args.name), args.out)
    return OK


def cmd_check_eq(args) -> int:
    a, b = _load(args.a), _load(args.b)
    rep = truncated_equal(a, b, args.d, args.policy, args.tol)
    _emit(_dumps(rep.to_json()), args.out)
    return OK if rep.equal else FAILED


def cmd_lift_check(args) -> int:
    a, b = _load(args.a), _load(args.b)
    rep = lifted_equal(a, b, args.nmax, args.tol, args.sweep)
    _emit(_dumps(rep.to_json()), args.out)
    return OK if rep.equal else FAILED


def cmd_certify_rules(args) -> int:
    if args.rules:
        ids = args.rules.split(",")
        for rid in ids:
            if rid not in rules.CATALOG:
                raise UsageError(f"unknown rule {rid!r}")
        certs = [rules.soundness_check(rid, args.dims, args.tol, args.nmax) for rid in ids]
        bundle = {"dims": args.dims, "tol": args.tol, "n_max": args.nmax,
                  "rules": [c.to_json() for c in certs],
                  "verdict": "pass" if all(c.passed for c in certs) else "fail"}
        text = _dumps(bundle)
    else:
        text = rules.certificate_bundle(args.dims, args.tol, args.nmax)
    _emit(text, args.out)
    return OK if json.loads(text)["verdict"] == "pass" else FAILED


DEFAULT_GATES = (
    ham.GateSpec("PhaseShift", {"alpha": 0.7}),
    ham.GateSpec("Kerr", {"kappa": 0.3}),
    ham.GateSpec("CrossKerr", {"tau": 0.45}),
    ham.GateSpec("BeamSplitter", {"theta": math.pi / 5, "phi": 0.4}),
)


def cmd_verify_gates(args) -> int:
    certs = [ham.verify_gate(g, d=d, tol=args.tol) for g in DEFAULT_GATES for d in args.dims]
    doc = {"tol": args.tol, "certificates": [c.to_json() for c in certs],
           "verdict": "pass" if all(c.verdict == "pass" for c in certs) else "fail"}
    _emit(_dumps(doc), args.out)
    return OK if doc["verdict"] == "pass" else FAILED


# --- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zwinf", description="Diagram evaluation, equality checks and rule certification.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, d=False, out=True):
        if d:
            sp.add_argument("--d", type=int, required=True, help="qudit dimension")
        sp.add_argument("--tol", type=float, default=1e-9)
        if out:
            sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("eval", help="truncated tensor of a diagram as JSON")
    sp.add_argument("file")
    common(sp, d=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("check-eq", help="projector-guarded equality of two truncations")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--policy", type=parse_policy, default="projector_d")
    common(sp, d=True)
    sp.set_defaults(func=cmd_check_eq)

    sp = sub.add_parser("lift-check", help="sector-by-sector lifted equality")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--nmax", type=int, default=4)
    sp.add_argument("--sweep", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_lift_check)

    sp = sub.add_parser("certify-rules", help="soundness certificates for the rule catalog")
    sp.add_argument("--dims", type=parse_dims, default=list(range(2, 7)))
    sp.add_argument("--nmax", type=int, default=4)
    sp.add_argument("--rules", help="comma-separated rule ids (default: all)")
    common(sp)
    sp.set_defaults(func=cmd_certify_rules)

    sp = sub.add_parser("verify-gates", help="gate diagrams against exp(iH)")
    sp.add_argument("--dims", type=parse_dims, default=list(range(2, 7)))
    common(sp)
    sp.set_defaults(func=cmd_verify_gates)

    sp = sub.add_parser("export-dot", help="Graphviz rendering of a diagram")
    sp.add_argument("file")
    sp.add_argument("--name", default="diagram")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_dot)

    sp = sub.add_parser("export-tensor", help="write the truncated tensor (.json or .npy)")
    sp.add_argument("file")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_export_tensor)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "d", 2) < 2:
            raise UsageError("--d must be at least 2")
        return args.func(args)
    except UsageError as e:
        print(f"zwinf: {e}", file=sys.stderr)
        return USAGE
    except (DiagramError, ValueError) as e:
        print(f"zwinf: {type(e).__name__}: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
