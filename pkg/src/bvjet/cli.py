"""Command line: bracket, laplacian, verify, yangmills, qme.

Exit status 0 when every check passes (or is skipped), 1 when one fails,
2 on a usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .exprcore import FieldContent
from .functionals import LocalFunctional, functional_equal, integral, laplacian_jet, schouten_jet
from .funcalc import functional_laplacian, functional_schouten, lift, restrict_to_diagonal
from .parser import DEFAULT_FIELDS_TEXT, ParseError, parse_density, parse_document, parse_fields
from .suites import SUITE_NAMES, Check, Context, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
BLOCK_SEPARATOR = "|"


class UsageError(Exception):
    pass


def _seed() -> int:
    raw = os.environ.get("BVJET_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"BVJET_SEED must be an integer, got {raw!r}") from None


def _functional(text: str, fc: FieldContent, line: int = 1) -> LocalFunctional:
    """``a | b`` is the ordered product of the integrals of a and b."""
    out = None
    for part in text.split(BLOCK_SEPARATOR):
        block = integral(fc, parse_density(part.strip(), fc, line))
        out = block if out is None else out * block
    return out


def _operands(args, count: int) -> tuple[FieldContent, list[LocalFunctional]]:
    if args.input:
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
        lines = text.splitlines()
        # let headers and comments be handled by the document reader, then
        # rebuild each body line so that block separators survive
        fc, _ = parse_document("\n".join(ln for ln in lines if ln.strip().startswith(("fields:", "dim:"))),
                               args.fields, args.dim)
        bodies = [(n, ln.split("#", 1)[0].strip()) for n, ln in enumerate(lines, 1)]
        bodies = [(n, b) for n, b in bodies if b and not b.startswith(("fields:", "dim:"))]
        funcs = [_functional(b, fc, n) for n, b in bodies]
    else:
        fc = parse_fields(args.fields if args.fields is not None else DEFAULT_FIELDS_TEXT, args.dim or 1)
        funcs = [_functional(d, fc) for d in args.densities]
    if len(funcs) != count:
        raise UsageError(f"expected {count} functional(s), got {len(funcs)}")
    return fc, funcs


def _expect_check(args, fc, value: LocalFunctional, anchor: str) -> list[Check]:
    if args.expect is None:
        return []
    expected = _functional(args.expect, fc)
    ok = functional_equal(value, expected)
    return [Check("expect", anchor, "pass" if ok else "fail",
                  f"result {'agrees with' if ok else 'differs from'} {expected.text()} modulo divergences")]


def cmd_bracket(args) -> tuple[list[Check], str]:
    fc, (F, G) = _operands(args, 2)
    if args.mode == "functional":
        E = functional_schouten(lift(F), lift(G))
        value = restrict_to_diagonal(E)
        shown = f"{E.text()}\ndiagonal: {value.text()}"
    else:
        value = schouten_jet(F, G)
        shown = value.text()
    return _expect_check(args, fc, value, "[[F,G]] equals the expected functional"), shown


def cmd_laplacian(args) -> tuple[list[Check], str]:
    fc, (F,) = _operands(args, 1)
    if args.mode == "functional":
        E = functional_laplacian(lift(F))
        value = restrict_to_diagonal(E)
        shown = f"{E.text()}\ndiagonal: {value.text()}"
    else:
        value = laplacian_jet(F, form=args.form)
        shown = value.text()
    return _expect_check(args, fc, value, "Delta F equals the expected functional"), shown


def cmd_verify(args) -> tuple[list[Check], str]:
    skip = args.fields is not None and not args.fields.strip()
    ctx = Context(seed=_seed(), algebra=args.algebra)
    if args.cases is not None:
        ctx.cases = args.cases
        ctx.derivation_cases = min(args.cases, ctx.derivation_cases)
        ctx.grassmann_cases = min(args.cases, ctx.grassmann_cases)
    if not skip and args.fields is not None:
        ctx.fc = parse_fields(args.fields, args.dim or 1)
    elif args.dim not in (None, 1):
        raise UsageError("--dim needs an explicit --fields for the property suites")
    return run_suite(args.suite, ctx, skip=skip), ""


def _load_model(args):
    from .gauge import YangMillsModel, load_algebra

    return YangMillsModel(load_algebra(args.algebra), args.dim or 2)


def cmd_yangmills(args) -> tuple[list[Check], str]:
    from .gauge import build_bv_action, verify_classical_master, verify_laplacian_zero

    m = _load_model(args)
    lap = verify_laplacian_zero(m)
    cme = verify_classical_master(m)
    n, name = m.n, m.algebra.name
    checks = [
        Check("yangmills.jet_laplacian", f"Delta_jet S = 0 for {name}, n={n}", "pass" if lap["jet"] else "fail",
              f"traces {lap['traces']}; gauge sector {lap['gauge_sector']}; ghost sector {lap['ghost_sector']}"),
        Check("yangmills.functional_laplacian", f"diagonal of functional Delta S = 0 for {name}, n={n}",
              "pass" if lap["functional"] else "fail", ""),
        Check("yangmills.master", f"[[S,S]] = 0 for {name}, n={n}", "pass" if cme["passed"] else "fail",
              f"{cme['metric_defects']} index triples where the delta metric is not ad-invariant"),
    ]
    shown = build_bv_action(m).text() if args.show_action else ""
    return checks, shown


def cmd_qme(args) -> tuple[list[Check], str]:
    from .gauge import build_bv_action
    from .qme import check_qme

    if args.densities or args.input:
        _, (S,) = _operands(args, 1)
        label = "S"
    else:
        m = _load_model(args)
        S = build_bv_action(m)
        label = f"Yang-Mills {m.algebra.name}, n={m.n}"
    r = check_qme(S, args.order)
    checks = [Check(f"qme.order{h}", f"hbar^{h} part of 1/2[[S,S]] - i hbar Delta S vanishes for {label}",
                    "pass" if ok else "fail", "") for h, ok in r["orders"].items()]
    return checks, f"residual vanishes identically on the extended level: {r['extended_zero']}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bvjet", description="Schouten bracket and BV Laplacian on jet spaces")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, densities=True):
        sp.add_argument("--fields", help=f"field content, e.g. {DEFAULT_FIELDS_TEXT!r}")
        sp.add_argument("--dim", type=int, help="base dimension")
        sp.add_argument("--json", metavar="PATH", help="write a JSON report")
        if densities:
            sp.add_argument("densities", nargs="*", help="densities; 'a | b' is a product of integrals")
            sp.add_argument("--input", metavar="FILE", help="read densities, one per line")

    b = sub.add_parser("bracket", help="[[F, G]]")
    common(b)
    b.add_argument("--mode", choices=("jet", "functional"), default="jet")
    b.add_argument("--expect", metavar="EXPR")
    b.set_defaults(run=cmd_bracket)

    lap = sub.add_parser("laplacian", help="Delta F")
    common(lap)
    lap.add_argument("--mode", choices=("jet", "functional"), default="jet")
    lap.add_argument("--form", choices=("variational", "partial"), default="variational",
                     help="jet mode: variational or pointwise partial derivatives")
    lap.add_argument("--expect", metavar="EXPR")
    lap.set_defaults(run=cmd_laplacian)

    v = sub.add_parser("verify", help="run a verification suite")
    common(v, densities=False)
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--cases", type=int, help="cases per randomized property")
    v.add_argument("--algebra", default="su2")
    v.set_defaults(run=cmd_verify)

    y = sub.add_parser("yangmills", help="Yang-Mills BV action checks")
    y.add_argument("--algebra", default="su2", help="preset (su2, solvable2, abelianN) or a file")
    y.add_argument("--dim", type=int, default=2, help="base dimension")
    y.add_argument("--json", metavar="PATH")
    y.add_argument("--show-action", action="store_true")
    y.set_defaults(run=cmd_yangmills)

    q = sub.add_parser("qme", help="quantum master equation through hbar^K")
    common(q)
    q.add_argument("--order", type=int, default=3)
    q.add_argument("--algebra", default="su2")
    q.set_defaults(run=cmd_qme)
    return p


def _report(command: str, checks: list[Check], elapsed_ms: float) -> dict:
    return {
        "command": command,
        "checks": [{k: c.to_json()[k] for k in ("name", "anchor", "verdict", "detail")} for c in checks],
        "elapsed_ms": round(elapsed_ms, 1),
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    start = time.perf_counter()
    try:
        checks, shown = args.run(args)
    except (ParseError, UsageError, ValueError) as exc:
        print(f"bvjet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = (time.perf_counter() - start) * 1000
    if shown:
        print(shown)
    for c in checks:
        print(f"{c.verdict.upper():8s} {c.name}: {c.anchor}" + (f"  [{c.detail}]" if c.detail else ""))
    if args.json:
        try:
            Path(args.json).write_text(json.dumps(_report(args.command, checks, elapsed), indent=2) + "\n")
        except OSError as exc:
            print(f"bvjet: error: cannot write {args.json}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_FAIL if any(c.verdict == "fail" for c in checks) else EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
