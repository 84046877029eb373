"""Command-line front end.

Exit codes are a stable contract: 0 for a fully verified document,
1 when any claim is refuted, 2 when evidence is insufficient or a step
budget ran out, 3 for unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import BudgetError, CertificateError, DensikitError, ParseError
from .catalog import (
    ExampleBundle,
    danielewski,
    product_line_bundle,
    sl_bundle,
    sp_bundle,
)
from .certfile import (
    CertificateDocument,
    certificate_to_json,
    parse_certificate,
    render_certificate,
)
from .certificates import (
    BUDGET_EXCEEDED,
    INSUFFICIENT,
    REFUTED,
    VERIFIED,
    CheckLine,
    sufficiency_check,
    verify_tuple,
)
from .derivations import (
    algebraic_flow,
    flow_field_consistency_check,
    flow_group_law_check,
    flow_identity_check,
    flow_preserves_variety,
    numeric_flow_check,
    shear_multiple,
)
from .fibration import (
    build_fibration,
    fiber_reduce,
    fiber_roundtrip_check,
    gv_variety,
    partial_identity_check,
    sl_level_pairs,
    smoothness_check,
)
from .poly import parse_poly, render_poly
from .varieties import sample_point

REPORT_TAG = "densikit-report v1"

_EXIT_BY_VERDICT = {VERIFIED: 0, REFUTED: 1, INSUFFICIENT: 2, BUDGET_EXCEEDED: 2}

_SEVERITY = [VERIFIED, INSUFFICIENT, BUDGET_EXCEEDED, REFUTED]


def _worse(a: str, b: str) -> str:
    return a if _SEVERITY.index(a) >= _SEVERITY.index(b) else b


def verify_document(doc: CertificateDocument, budget: int | None = None):
    """Run every claim in a certificate document.

    Returns (verdict, check lines).  The verdict is the tuple
    certificate's verdict, demoted to REFUTED when an attached
    sufficiency instance fails its mandatory hypotheses.
    """
    report = verify_tuple(doc.certificate, budget=budget)
    checks = list(report.checks)
    verdict = report.verdict
    # A refuted tuple already invalidates the document; its sufficiency
    # hypotheses presuppose legitimate fields and may not even evaluate.
    if doc.sufficiency is not None and verdict != REFUTED:
        suff = doc.sufficiency
        try:
            sreport = sufficiency_check(
                doc.certificate.variety,
                doc.certificate.root_field(),
                suff.companions,
                suff.functions,
                suff.point,
                budget,
            )
        except CertificateError as exc:
            checks.append(CheckLine("sufficiency hypotheses", False, str(exc)))
            verdict = _worse(verdict, REFUTED)
        else:
            for line in sreport.checks:
                checks.append(
                    CheckLine(
                        f"sufficiency {line.name}", line.passed, line.detail
                    )
                )
            if not sreport.passed:
                verdict = _worse(verdict, REFUTED)
    return verdict, checks


def _render_report(name: str, verdict: str, checks) -> str:
    lines = [REPORT_TAG, f"name {name}"]
    lines.extend(c.render() for c in checks)
    lines.append(f"verdict: {verdict}")
    return "\n".join(lines)


def _report_json(name: str, verdict: str, checks) -> dict:
    return {
        "format": REPORT_TAG,
        "name": name,
        "verdict": verdict,
        "checks": [
            {"name": c.name, "passed": c.passed, "detail": c.detail}
            for c in checks
        ],
    }


def _emit_report(args, name: str, verdict: str, checks) -> int:
    if args.json:
        print(json.dumps(_report_json(name, verdict, checks), indent=2))
    else:
        print(_render_report(name, verdict, checks))
    return _EXIT_BY_VERDICT[verdict]


def cmd_verify(args) -> int:
    with open(args.path, encoding="utf-8") as handle:
        text = handle.read()
    doc = parse_certificate(text)
    verdict, checks = verify_document(doc, budget=args.budget)
    return _emit_report(args, doc.name, verdict, checks)


def _parse_fraction_csv(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(v.strip()) for v in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad rational list {text!r}: {exc}")


def _build_bundle(args) -> ExampleBundle:
    name = args.name
    if name == "danielewski":
        if args.p is None:
            raise ValueError("danielewski needs --p")
        point = _parse_fraction_csv(args.point) if args.point else None
        return danielewski(args.p, point=point, seed=args.seed)
    if name == "sl":
        if None in (args.n, args.K, args.i, args.a):
            raise ValueError("sl needs --n, --K, --i, --a")
        a = _parse_fraction_csv(args.a)
        if len(a) != 1:
            raise ValueError("sl takes a single rational --a")
        return sl_bundle(args.n, args.K, args.i, a[0])
    if name == "sp":
        if None in (args.n, args.K, args.a):
            raise ValueError("sp needs --n, --K, --a")
        return sp_bundle(args.n, args.K, _parse_fraction_csv(args.a))
    if name == "product-line":
        if args.p is None:
            raise ValueError("product-line needs --p")
        return product_line_bundle(args.p, seed=args.seed)
    raise ValueError(f"unknown catalog example {name!r}")


def cmd_catalog(args) -> int:
    bundle = _build_bundle(args)
    doc = CertificateDocument(bundle.name, bundle.certificate, bundle.sufficiency)
    rendered = render_certificate(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(rendered)
    elif args.json:
        print(json.dumps(certificate_to_json(doc), indent=2))
    else:
        sys.stdout.write(rendered)
    verdict, checks = verify_document(doc, budget=args.budget)
    if args.output:
        # the certificate went to a file, so the report can use stdout
        return _emit_report(args, doc.name, verdict, checks)
    if verdict != bundle.expected_verdict:
        print(
            f"verification returned {verdict}, expected {bundle.expected_verdict}",
            file=sys.stderr,
        )
    return _EXIT_BY_VERDICT[verdict]


def cmd_gv(args) -> int:
    group = args.group
    if args.sub == "build":
        fib = build_fibration(group, args.n, args.K)
        print("densikit-gv v1")
        print(f"group {group}")
        print(f"n {args.n}")
        print(f"K {args.K}")
        print(f"vars {', '.join(fib.context.names)}")
        for idx, comp in enumerate(fib.components, start=1):
            print(f"component {idx} = {render_poly(comp)}")
        return 0
    if args.sub == "partial-check":
        if group != "sl":
            raise ValueError("the partial-derivative identity applies to sl")
        fib = build_fibration("sl", args.n, args.K)
        all_ok = True
        for level in range(1, args.K + 1):
            for k, l in sl_level_pairs(level, args.n):
                for i in range(1, args.n + 1):
                    ok = partial_identity_check(fib, level, k, l, i)
                    all_ok = all_ok and ok
                    mark = "PASS" if ok else "FAIL"
                    print(f"identity L={level} k={k} l={l} i={i} : {mark}")
        print(f"verdict: {'PASS' if all_ok else 'FAIL'}")
        return 0 if all_ok else 1
    if args.sub == "reduce":
        if args.a is None:
            raise ValueError("reduce needs --a")
        reduction = fiber_reduce(group, args.n, args.K, _parse_fraction_csv(args.a))
        print("densikit-gv v1")
        print(f"group {group}")
        print(f"reduce level {args.K}")
        print(f"pivot {reduction.pivot}")
        for name, expr in reduction.substitutions.items():
            print(f"solve {name} = {render_poly(expr)}")
        for name in reduction.free_names:
            print(f"free {name}")
        for rel in reduction.residual_relations:
            print(f"residual {render_poly(rel)}")
        ok = fiber_roundtrip_check(reduction, budget=args.budget)
        print(f"roundtrip {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    if args.sub == "smooth":
        if args.a is None:
            raise ValueError("smooth needs --a")
        a = _parse_fraction_csv(args.a)
        if group == "sl":
            if args.i is None:
                raise ValueError("sl smoothness needs --i")
            if len(a) != 1:
                raise ValueError("sl takes a single rational --a")
            gv = gv_variety("sl", args.n, args.K, index=args.i, target=a[0])
        else:
            gv = gv_variety("sp", args.n, args.K, target=a)
        verdict = smoothness_check(gv, budget=args.budget)
        print(verdict.render())
        return 0 if verdict.agree is not None else 2
    raise ValueError(f"unknown gv subcommand {args.sub!r}")


def cmd_flow(args) -> int:
    if (args.file is None) == (args.catalog is None):
        raise ValueError("flow needs exactly one of --file or --catalog")
    if args.file is not None:
        with open(args.file, encoding="utf-8") as handle:
            doc = parse_certificate(handle.read())
        cert = doc.certificate
        name = doc.name
    else:
        bundle_args = argparse.Namespace(
            name=args.catalog,
            p=args.p,
            n=args.n,
            K=args.K,
            i=args.i,
            a=args.a,
            point=None,
            seed=args.seed,
        )
        cert = _build_bundle(bundle_args).certificate
        name = args.catalog
    if args.field not in cert.fields:
        raise ValueError(f"{name} has no field named {args.field}")
    field = cert.fields[args.field]
    if args.scale is not None:
        factor = parse_poly(args.scale, cert.variety.context)
        field = shear_multiple(factor, field)
    try:
        flow = algebraic_flow(field, budget=args.budget)
    except CertificateError as exc:
        print(f"no algebraic flow: {exc}", file=sys.stderr)
        return 2
    print("densikit-flow v1")
    print(f"field {args.field}")
    print(f"time {flow.time}")
    for var in cert.variety.context.names:
        print(f"{var} -> {render_poly(flow.image(var))}")
    if args.check:
        lines = [
            ("identity-at-zero", flow_identity_check(flow, args.budget)),
            ("preserves-variety", flow_preserves_variety(flow, args.budget)),
            ("group-law", flow_group_law_check(flow, args.budget)),
            ("field-consistency", flow_field_consistency_check(flow, args.budget)),
        ]
        point = sample_point(cert.variety, seed=args.seed)
        numeric_ok, max_err = numeric_flow_check(flow, point)
        lines.append(("numeric-oracle", numeric_ok))
        all_ok = True
        for label, ok in lines:
            all_ok = all_ok and ok
            detail = f" (max error {max_err:.3e})" if label == "numeric-oracle" else ""
            print(f"check {label} : {'PASS' if ok else 'FAIL'}{detail}")
        return 0 if all_ok else 1
    return 0


def _add_catalog_params(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--p", help="defining polynomial in z for the surface families")
    sub.add_argument("--n", type=int, help="matrix size")
    sub.add_argument("--K", type=int, dest="K", help="number of levels")
    sub.add_argument("--i", type=int, help="component index (sl)")
    sub.add_argument("--a", help="target value(s), comma separated rationals")
    sub.add_argument("--seed", type=int, default=0, help="sampling seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densikit",
        description="Exact certificates for complete vector field tuples.",
    )
    parser.add_argument(
        "--budget",
        type=int,
        default=None,
        help="reduction step budget (default from DENSIKIT_STEP_BUDGET)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="check a certificate file")
    p_verify.add_argument("path")
    p_verify.add_argument("--json", action="store_true")
    p_verify.set_defaults(func=cmd_verify)

    p_catalog = sub.add_parser(
        "catalog", help="build, verify, and emit a bundled example"
    )
    p_catalog.add_argument(
        "name", choices=["danielewski", "sl", "sp", "product-line"]
    )
    _add_catalog_params(p_catalog)
    p_catalog.add_argument("--point", help="base point for the sufficiency instance")
    p_catalog.add_argument("-o", "--output", help="write the certificate here")
    p_catalog.add_argument("--json", action="store_true")
    p_catalog.set_defaults(func=cmd_catalog)

    p_gv = sub.add_parser("gv", help="fibration family tooling")
    p_gv.add_argument("sub", choices=["build", "partial-check", "reduce", "smooth"])
    p_gv.add_argument("--group", choices=["sl", "sp"], required=True)
    p_gv.add_argument("--n", type=int, required=True)
    p_gv.add_argument("--K", type=int, dest="K", required=True)
    p_gv.add_argument("--i", type=int)
    p_gv.add_argument("--a")
    p_gv.add_argument("--seed", type=int, default=0)
    p_gv.set_defaults(func=cmd_gv)

    p_flow = sub.add_parser("flow", help="print the exact flow of a field")
    p_flow.add_argument("--file", help="certificate file to read the field from")
    p_flow.add_argument("--catalog", help="catalog example to read the field from")
    _add_catalog_params(p_flow)
    p_flow.add_argument("--field", required=True)
    p_flow.add_argument("--scale", help="kernel factor for a shear flow")
    p_flow.add_argument("--check", action="store_true")
    p_flow.set_defaults(func=cmd_flow)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CertificateError, DensikitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
