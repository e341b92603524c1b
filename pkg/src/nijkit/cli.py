"""``nijkit`` command line.

Exit status: 0 when every check passed or a solution was written, 1 when a
mathematical check failed, 2 for unreadable input or bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from nijkit import __version__
from nijkit.errors import InputError, NijkitError
from nijkit.exterior.forms import KForm
from nijkit.exterior.operators import OperatorField
from nijkit.nijenhuis import point_diagnostics, torsion
from nijkit.pdesolve import (
    CauchyData,
    DiagonalProblem,
    cauchy_series_solve,
    check_compatibility_conditions,
    reduce_to_solved_form,
    solve_canonicalization,
    solve_diagonal,
)
from nijkit.pncompat import PNPair, build_canonical, canonical_A, check_compatibility
from nijkit.presets import catalog, get
from nijkit.samples import seed_from_env
from nijkit.symkernel import Chart, to_rational
from nijkit.turiel import (
    build_alternative_canonical,
    first_to_second_companion,
    power_chart,
    transport_canonical,
    turiel_extend,
)

EXIT_OK, EXIT_MATH, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors share the input-error status
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _operator(data) -> OperatorField:
    chart = Chart(data["chart"]) if isinstance(data, dict) and "chart" in data else None
    if chart is None and isinstance(data, dict) and "matrix" in data:
        n = len(data["matrix"])
        chart = Chart([f"x{i}" for i in range(1, n + 1)])
    return OperatorField.from_json(data, chart)


def _form(data, chart: Chart, degree: int = 2) -> KForm:
    if not isinstance(data, dict):
        raise InputError("a form must be a JSON object")
    if "comps" not in data:
        data = {"degree": degree, "comps": data}
    data = {"degree": degree, **data}
    return KForm.from_json(data, chart)


def _point(text: str | None):
    if text is None:
        return None
    try:
        return [to_rational(v.strip()) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad point {text!r}") from exc


# ---------------------------------------------------------------------------
# verbs: each returns (ok, report)


def cmd_torsion(args):
    L = _operator(_load(args.input))
    N = torsion(L)
    report = {"torsion": N.to_json()}
    if not N.is_zero():
        report["violations"] = N.violations()
    return N.is_zero(), report


def _pair_data(data):
    # accept the report written by `canonical --out` as well as a bare pair
    if isinstance(data, dict) and "L" not in data and isinstance(data.get("pair"), dict):
        return data["pair"]
    return data


def cmd_certify_pair(args):
    pair = PNPair.from_json(_pair_data(_load(args.input)))
    rep = check_compatibility(pair, with_torsion=True)
    return rep.ok, {"certificate": rep.to_json()}


def cmd_canonical(args):
    can = build_canonical(args.n, certify=args.certify)
    report = {"pair": can.to_json()}
    if args.certify:
        report["certificate"] = check_compatibility(can.pair, with_torsion=True).to_json()
    if args.alternative:
        report["alternative"] = build_alternative_canonical(args.n, certify=args.certify).to_json()
    return True, report


def cmd_turiel(args):
    if args.input:
        A = _operator(_load(args.input))
    elif args.companion == "second":
        A = build_alternative_canonical(args.n).A
    else:
        A = canonical_A(args.n, Chart([f"x{i}" for i in range(1, args.n + 1)]))
    ext = turiel_extend(A)
    report = {"extension": ext.to_json(), "S_is_zero": ext.s_is_zero(), "A_nijenhuis": ext.certified is not None}
    return ext.certified is not False, report


def cmd_companion_convert(args):
    conv = first_to_second_companion(args.n)
    alt = build_alternative_canonical(args.n)
    moved = transport_canonical(args.n)
    same = moved.L == alt.pair.L and moved.omega == alt.pair.omega
    report = {
        "conversion": conv.to_json(),
        "transported_pair_matches": same,
        "alternative": alt.to_json(),
    }
    return conv.inverse_exact and conv.second_form_exact and same, report


def cmd_solve_diagonal(args):
    data = _load(args.input)
    try:
        lambdas = data["lambdas"]
        chart = Chart(data["chart"]) if "chart" in data else power_chart(len(lambdas))
        omega = _form(data["Omega"], chart)
    except KeyError as exc:
        raise InputError(f"diagonal problem lacks {exc}") from exc
    problem = DiagonalProblem(lambdas, omega)
    U = solve_diagonal(problem)
    return True, {"U": str(U), "U_json": U.to_json()}


def cmd_solve_canonical(args):
    data = _pair_data(_load(args.input))
    order = args.order if args.order is not None else int(data.get("order", 8))
    point = _point(args.point) or data.get("point")
    if "L" in data:
        pair = PNPair.from_json(data)
        if point is None:
            point = [0] * pair.n
        result = solve_canonicalization(pair, point, order, initial=data.get("initial"))
        return True, {"solution": result.to_json()}
    try:
        A = _operator(data["A"])
        omega = _form(data["Omega"], A.chart)
    except KeyError as exc:
        raise InputError(f"problem file lacks {exc}") from exc
    if point is None:
        raise InputError("a point is required")
    system = reduce_to_solved_form(A, omega, point)
    cert = check_compatibility_conditions(system)
    if not cert.ok:
        return False, {"solved_form": system.to_json(), "compatibility": cert.to_json()}
    U = cauchy_series_solve(system, CauchyData.from_mapping(data.get("initial"), A.dim), order)
    return True, {"solved_form": system.to_json(), "compatibility": cert.to_json(), "series": U.to_json()}


def cmd_diagnostics(args):
    L = _operator(_load(args.input))
    points = [_point(p) for p in args.point] or [[0] * L.dim]
    reports = [point_diagnostics(L, p).to_json() for p in points]
    keys = ("gl_regular", "invariant_factors", "segre")
    types = {json.dumps({k: r[k] for k in keys}, sort_keys=True) for r in reports}
    return True, {"points": reports, "same_algebraic_type": len(types) == 1}


def cmd_presets(args):
    if args.list or not args.run:
        return True, {"presets": [{"name": p.name, "description": p.description} for p in catalog()]}
    names = [p.name for p in catalog()] if args.run == "all" else [args.run]
    out = {}
    ok = True
    for name in names:
        try:
            preset = get(name)
        except KeyError:
            raise InputError(f"unknown preset {name!r}") from None
        result = preset.run(args.seed)
        ok &= bool(result.get("ok"))
        out[name] = result
    return ok, {"seed": args.seed, "results": out}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nijkit", description="Exact computations with Nijenhuis operators and compatible pairs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--json", action="store_true", help="print JSON instead of a summary")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized runs (default: $NIJKIT_SEED or fixed)")
        return p

    p = add("torsion", cmd_torsion, "Nijenhuis torsion of an operator")
    p.add_argument("--in", dest="input", required=True)
    p = add("certify-pair", cmd_certify_pair, "check a symplectic form / operator pair")
    p.add_argument("--in", dest="input", required=True)
    p = add("canonical", cmd_canonical, "emit the canonical pair")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--certify", action="store_true")
    p.add_argument("--alternative", action="store_true", help="also emit the second-companion version")
    p = add("turiel", cmd_turiel, "cotangent lift of an operator")
    p.add_argument("--in", dest="input")
    p.add_argument("--companion", choices=("first", "second"), default="first")
    p.add_argument("--n", type=int, default=2)
    p = add("companion-convert", cmd_companion_convert, "first to second companion form")
    p.add_argument("--n", type=int, required=True)
    p = add("solve-diagonal", cmd_solve_diagonal, "exact solve for a diagonal operator")
    p.add_argument("--in", dest="input", required=True)
    p = add("solve-canonical", cmd_solve_canonical, "power-series solve (problem file or pair file)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--point")
    p.add_argument("--order", type=int)
    p = add("diagnostics", cmd_diagnostics, "pointwise algebraic type")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--point", action="append", default=[], help="comma-separated rationals; repeatable")
    p = add("presets", cmd_presets, "list or run the named examples")
    p.add_argument("--list", action="store_true")
    p.add_argument("--run", help="preset name or 'all'")
    return parser


def _summary(verb: str, ok: bool, report: dict) -> str:
    lines = [f"{verb}: {'ok' if ok else 'FAILED'}"]
    for key in ("violations",):
        for v in report.get(key, []):
            lines.append(f"  {v}")
    cert = report.get("certificate")
    if isinstance(cert, dict):
        for key in ("skew_violations", "closedness_violations"):
            lines.extend(f"  {v}" for v in cert.get(key, []))
    if verb == "presets" and "results" in report:
        for name, res in report["results"].items():
            lines.append(f"  {name}: {'ok' if res.get('ok') else 'FAILED'}")
    if verb == "presets" and "presets" in report:
        lines.extend(f"  {p['name']}: {p['description']}" for p in report["presets"])
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed = seed_from_env(args.seed)
    try:
        ok, report = args.func(args)
    except InputError as exc:
        print(f"nijkit {args.verb}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NijkitError as exc:
        ok, report = False, {"error": type(exc).__name__, "message": str(exc)}
    except (KeyError, TypeError, ValueError) as exc:
        print(f"nijkit {args.verb}: malformed input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {"verb": args.verb, "ok": ok, **report}
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    if args.json:
        print(text)
    else:
        print(_summary(args.verb, ok, report))
        if "error" in report:
            print(f"  {report['error']}: {report['message']}")
    return EXIT_OK if ok else EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
