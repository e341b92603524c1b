"""Named, reproducible runs of the worked examples.

Each preset returns a JSON-ready report with an ``ok`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from nijkit.errors import EigenvalueCollision, NonIntegrableMonomial
from nijkit.exterior.forms import KForm
from nijkit.nijenhuis import check_second_companion_nijenhuis, char_poly, trace_identity_holds, trace_powers
from nijkit.pdesolve import DiagonalProblem, solve_canonicalization, solve_diagonal
from nijkit.pdesolve.diagonal import consistency_violations, mixed_targets
from nijkit.pncompat import build_canonical, canonical_A, canonical_S, check_compatibility, generating_transform
from nijkit.samples import make_rng, random_second_companion
from nijkit.symkernel import Chart, ScalarField, parse_scalar, poly_square_root
from nijkit.turiel import (
    build_alternative_canonical,
    first_to_second_companion,
    newton_girard_sigma,
    power_chart,
    transport_canonical,
    turiel_extend,
)

# sigma_1..sigma_5 transcribed by hand
SIGMA_TABLE = (
    "y1",
    "y2 + 1/2*y1^2",
    "y3 + y1*y2 + 1/6*y1^3",
    "y4 + 1/24*y1^4 + 1/2*y2*y1^2 + y1*y3 + 1/2*y2^2",
    "y5 + 1/120*y1^5 + 1/6*y2*y1^3 + 1/2*y3*y1^2 + 1/2*y1*y2^2 + y1*y4 + y3*y2",
)


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    run: Callable[[int | None], dict]


def _canonical(n: int):
    def run(seed=None) -> dict:
        can = build_canonical(n)
        report = check_compatibility(can.pair, with_torsion=True)
        root = poly_square_root(char_poly(can.L))
        xs = [ScalarField.var(can.chart, f"x{i}") for i in range(1, n + 1)]
        root_ok = all(root.coeff(n - k) == xs[k - 1] for k in range(1, n + 1))
        return {
            "ok": report.ok and root_ok,
            "pair": can.to_json(),
            "certificate": report.to_json(),
            "char_poly_root": str(root),
            "root_matches_coordinates": root_ok,
        }

    return run


def _turiel_first(seed=None) -> dict:
    rows = {}
    ok = True
    for n in (2, 3, 4):
        xc = Chart([f"x{i}" for i in range(1, n + 1)])
        ext = turiel_extend(canonical_A(n, xc))
        can = build_canonical(n)
        match = [list(r) for r in ext.S_block] == canonical_S(n, can.chart)
        ok &= match and bool(ext.certified)
        rows[str(n)] = {"S": [[str(x) for x in r] for r in ext.S_block], "matches_canonical_S": match}
    return {"ok": ok, "extensions": rows}


def _turiel_second(seed=None) -> dict:
    rows = {}
    ok = True
    for n in (2, 3, 4):
        alt = build_alternative_canonical(n)
        ext = turiel_extend(alt.A)
        ok &= ext.s_is_zero() and bool(ext.certified)
        rows[str(n)] = {"S_is_zero": ext.s_is_zero(), "A": alt.A.to_json()}
    return {"ok": ok, "extensions": rows}


def _sigma_table(seed=None) -> dict:
    chart = power_chart(5)
    rows = []
    ok = True
    for k, text in enumerate(SIGMA_TABLE, start=1):
        computed = newton_girard_sigma(k, chart)
        displayed = parse_scalar(text, chart)
        same = computed == displayed
        ok &= same
        rows.append({"k": k, "computed": str(computed), "displayed": str(displayed), "equal": same})
    return {"ok": ok, "sigma": rows}


def _diagonal(seed=None) -> dict:
    out = {}
    ok = True
    c2 = Chart(["y1", "y2"])
    p2 = DiagonalProblem(["y1", "y2"], KForm(2, c2, {(0, 1): "y2 - y1"}))
    U2 = solve_diagonal(p2)
    ok &= U2 == parse_scalar("y1*y2", c2)
    out["n2"] = {"U": str(U2), "g": {"12": str(mixed_targets(p2)[(0, 1)])}}
    c3 = Chart(["y1", "y2", "y3"])
    omega3 = KForm(2, c3, {(0, 1): "(y2 - y1)*y3", (0, 2): "(y3 - y1)*y2", (1, 2): "(y3 - y2)*y1"})
    p3 = DiagonalProblem(["y1", "y2", "y3"], omega3)
    g3 = mixed_targets(p3)
    bad = consistency_violations(g3, 3)
    U3 = solve_diagonal(p3)
    ok &= not bad and U3 == parse_scalar("y1*y2*y3", c3)
    out["n3"] = {
        "g": {f"{i + 1}{j + 1}": str(v) for (i, j), v in sorted(g3.items())},
        "consistency": "d_k g_ij = d_i g_jk = d_j g_ki holds" if not bad else bad,
        "U": str(U3),
    }
    return {"ok": ok, **out}


def _collision_counterexample(seed=None) -> dict:
    c = Chart(["y1", "y2"])
    report = {}
    try:
        DiagonalProblem(["y1", "y1"], KForm(2, c, {(0, 1): 1}))
        collision = None
    except EigenvalueCollision as exc:
        collision = str(exc)
    report["identical_eigenvalues"] = {"error": "EigenvalueCollision", "message": collision}
    try:
        solve_diagonal(DiagonalProblem(["y1", "y2"], KForm(2, c, {(0, 1): 1})))
        near = None
    except NonIntegrableMonomial as exc:
        near = str(exc)
    report["colliding_on_diagonal"] = {
        "operator": "diag(y1, y2), Omega = dy1^dy2",
        "U_y1y2": str(mixed_targets(DiagonalProblem(["y1", "y2"], KForm(2, c, {(0, 1): 1})))[(0, 1)]),
        "note": "the mixed derivative blows up where y1 = y2",
        "solver": near,
    }
    return {"ok": collision is not None, **report}


def _roundtrip(seed=None) -> dict:
    can = build_canonical(2)
    U_star = parse_scalar("x1^2*x2", can.chart)
    pair = generating_transform(U_star, can.pair)
    base = Chart(can.chart.names[:2])
    matched = solve_canonicalization(pair, [0, 0], 8, initial=-U_star.rename_into(base))
    zero = solve_canonicalization(pair, [0, 0], 8)
    ok = matched.residual_lowest_degree() is None and zero.residual_vanishes_through(6)
    return {
        "ok": ok,
        "U_star": str(U_star),
        "T": {label: str(v) for label, v in matched.T.nonzero_components()},
        "matched_data": {"U": str(matched.generating_function), "residual_lowest_degree": matched.residual_lowest_degree()},
        "zero_data": {"U": str(zero.generating_function), "residual_lowest_degree": zero.residual_lowest_degree()},
    }


def _second_companion_closedness(seed=None) -> dict:
    rows = []
    ok = True
    for n in (2, 3, 4):
        alt = build_alternative_canonical(n)
        cert = alt.companion_certificate
        ok &= cert.nijenhuis and cert.agrees_with_torsion
        rows.append({"n": n, "sig1": cert.closed_first, "sig2": cert.closed_second, "torsion_zero": cert.torsion_zero})
    rng = make_rng(seed)
    agree = 0
    counts = {"nijenhuis": 0, "not_nijenhuis": 0}
    for trial in range(20):
        n = 2 + trial % 2
        chart = power_chart(n)
        sigma, _ = random_second_companion(rng, chart)
        cert = check_second_companion_nijenhuis(sigma, chart)
        agree += cert.agrees_with_torsion
        counts["nijenhuis" if cert.torsion_zero else "not_nijenhuis"] += 1
    ok &= agree == 20
    return {"ok": ok, "alternative_canonical": rows, "random_trials": 20, "agreements": agree, "split": counts}


def _trace_identity(seed=None) -> dict:
    n = 4
    xc = Chart([f"x{i}" for i in range(1, n + 1)])
    A = canonical_A(n, xc)
    results = {str(k): trace_identity_holds(A, k) for k in range(2, n + 1)}
    can = build_canonical(n)
    tl = trace_powers(can.L, n)
    ta = trace_powers(can.A, n)
    doubled = all(a == b * 2 for a, b in zip(tl, ta))
    return {"ok": all(results.values()) and doubled, "identity_by_k": results, "trace_L_is_twice_trace_A": doubled}


def _companion_convert(seed=None) -> dict:
    rows = []
    ok = True
    for n in (1, 2, 3, 4):
        conv = first_to_second_companion(n)
        alt = build_alternative_canonical(n)
        moved = transport_canonical(n)
        same = moved.L == alt.pair.L and moved.omega == alt.pair.omega
        ok &= conv.inverse_exact and conv.second_form_exact and same
        rows.append({"n": n, **conv.to_json(), "transported_pair_matches": same})
    return {"ok": ok, "conversions": rows}


def catalog() -> list[Preset]:
    items = [
        Preset(f"canonical-n{n}", f"canonical pair for n={n}: torsion, skewness, closedness, square root of chi", _canonical(n))
        for n in (1, 2, 3, 4)
    ]
    items += [
        Preset("turiel-first-companion", "cotangent lift of the first companion block reproduces the canonical S", _turiel_first),
        Preset("turiel-second-companion", "cotangent lift of the second companion form has S = 0", _turiel_second),
        Preset("sigma-table", "sigma_1..sigma_5 against hand-transcribed values", _sigma_table),
        Preset("diagonal-solve", "diagonal equation with the three-way consistency check", _diagonal),
        Preset("collision-counterexample", "colliding eigenvalues are refused", _collision_counterexample),
        Preset("generating-roundtrip", "transform the canonical pair by x1^2*x2 and solve back", _roundtrip),
        Preset("second-companion-closedness", "second companion form: closedness conditions versus torsion", _second_companion_closedness),
        Preset("trace-identity", "(1/k) d tr A^k = (1/(k-1)) A* d tr A^(k-1), k = 2..4", _trace_identity),
        Preset("companion-convert", "first to second companion form and the transported pair", _companion_convert),
    ]
    return items


def get(name: str) -> Preset:
    for p in catalog():
        if p.name == name:
            return p
    raise KeyError(name)
