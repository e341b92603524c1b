from math import factorial

import pytest
import sympy as sp
from gmpy2 import mpq

from conftest import sym_coords, sym_d_A_dU, to_sympy
from nijkit.errors import (
    EigenvalueCollision,
    IncompatibleSystem,
    InvalidProblem,
    NonIntegrableMonomial,
    NotCompanionAtPoint,
    PipelineError,
)
from nijkit.exterior import KForm, OperatorField
from nijkit.pdesolve import (
    CauchyData,
    DiagonalProblem,
    JetSystem,
    add_homogeneous,
    cauchy_series_solve,
    check_compatibility_conditions,
    cohomological_operator,
    linear_companion_frame,
    reduce_to_solved_form,
    solve_canonicalization,
    solve_diagonal,
    solve_jet_system,
)
from nijkit.pdesolve.diagonal import mixed_targets
from nijkit.pncompat import PNPair, block_lower_triangular, build_canonical, canonical_A, canonical_S, generating_transform
from nijkit.samples import random_admissible_omega
from nijkit.symkernel import Chart, ScalarField, parse_scalar, series_from_scalar

Y2 = Chart(["y1", "y2"])
Y3 = Chart(["y1", "y2", "y3"])


def test_diagonal_two():
    p = DiagonalProblem(["y1", "y2"], KForm(2, Y2, {(0, 1): "y2 - y1"}))
    assert mixed_targets(p)[(0, 1)] == ScalarField.one(Y2)
    assert solve_diagonal(p) == parse_scalar("y1*y2", Y2)


def test_diagonal_three_targets():
    om = KForm(2, Y3, {(0, 1): "(y2 - y1)*y3", (0, 2): "(y3 - y1)*y2", (1, 2): "(y3 - y2)*y1"})
    g = mixed_targets(DiagonalProblem(["y1", "y2", "y3"], om))
    assert g == {(0, 1): parse_scalar("y3", Y3), (0, 2): parse_scalar("y2", Y3), (1, 2): parse_scalar("y1", Y3)}


def test_diagonal_random_against_sympy(rng):
    for chart, lams in ((Y2, ["y1", "y2"]), (Y3, ["y1", "y2^2", "y3 + 1"])):
        A = OperatorField.diag(lams, chart)
        xs = sym_coords(chart)
        As = sp.diag(*[to_sympy(parse_scalar(s, chart)) for s in lams])
        for _ in range(5):
            V, om = random_admissible_omega(rng, A)
            U = solve_diagonal(DiagonalProblem(lams, om))
            W = sym_d_A_dU(As, to_sympy(U), xs)
            for (i, j), v in om.comps.items():
                assert sp.expand(W[i, j] - to_sympy(v)) == 0
            # U differs from V by functions of one variable each
            diff = to_sympy(U - V)
            for i in range(len(xs)):
                for j in range(i + 1, len(xs)):
                    assert sp.diff(diff, xs[i], xs[j]) == 0


def test_diagonal_collision():
    with pytest.raises(EigenvalueCollision):
        DiagonalProblem(["y1", "y1"], KForm(2, Y2, {(0, 1): 1}))


def test_diagonal_near_collision_is_not_polynomial():
    with pytest.raises(NonIntegrableMonomial):
        solve_diagonal(DiagonalProblem(["y1", "y2"], KForm(2, Y2, {(0, 1): 1})))


def test_diagonal_logarithmic_term():
    with pytest.raises(NonIntegrableMonomial):
        solve_diagonal(DiagonalProblem(["y1", "y2"], KForm(2, Y2, {(0, 1): "(y2 - y1)/y1"})))


def test_diagonal_laurent_ok():
    U = solve_diagonal(DiagonalProblem(["y1", "y2"], KForm(2, Y2, {(0, 1): "(y2 - y1)/y1^2"})))
    assert U == parse_scalar("-y2/y1", Y2)


def test_diagonal_rejects_inadmissible(rng):
    with pytest.raises(InvalidProblem):
        DiagonalProblem(["y1", "y2 + y1", "y3"], KForm.zero(2, Y3))
    bad = KForm(2, Y3, {(0, 1): "y3", (0, 2): "0", (1, 2): "0"})
    with pytest.raises(InvalidProblem):
        DiagonalProblem(["y1", "y2", "y3"], bad)


def test_homogeneous_part():
    p = DiagonalProblem(["y1", "y2"], KForm(2, Y2, {(0, 1): "y2 - y1"}))
    U = add_homogeneous(p, solve_diagonal(p), ["y1^3", "2*y2 - 1"])
    assert cohomological_operator(p.A, U) == p.omega


# --------------------------------------------------------------------------- solved form


def test_reduction_constant_companion():
    X = Chart(["x1", "x2", "x3"])
    A = OperatorField([[2, 1, 0], [-1, 0, 1], [3, 0, 0]], X)
    om = KForm(2, X, {(0, 1): 1, (0, 2): 0, (1, 2): 2})
    sf = reduce_to_solved_form(A, om, [0, 0, 0])
    for v in sf.h.values():
        assert not v.depends_on("x1") and not v.depends_on("x2") and not v.depends_on("x3")


def test_reduction_zero_rhs_is_homogeneous():
    X = Chart(["x1", "x2", "x3"])
    sf = reduce_to_solved_form(canonical_A(3, X), KForm.zero(2, X), [0, 0, 0])
    for v in sf.h.values():
        # every term is linear in the jet variables
        assert all(sum(e[3:]) == 1 for e in v.num.terms)


def test_reduction_requires_companion_point():
    with pytest.raises(NotCompanionAtPoint):
        reduce_to_solved_form(OperatorField.diag(["y1", "y2"], Y2), KForm.zero(2, Y2), [1, 2])


def test_solved_form_is_equivalent_to_equation(rng):
    """Substituting an exact solution's jets into every h_ab reproduces U_ab."""
    X = Chart(["x1", "x2", "x3"])
    A = canonical_A(3, X)
    V, om = random_admissible_omega(rng, A)
    sf = reduce_to_solved_form(A, om, [0, 0, 0])
    jc = sf.chart
    images = [ScalarField.var(X, n) for n in X.names]
    images += [V.partial(s) for s in range(3)]
    images += [V.partial(s).partial(2) for s in range(3)]
    images += [V.partial(s).partial(2).partial(2) for s in range(3)]
    for (a, b), h in sf.h.items():
        assert h.compose(images, X) == V.partial(a).partial(b)
    assert jc.dim == 12


@pytest.mark.parametrize("n", [2, 3])
def test_compatibility_true_for_admissible(n, rng):
    X = Chart([f"x{i}" for i in range(1, n + 1)])
    A = canonical_A(n, X)
    _, om = random_admissible_omega(rng, A)
    cert = check_compatibility_conditions(reduce_to_solved_form(A, om, [0] * n))
    assert cert.ok and not cert.violations
    assert cert.checked == (0 if n == 2 else 3)


def test_perturbation_flips_verdict(rng):
    X = Chart(["x1", "x2", "x3"])
    A = canonical_A(3, X)
    _, om = random_admissible_omega(rng, A)
    sf = reduce_to_solved_form(A, om, [0, 0, 0])
    cert = check_compatibility_conditions(sf.perturbed(0, 1, "x1"))
    assert not cert.ok
    assert cert.violations[0]["pair"] == ["x1", "x2"]


def test_z_coefficients_reported_separately():
    X = Chart(["x1", "x2", "x3"])
    A = canonical_A(3, X)
    sf = reduce_to_solved_form(A, KForm.zero(2, X), [0, 0, 0])
    cert = check_compatibility_conditions(sf.perturbed(0, 0, "x1*w1"))
    assert any(v["z_monomial"] != "1" for v in cert.violations)


def test_toy_system_three_variables():
    # f_x = f_z, f_y = f
    X = Chart(["x", "y", "z"])
    sys_ = JetSystem.from_expressions(X, 1, [["w1"], ["u1"]], [0, 0, 0])
    assert check_compatibility_conditions(sys_).ok
    bad = JetSystem.from_expressions(X, 1, [["w1"], ["x*u1"]], [0, 0, 0])
    cert = check_compatibility_conditions(bad)
    assert not cert.ok and cert.violations[0]["coefficient"] == "u1"
    with pytest.raises(IncompatibleSystem):
        solve_jet_system(bad, [[1]], 4)


def test_toy_system_series_is_exponential():
    # with data e^z on the line, the solution is e^(x + y + z)
    X = Chart(["x", "y", "z"])
    sys_ = JetSystem.from_expressions(X, 1, [["w1"], ["u1"]], [0, 0, 0])
    N = 6
    (f,) = solve_jet_system(sys_, [[mpq(1, factorial(k)) for k in range(N + 1)]], N)
    for a in range(N + 1):
        for b in range(N + 1 - a):
            for c in range(N + 1 - a - b):
                assert f.coefficient((a, b, c)) == mpq(1, factorial(a) * factorial(b) * factorial(c))


def test_trivial_cauchy_problem():
    X = Chart(["x", "y", "z"])
    sys_ = JetSystem.from_expressions(X, 1, [[0], [0]], [0, 0, 0])
    (f,) = solve_jet_system(sys_, [["1", "1", "1/2"]], 5)
    assert f.to_scalar() == parse_scalar("1 + z + z^2/2", X)


def test_diagonal_via_series_agrees_with_exact():
    A = OperatorField.diag(["y1", "y2"], Y2)
    om = KForm(2, Y2, {(0, 1): "y2 - y1"})
    U0 = solve_diagonal(DiagonalProblem(["y1", "y2"], om))
    A2, om2, pt2, K = linear_companion_frame(A, om, [1, 2])
    x_of = [sum((ScalarField.var(Y2, Y2.names[j]) * K[i][j] for j in range(2)), ScalarField.zero(Y2)) for i in range(2)]
    U0_new = U0.compose(x_of, Y2)
    N = 6
    sf = reduce_to_solved_form(A2, om2, pt2)
    U = cauchy_series_solve(sf, CauchyData.from_function(U0_new, pt2, N), N)
    assert (U - series_from_scalar(U0_new, pt2, N)).vanishes_through(N)


def test_variable_order_does_not_matter(rng):
    X = Chart(["x1", "x2", "x3"])
    A = canonical_A(3, X)
    V, om = random_admissible_omega(rng, A)
    sf = reduce_to_solved_form(A, om, [0, 0, 0])
    data = {"v": ["1", "2", "-1"], "v1": ["0", "3"], "v2": ["1/2"]}
    a = cauchy_series_solve(sf, data, 7, variable_order=[1, 0])
    b = cauchy_series_solve(sf, data, 7, variable_order=[0, 1])
    assert a == b
    assert a == cauchy_series_solve(sf, data, 7, variable_order=[1, 0])


def test_exact_recovery_with_matched_data(rng):
    X = Chart(["x1", "x2", "x3"])
    A = canonical_A(3, X)
    V, om = random_admissible_omega(rng, A)
    sf = reduce_to_solved_form(A, om, [0, 0, 0])
    U = cauchy_series_solve(sf, CauchyData.from_function(V, [0, 0, 0], 8), 8)
    assert U.to_scalar() == V


# --------------------------------------------------------------------------- pipeline


def test_pipeline_on_canonical_pair():
    res = solve_canonicalization(build_canonical(2).pair, [0, 0], 6)
    assert res.U.is_zero() and res.residual_lowest_degree() is None


def test_pipeline_round_trip_matched():
    can = build_canonical(2)
    U_star = parse_scalar("x1^2*x2", can.chart)
    pair = generating_transform(U_star, can.pair)
    base = Chart(["x1", "x2"])
    res = solve_canonicalization(pair, [0, 0], 8, initial=-U_star.rename_into(base))
    assert res.generating_function == -U_star.rename_into(base)
    assert res.residual_lowest_degree() is None


def test_pipeline_zero_data_residual_is_high_order():
    can = build_canonical(3)
    pair = generating_transform(parse_scalar("x1*x2*x3 + x3^3", can.chart), can.pair)
    res = solve_canonicalization(pair, [0, 0, 0], 8)
    assert res.residual_vanishes_through(6)


def test_pipeline_refuses_unclosed_T(rng):
    can = build_canonical(3)
    base = Chart(["x1", "x2", "x3"])
    T = KForm(2, base, {(0, 1): "x3"})
    S = canonical_S(3, can.chart)
    Tm = [[t.rename_into(can.chart) for t in row] for row in T.matrix()]
    L = block_lower_triangular(can.A, [[S[i][j] + Tm[i][j] for j in range(3)] for i in range(3)], can.chart)
    with pytest.raises(PipelineError) as info:
        solve_canonicalization(PNPair(can.omega, L), [0, 0, 0], 4)
    assert info.value.stage == "closedness"


def test_pipeline_stage_on_shape():
    can = build_canonical(2)
    rows = [list(r) for r in can.L.entries]
    rows[0][3] = ScalarField.one(can.chart)
    with pytest.raises(PipelineError) as info:
        solve_canonicalization(PNPair(can.omega, OperatorField(rows, can.chart)), [0, 0], 4)
    assert info.value.stage == "jacobi-rows"
