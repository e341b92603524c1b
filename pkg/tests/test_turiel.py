import random

import pytest
import sympy as sp
from gmpy2 import mpq

from conftest import sym_coords, to_sympy
from nijkit.errors import InputError
from nijkit.exterior import OperatorField, change_coordinates
from nijkit.nijenhuis import second_companion, torsion
from nijkit.pncompat import build_canonical, canonical_A, canonical_S, check_compatibility
from nijkit.samples import random_operator
from nijkit.symkernel import Chart, ScalarField, parse_scalar
from nijkit.turiel import (
    build_alternative_canonical,
    char_coefficients_from_traces,
    first_to_second_companion,
    newton_girard_sigma,
    power_chart,
    transport_canonical,
    turiel_extend,
)

C2 = Chart(["x1", "x2"])
C3 = Chart(["x1", "x2", "x3"])

# the five displayed polynomials, transcribed by hand
DISPLAYED = {
    1: "y1",
    2: "y2 + 1/2*y1^2",
    3: "y3 + y1*y2 + 1/6*y1^3",
    4: "y4 + 1/24*y1^4 + 1/2*y2*y1^2 + y1*y3 + 1/2*y2^2",
    5: "y5 + 1/120*y1^5 + 1/6*y2*y1^3 + 1/2*y3*y1^2 + 1/2*y1*y2^2 + y1*y4 + y3*y2",
}


@pytest.mark.parametrize("k", range(1, 6))
def test_sigma_matches_display(k):
    chart = power_chart(5)
    assert newton_girard_sigma(k, chart) == parse_scalar(DISPLAYED[k], chart)


def test_sigma_is_exp_generating_function():
    K = 7
    chart = power_chart(K)
    ys = sym_coords(chart)
    t = sp.Symbol("t")
    gen = sp.series(sp.exp(sum(y * t**i for i, y in enumerate(ys, start=1))), t, 0, K + 1).removeO()
    gen = sp.expand(gen)
    for k in range(1, K + 1):
        assert sp.expand(gen.coeff(t, k) - to_sympy(newton_girard_sigma(k, chart))) == 0


def test_char_coefficients_from_traces_vs_sympy():
    rng = random.Random(11)
    t = sp.Symbol("t")
    for n in (2, 3, 4, 5):
        M = [[mpq(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)] for _ in range(n)]
        Ms = sp.Matrix([[sp.Rational(int(v.numerator), int(v.denominator)) for v in row] for row in M])
        cp = Ms.charpoly(t).all_coeffs()
        got = char_coefficients_from_traces(M)
        assert [sp.Rational(int(v.numerator), int(v.denominator)) for v in got] == cp[1:]


def test_lift_S_is_minus_d_of_A_star_theta(rng):
    """For fixed fibre values the S block is the 2-form ``-d(A* theta)``, ``theta = p dx``."""
    for _ in range(4):
        A = random_operator(rng, C3)
        ext = turiel_extend(A)
        xs = sym_coords(C3)
        ps = sp.symbols("p1 p2 p3")
        Am = sp.Matrix([[to_sympy(e) for e in row] for row in A.entries])
        beta = [sum(ps[a] * Am[a, j] for a in range(3)) for j in range(3)]
        for i in range(3):
            for j in range(3):
                dbeta = sp.diff(beta[j], xs[i]) - sp.diff(beta[i], xs[j])
                assert sp.expand(to_sympy(ext.S_block[i][j]) + dbeta) == 0


def test_lift_of_first_companion_gives_canonical_S():
    for n in (2, 3, 4):
        ext = turiel_extend(canonical_A(n, Chart([f"x{i}" for i in range(1, n + 1)])))
        assert [list(r) for r in ext.S_block] == canonical_S(n, ext.chart)
        assert ext.certified


def test_lift_of_second_companion_has_no_S():
    for n in (2, 3, 4):
        ext = turiel_extend(build_alternative_canonical(n).A)
        assert ext.s_is_zero() and ext.certified


def test_lift_of_non_nijenhuis_is_not_certified():
    A = OperatorField([["x2", 0], [0, "x1"]], C2)
    ext = turiel_extend(A)
    assert ext.certified is None
    assert not check_compatibility(ext.pair(), with_torsion=True).ok


def test_lift_is_natural():
    """Lifting after a change of base coordinates equals changing coordinates after lifting."""
    Y = Chart(["y1", "y2"])
    x_of_y = [parse_scalar("y1 + y2^2", Y), parse_scalar("y2", Y)]
    YQ = Chart(["y1", "y2", "q1", "q2"])
    # p = J^T q with J = dy/dx at x(y) = [[1, -2 y2], [0, 1]]
    old_of_new = [
        parse_scalar("y1 + y2^2", YQ),
        parse_scalar("y2", YQ),
        parse_scalar("q1", YQ),
        parse_scalar("-2*y2*q1 + q2", YQ),
    ]
    for A in (canonical_A(2, C2), OperatorField([["x1*x2", "x2"], ["1", "x1^2"]], C2)):
        lifted_then_moved = change_coordinates(turiel_extend(A).L_ext, old_of_new, YQ)
        moved_then_lifted = turiel_extend(change_coordinates(A, x_of_y, Y), fibre="q").L_ext
        assert lifted_then_moved == moved_then_lifted


def test_lift_rejects_name_clash():
    with pytest.raises(InputError):
        turiel_extend(OperatorField.identity(Chart(["p1", "x2"])))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_companion_conversion_exact(n):
    conv = first_to_second_companion(n)
    assert conv.inverse_exact and conv.second_form_exact
    assert conv.A_y == second_companion(conv.sigma, conv.y_chart)
    assert torsion(conv.A_y).is_zero()


def test_conversion_forward_formula():
    conv = first_to_second_companion(2)
    xc = conv.x_chart
    assert conv.forward[0] == parse_scalar("x1", xc)
    assert conv.forward[1] == parse_scalar("x2 - x1^2/2", xc)


@pytest.mark.parametrize("n", [2, 3])
def test_transported_pair_is_alternative_canonical(n):
    moved = transport_canonical(n)
    alt = build_alternative_canonical(n)
    assert moved.L == alt.pair.L and moved.omega == alt.pair.omega
    assert alt.companion_certificate.closed_first and alt.companion_certificate.closed_second


def test_alternative_canonical_trace_relation():
    alt = build_alternative_canonical(3)
    can = build_canonical(3)
    assert alt.pair.L.trace() == ScalarField.var(alt.pair.chart, "y1") * (-2)
    assert can.L.trace() == ScalarField.var(can.chart, "x1") * (-2)
