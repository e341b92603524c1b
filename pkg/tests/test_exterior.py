import pytest

from nijkit.errors import DegreeOverflow, InputError
from nijkit.exterior import KForm, OperatorField, d, d_A, i_A, pullback, wedge
from nijkit.nijenhuis import second_companion, torsion
from nijkit.pncompat import build_canonical, canonical_A
from nijkit.samples import random_field, random_one_form, random_operator, random_two_form
from nijkit.symkernel import Chart, ScalarField, parse_scalar

C2 = Chart(["x1", "x2"])
C3 = Chart(["x1", "x2", "x3"])


def dx(chart, name):
    return KForm.coordinate_differential(chart, name)


def test_wedge_antisymmetry():
    a, b = dx(C2, "x1"), dx(C2, "x2")
    assert wedge(a, a).is_zero()
    assert wedge(a, b) == -wedge(b, a)
    p2 = parse_scalar("x2", C2)
    assert wedge(a.scale(p2), b).component((0, 1)) == p2


def test_wedge_degree_cap():
    one = dx(C3, "x1")
    three = wedge(wedge(one, dx(C3, "x2")), dx(C3, "x3"))
    assert three.degree == 3
    with pytest.raises(DegreeOverflow):
        wedge(three, one)


def test_d_of_product():
    f = parse_scalar("x1*x2", C2)
    assert d(KForm.function(f)) == KForm.one_form([parse_scalar("x2", C2), parse_scalar("x1", C2)], C2)


def test_d_squared_vanishes(rng):
    for chart in (C2, C3):
        for _ in range(10):
            f = KForm.function(random_field(rng, chart, 3))
            assert d(d(f)).is_zero()
            assert d(d(random_one_form(rng, chart))).is_zero()


def test_canonical_omega_tilde_closed_n2():
    can = build_canonical(2)
    assert d(KForm.from_matrix(can.pair.omega_tilde_matrix(), can.chart)).is_zero()


def test_pullback_on_second_companion_shifts_dy():
    Y = Chart(["y1", "y2", "y3"])
    A = second_companion([parse_scalar(s, Y) for s in ("y1", "y2", "y3*y1")], Y)
    assert pullback(A, dx(Y, "y1")) == dx(Y, "y2")
    assert pullback(A, dx(Y, "y2")) == dx(Y, "y3")


def test_pullback_reads_a_row():
    A = canonical_A(2, C2)
    expected = KForm.one_form([parse_scalar("-x1", C2), ScalarField.one(C2)], C2)
    assert pullback(A, dx(C2, "x1")) == expected
    alpha = KForm.one_form([parse_scalar("x2^2", C2), parse_scalar("3", C2)], C2)
    assert pullback(OperatorField.identity(C2), alpha) == alpha


def test_pullback_rejects_two_forms():
    with pytest.raises(InputError):
        pullback(canonical_A(2, C2), wedge(dx(C2, "x1"), dx(C2, "x2")))


def test_i_A_on_two_form_matches_direct_formula(rng):
    A = random_operator(rng, C3)
    om = random_two_form(rng, C3)
    W = om.matrix()
    got = i_A(A, om)
    for i in range(3):
        for j in range(i + 1, 3):
            direct = sum(
                (A.entries[s][i] * W[s][j] + A.entries[s][j] * W[i][s] for s in range(3)),
                ScalarField.zero(C3),
            )
            assert got.component((i, j)) == direct


def test_i_A_is_function_linear(rng):
    A = random_operator(rng, C2)
    f = random_field(rng, C2, 2)
    a = random_one_form(rng, C2)
    assert i_A(A, a.scale(f)) == i_A(A, a).scale(f)
    assert i_A(A, KForm.function(f)).is_zero()


def test_d_A_rejects_three_forms():
    three = wedge(wedge(dx(C3, "x1"), dx(C3, "x2")), dx(C3, "x3"))
    with pytest.raises(DegreeOverflow):
        d_A(OperatorField.identity(C3), three)


def test_d_A_squared_zero_on_companion_block():
    A = canonical_A(2, C2)
    assert torsion(A).is_zero()
    for name in C2.names:
        f = KForm.function(ScalarField.var(C2, name))
        assert d_A(A, d_A(A, f)).is_zero()


def test_d_A_squared_nonzero_for_non_nijenhuis():
    A = OperatorField([["x2", 0], [0, "x1"]], C2)
    assert not torsion(A).is_zero()
    hits = [not d_A(A, d_A(A, KForm.function(ScalarField.var(C2, n)))).is_zero() for n in C2.names]
    assert any(hits)


def test_d_A_identity_operator_is_d():
    # i_Id multiplies a k-form by k, so d_Id = d on every degree
    C = C3
    Id = OperatorField.identity(C)
    form = KForm.one_form([parse_scalar("x1*x3", C), parse_scalar("x2^2", C), parse_scalar("x1", C)], C)
    assert d_A(Id, form) == d(form)
