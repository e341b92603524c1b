"""Shared helpers.  sympy serves as an independent oracle: results computed by
nijkit are re-derived from their defining formulas on sympy expressions."""

from __future__ import annotations

import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

import pytest

from nijkit.samples import make_rng

_TRANSFORMS = standard_transformations + (convert_xor,)


def to_sympy(f, symbols=None):
    names = f.chart.names
    local = {n: sp.Symbol(n) for n in names}
    return sp.simplify(parse_expr(str(f), local_dict=local, transformations=_TRANSFORMS))


def sym_matrix(op):
    return sp.Matrix([[to_sympy(e) for e in row] for row in op.entries])


def sym_coords(chart):
    return [sp.Symbol(n) for n in chart.names]


def lie_bracket(X, Y, xs):
    n = len(xs)
    return [sp.expand(sum(X[s] * sp.diff(Y[k], xs[s]) - Y[s] * sp.diff(X[k], xs[s]) for s in range(n))) for k in range(n)]


def torsion_by_brackets(L, xs, i, j):
    """``N(e_i, e_j) = L^2[e_i,e_j] - L[Le_i,e_j] - L[e_i,Le_j] + [Le_i,Le_j]``; the first term vanishes."""
    n = len(xs)
    e = [[sp.Integer(int(a == b)) for a in range(n)] for b in range(n)]
    Li = list(L * sp.Matrix(e[i]))
    Lj = list(L * sp.Matrix(e[j]))
    t2 = L * sp.Matrix(lie_bracket(Li, e[j], xs))
    t3 = L * sp.Matrix(lie_bracket(e[i], Lj, xs))
    t4 = sp.Matrix(lie_bracket(Li, Lj, xs))
    return [sp.simplify(v) for v in (-t2 - t3 + t4)]


def sym_d_A_dU(A, U, xs):
    """Matrix of ``d(A* dU)``: entry ``(i, j)`` is ``d_i(A*dU)_j - d_j(A*dU)_i``."""
    n = len(xs)
    grad = [sp.diff(U, x) for x in xs]
    beta = [sum(grad[i] * A[i, j] for i in range(n)) for j in range(n)]
    return sp.Matrix(n, n, lambda i, j: sp.expand(sp.diff(beta[j], xs[i]) - sp.diff(beta[i], xs[j])))


@pytest.fixture
def rng():
    return make_rng()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
