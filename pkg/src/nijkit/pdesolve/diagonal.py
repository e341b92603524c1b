"""Exact solution of ``d(A* dU) = Omega`` for ``A = diag(lambda_1(y_1), ..., lambda_n(y_n))``.

The equation reduces to ``(lambda_j - lambda_i) U_{y_i y_j} = omega_ij`` for ``i < j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import (
    ConsistencyViolation,
    EigenvalueCollision,
    InputError,
    InvalidProblem,
    NonIntegrableMonomial,
)
from nijkit.exterior.forms import KForm, d, i_A, pullback
from nijkit.exterior.operators import OperatorField
from nijkit.symkernel.field import ScalarField, as_field
from nijkit.symkernel.poly import Chart, Poly


def cohomological_operator(A: OperatorField, U: ScalarField) -> KForm:
    """``d(A* dU)``."""
    return d(pullback(A, d(KForm.function(U))))


@dataclass(frozen=True)
class DiagonalProblem:
    lambdas: tuple
    omega: KForm

    def __init__(self, lambdas: Sequence, omega: KForm, *, validate: bool = True):
        chart = omega.chart
        lam = tuple(as_field(v, chart) for v in lambdas)
        if len(lam) != chart.dim:
            raise InputError("need one eigenvalue per coordinate")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "omega", omega)
        if validate:
            self.validate()

    @property
    def chart(self) -> Chart:
        return self.omega.chart

    @property
    def n(self) -> int:
        return self.chart.dim

    @property
    def A(self) -> OperatorField:
        return OperatorField.diag(self.lambdas, self.chart)

    def validate(self) -> None:
        if self.omega.degree != 2:
            raise InputError("Omega must be a 2-form")
        mixed_targets(self)  # a collision is reported before anything else
        for i, lam in enumerate(self.lambdas):
            extra = [k for k in lam.support() if k != i]
            if extra:
                names = ", ".join(self.chart.names[k] for k in extra)
                raise InvalidProblem(f"lambda_{i + 1} = {lam} depends on {names}")
        if not d(self.omega).is_zero():
            raise InvalidProblem("Omega is not closed")
        if not d(i_A(self.A, self.omega)).is_zero():
            raise InvalidProblem("i_A Omega is not closed")


def _monomial_denominator(f: ScalarField) -> tuple[int, ...] | None:
    den = f.den
    if len(den.terms) != 1:
        return None
    return next(iter(den.terms))


def _laurent_terms(f: ScalarField, where: str) -> dict[tuple[int, ...], mpq]:
    shift = _monomial_denominator(f)
    if shift is None:
        raise NonIntegrableMonomial(f"{where}: denominator {f.den} is not a monomial")
    c = f.den.terms[shift]
    return {tuple(a - b for a, b in zip(e, shift)): v / c for e, v in f.num.terms.items()}


def _from_laurent(chart: Chart, terms: dict) -> ScalarField:
    if not terms:
        return ScalarField.zero(chart)
    low = [min(0, min(e[k] for e in terms)) for k in range(chart.dim)]
    num = Poly(chart, {tuple(a - b for a, b in zip(e, low)): c for e, c in terms.items()})
    den = Poly.monomial(chart, tuple(-b for b in low))
    return ScalarField(num, den)


def mixed_targets(p: DiagonalProblem) -> dict[tuple[int, int], ScalarField]:
    """``g_ij = omega_ij / (lambda_j - lambda_i)`` for ``i < j``."""
    g = {}
    for i, j in combinations(range(p.n), 2):
        gap = p.lambdas[j] - p.lambdas[i]
        if gap.is_zero():
            raise EigenvalueCollision(
                f"lambda_{i + 1} and lambda_{j + 1} coincide identically ({p.lambdas[i]})"
            )
        g[(i, j)] = p.omega.component((i, j)) / gap
    return g


def _g(g: dict, i: int, j: int) -> ScalarField:
    return g[(i, j)] if i < j else g[(j, i)]


def consistency_violations(g: dict, n: int) -> list[str]:
    bad = []
    for i, j, k in combinations(range(n), 3):
        a = _g(g, i, j).partial(k)
        b = _g(g, j, k).partial(i)
        c = _g(g, k, i).partial(j)
        if a != b or b != c:
            bad.append(f"d_{k + 1} g_{i + 1}{j + 1} = {a}, d_{i + 1} g_{j + 1}{k + 1} = {b}, d_{j + 1} g_{k + 1}{i + 1} = {c}")
    return bad


def solve_diagonal(p: DiagonalProblem) -> ScalarField:
    """A particular ``U`` with ``d(A* dU) = Omega``, integrated monomial by monomial."""
    chart = p.chart
    g = mixed_targets(p)
    bad = consistency_violations(g, p.n)
    if bad:
        raise ConsistencyViolation("; ".join(bad))
    terms: dict[tuple[int, ...], mpq] = {}
    for (i, j), gij in g.items():
        for e, c in _laurent_terms(gij, f"g_{i + 1}{j + 1}").items():
            if e[i] == -1 or e[j] == -1:
                raise NonIntegrableMonomial(
                    f"g_{i + 1}{j + 1} contains a term {c}*{_mono(chart, e)} whose antiderivative is logarithmic"
                )
            f = list(e)
            f[i] += 1
            f[j] += 1
            f = tuple(f)
            val = c / (f[i] * f[j])
            prev = terms.get(f)
            if prev is not None and prev != val:
                raise ConsistencyViolation(f"monomial {_mono(chart, f)} gets coefficients {prev} and {val}")
            terms[f] = val
    U = _from_laurent(chart, terms)
    for (i, j), gij in g.items():
        if U.partial(i).partial(j) != gij:
            raise ConsistencyViolation(f"U_{i + 1}{j + 1} does not reproduce g_{i + 1}{j + 1}")
    if cohomological_operator(p.A, U) != p.omega:
        raise ConsistencyViolation("d(A* dU) differs from Omega")
    return U


def _mono(chart: Chart, e) -> str:
    return "*".join(f"{n}^{k}" if k != 1 else n for n, k in zip(chart.names, e) if k) or "1"


def add_homogeneous(p: DiagonalProblem, U0: ScalarField, funcs: Sequence) -> ScalarField:
    """``U0 + sum u_i(y_i)``; each ``u_i`` may depend on its own coordinate only."""
    chart = p.chart
    if len(funcs) != p.n:
        raise InputError("need one function per coordinate")
    U = U0
    for i, u in enumerate(funcs):
        u = as_field(u, chart)
        if any(k != i for k in u.support()):
            raise InputError(f"u_{i + 1} = {u} must depend on {chart.names[i]} only")
        U = U + u
    if cohomological_operator(p.A, U) != p.omega:
        raise ConsistencyViolation("adding the homogeneous part broke the equation")
    return U
