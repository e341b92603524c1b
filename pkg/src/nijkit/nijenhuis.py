"""Nijenhuis torsion, companion forms, characteristic polynomials and pointwise diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import InputError
from nijkit.exterior.forms import KForm, d, i_A, pullback
from nijkit.exterior.operators import OperatorField
from nijkit.symkernel import linalg
from nijkit.symkernel.field import ScalarField, as_field
from nijkit.symkernel.poly import Chart, require_point
from nijkit.symkernel.upoly import UPoly


# ---------------------------------------------------------------------------
# torsion


@dataclass(frozen=True)
class TorsionTensor:
    """Components ``N^k_{ij}`` for ``i < j``; absent keys are zero."""

    chart: Chart
    dim: int
    comps: dict

    def component(self, k: int, i: int, j: int) -> ScalarField:
        if i == j:
            return ScalarField.zero(self.chart)
        if i > j:
            return -self.component(k, j, i)
        return self.comps.get((k, i, j), ScalarField.zero(self.chart))

    def is_zero(self) -> bool:
        return not self.comps

    def vector(self, i: int, j: int) -> list[ScalarField]:
        """``N(e_i, e_j)`` as a vector field."""
        return [self.component(k, i, j) for k in range(self.dim)]

    def evaluate(self, xi: Sequence[ScalarField], eta: Sequence[ScalarField]) -> list[ScalarField]:
        out = [ScalarField.zero(self.chart) for _ in range(self.dim)]
        for (k, i, j), v in self.comps.items():
            coeff = xi[i] * eta[j] - xi[j] * eta[i]
            if not coeff.is_zero():
                out[k] = out[k] + v * coeff
        return out

    def contract(self, alpha: KForm) -> KForm:
        """The 2-form ``(xi, eta) -> alpha(N(xi, eta))``."""
        coeffs = alpha.coefficients()
        comps = {}
        for (k, i, j), v in self.comps.items():
            if not coeffs[k].is_zero():
                comps[(i, j)] = comps.get((i, j), ScalarField.zero(self.chart)) + coeffs[k] * v
        return KForm(2, self.chart, comps)

    def violations(self) -> list[str]:
        names = self.chart.names
        return [
            f"N^{names[k]}_({names[i]},{names[j]}) = {v}" for (k, i, j), v in sorted(self.comps.items())
        ]

    def to_json(self) -> dict:
        names = self.chart.names
        return {
            "zero": self.is_zero(),
            "nonzero": [
                {"upper": names[k], "lower": [names[i], names[j]], "value": str(v)}
                for (k, i, j), v in sorted(self.comps.items())
            ],
        }


def torsion(L: OperatorField) -> TorsionTensor:
    """Coordinate formula for ``N_L(e_i, e_j)^k``.

    ``sum_s L^s_i d_s L^k_j - L^s_j d_s L^k_i - L^k_s d_i L^s_j + L^k_s d_j L^s_i``.
    """
    n = L.dim
    if L.chart.dim != n:
        raise InputError("torsion needs an operator on the tangent bundle of its chart")
    E = L.entries
    # dE[s][k][j] = d_s L^k_j
    dE = [[[E[k][j].partial(s) for j in range(n)] for k in range(n)] for s in range(n)]
    zero = ScalarField.zero(L.chart)
    comps = {}
    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                acc = zero
                for s in range(n):
                    for a, b in (
                        (E[s][i], dE[s][k][j]),
                        (E[k][s], dE[j][s][i]),
                    ):
                        if not a.is_zero() and not b.is_zero():
                            acc = acc + a * b
                    for a, b in (
                        (E[s][j], dE[s][k][i]),
                        (E[k][s], dE[i][s][j]),
                    ):
                        if not a.is_zero() and not b.is_zero():
                            acc = acc - a * b
                if not acc.is_zero():
                    comps[(k, i, j)] = acc
    return TorsionTensor(L.chart, n, comps)


def torsion_via_forms(L: OperatorField, alpha: KForm) -> KForm:
    """``alpha(N_L(., .))`` from forms alone, no brackets of vector fields.

    Computed as ``d(L* a)(L., .) + d(L* a)(., L.) - d(L*^2 a) - da(L., L.)``.
    """
    if alpha.degree != 1:
        raise InputError("torsion_via_forms takes a 1-form")
    a1 = pullback(L, alpha)
    a2 = pullback(L, a1)
    m = d(alpha).matrix()
    lt = linalg.transpose(L.entries)
    squeezed = linalg.mat_mul(linalg.mat_mul(lt, m), L.entries)
    return i_A(L, d(a1)) - d(a2) - KForm.from_matrix(squeezed, L.chart)


# ---------------------------------------------------------------------------
# companion forms


def first_companion(sigma: Sequence, chart: Chart) -> OperatorField:
    """``-sigma_i`` down the first column, ones on the superdiagonal."""
    s = [as_field(v, chart) for v in sigma]
    n = len(s)
    zero, one = ScalarField.zero(chart), ScalarField.one(chart)
    rows = []
    for i in range(n):
        row = [zero] * n
        row[0] = -s[i]
        if i + 1 < n:
            row[i + 1] = row[i + 1] + one
        rows.append(row)
    return OperatorField._raw(rows, chart)


def second_companion(sigma: Sequence, chart: Chart) -> OperatorField:
    """Shifted identity with last row ``(-sigma_n, ..., -sigma_1)``."""
    s = [as_field(v, chart) for v in sigma]
    n = len(s)
    zero, one = ScalarField.zero(chart), ScalarField.one(chart)
    rows = []
    for i in range(n - 1):
        row = [zero] * n
        row[i + 1] = one
        rows.append(row)
    rows.append([-s[n - 1 - j] for j in range(n)])
    return OperatorField._raw(rows, chart)


@dataclass
class CompanionCertificate:
    nijenhuis: bool
    closed_first: bool
    closed_second: bool
    torsion_zero: bool
    violations: list[str] = field(default_factory=list)

    @property
    def agrees_with_torsion(self) -> bool:
        return self.nijenhuis == self.torsion_zero

    def __bool__(self) -> bool:
        return self.nijenhuis

    def to_json(self) -> dict:
        return {
            "nijenhuis": self.nijenhuis,
            "sig1": self.closed_first,
            "sig2": self.closed_second,
            "torsion_zero": self.torsion_zero,
            "agrees_with_torsion": self.agrees_with_torsion,
            "violations": self.violations,
        }


def check_second_companion_nijenhuis(sigma: Sequence, chart: Chart) -> CompanionCertificate:
    """Closedness of ``A* dy_n`` and ``A*^2 dy_n`` for ``A`` in second companion form."""
    A = second_companion(sigma, chart)
    n = A.dim
    dy_n = KForm.coordinate_differential(chart, chart.names[n - 1])
    first = pullback(A, dy_n)
    second = pullback(A, first)
    c1, c2 = d(first), d(second)
    violations = [f"d(A* dy_n) component {label}: {v}" for label, v in c1.nonzero_components()]
    violations += [f"d(A*^2 dy_n) component {label}: {v}" for label, v in c2.nonzero_components()]
    return CompanionCertificate(
        nijenhuis=c1.is_zero() and c2.is_zero(),
        closed_first=c1.is_zero(),
        closed_second=c2.is_zero(),
        torsion_zero=torsion(A).is_zero(),
        violations=violations,
    )


# ---------------------------------------------------------------------------
# characteristic polynomial and traces


def char_poly(L: OperatorField, var: str = "t") -> UPoly:
    """``det(t Id - L)`` by Faddeev-LeVerrier; only integer divisions occur."""
    n = L.dim
    chart = L.chart
    coeffs = [None] * (n + 1)  # coeffs[k] multiplies t^k
    coeffs[n] = ScalarField.one(chart)
    M = OperatorField.zeros(chart, n)
    ident = OperatorField.identity(chart, n)
    for k in range(1, n + 1):
        M = L @ M + ident.scale(coeffs[n - k + 1])
        coeffs[n - k] = -(L @ M).trace() / k
    return UPoly(coeffs, var)


def determinant(M: Sequence[Sequence]) -> ScalarField:
    """Fraction-free Bareiss determinant."""
    return linalg.bareiss_det([list(r) for r in M])


def trace_powers(L: OperatorField, k_max: int) -> list[ScalarField]:
    out = []
    P = L
    for k in range(1, k_max + 1):
        out.append(P.trace())
        if k < k_max:
            P = P @ L
    return out


def trace_power_differentials(L: OperatorField, k_max: int) -> list[KForm]:
    if k_max > L.dim:
        raise InputError("k_max may not exceed the dimension")
    return [d(KForm.function(t)) for t in trace_powers(L, k_max)]


def differentials_rank(forms: Sequence[KForm], point: Sequence) -> int:
    if not forms:
        return 0
    pt = require_point(forms[0].chart, point)
    rows = [[c.evaluate(pt) for c in f.coefficients()] for f in forms]
    return linalg.rank(rows)


def trace_rank(L: OperatorField, point: Sequence, k_max: int | None = None) -> int:
    k_max = L.dim if k_max is None else k_max
    return differentials_rank(trace_power_differentials(L, k_max), point)


def trace_identity_holds(A: OperatorField, k: int) -> bool:
    """``(1/k) d tr A^k == (1/(k-1)) A* d tr A^(k-1)``, exactly."""
    if k < 2:
        raise InputError("the trace identity needs k >= 2")
    traces = trace_powers(A, k)
    lhs = d(KForm.function(traces[k - 1])).scale(mpq(1, k))
    rhs = pullback(A, d(KForm.function(traces[k - 2]))).scale(mpq(1, k - 1))
    return lhs == rhs


# ---------------------------------------------------------------------------
# pointwise algebra over Q[t]


def _qpoly(coeffs) -> UPoly:
    return UPoly([mpq(c) for c in coeffs])


def smith_invariant_factors(M: Sequence[Sequence]) -> list[UPoly]:
    """Invariant factors of ``t Id - M`` for a rational matrix ``M`` (monic, divisibility chain)."""
    n = len(M)
    a = [[_qpoly([-M[i][j], 1] if i == j else [-M[i][j]]) for j in range(n)] for i in range(n)]
    diag = []
    for k in range(n):
        while True:
            cells = [(a[i][j].degree, i, j) for i in range(k, n) for j in range(k, n) if not a[i][j].is_zero()]
            if not cells:
                break
            _, pi, pj = min(cells)
            a[k], a[pi] = a[pi], a[k]
            for row in a:
                row[k], row[pj] = row[pj], row[k]
            pivot = a[k][k]
            dirty = False
            for i in range(k + 1, n):
                if a[i][k].is_zero():
                    continue
                q, r = a[i][k].divmod(pivot)
                a[i] = [x - q * y for x, y in zip(a[i], a[k])]
                if not r.is_zero():
                    dirty = True
            for j in range(k + 1, n):
                if a[k][j].is_zero():
                    continue
                q, r = a[k][j].divmod(pivot)
                for row in a:
                    row[j] = row[j] - q * row[k]
                if not r.is_zero():
                    dirty = True
            if dirty:
                continue
            bad = next(
                (i for i in range(k + 1, n) for j in range(k + 1, n) if not (a[i][j] % pivot).is_zero()),
                None,
            )
            if bad is None:
                break
            a[k] = [x + y for x, y in zip(a[k], a[bad])]
        diag.append(a[k][k].monic() if not a[k][k].is_zero() else a[k][k])
    return diag


def square_free_decomposition(p: UPoly) -> list[tuple[UPoly, int]]:
    """Yun's algorithm over Q: ``p = prod q_m^m`` with ``q_m`` square-free and coprime."""
    p = p.monic()
    out = []
    if p.degree <= 0:
        return out
    a = p.gcd(p.derivative())
    b = p // a
    c = p.derivative() // a
    dd = c - b.derivative()
    m = 1
    while b.degree > 0:
        g = b.gcd(dd)
        if g.degree > 0:
            out.append((g, m))
        b = b // g
        c = dd // g
        dd = c - b.derivative()
        m += 1
    return out


def _eval_matrix_poly(q: UPoly, M: Sequence[Sequence]) -> list[list]:
    n = len(M)
    result = [[mpq(0)] * n for _ in range(n)]
    ident = [[mpq(1) if i == j else mpq(0) for j in range(n)] for i in range(n)]
    for c in reversed(q.coeffs):
        result = linalg.mat_mul(result, M)
        result = [[x + (c if i == j else 0) for j, x in enumerate(row)] for i, row in enumerate(result)]
    return result if q.coeffs else [[mpq(0)] * n for _ in range(n)]


def segre_rank_sequences(M: Sequence[Sequence], chi: UPoly) -> list[dict]:
    """Ranks of ``q(M)^k`` for each square-free factor ``q`` of ``chi``."""
    out = []
    for q, mult in square_free_decomposition(chi):
        qm = _eval_matrix_poly(q, M)
        ranks = []
        P = qm
        for _ in range(mult):
            ranks.append(linalg.rank(P))
            P = linalg.mat_mul(P, qm)
        out.append({"factor": str(q), "multiplicity": mult, "ranks": ranks})
    return out


@dataclass
class PointDiagnostics:
    point: tuple
    gl_regular: bool
    diff_nondegenerate_half: bool
    char_poly_at_point: UPoly
    invariant_factors: list[UPoly]
    trace_rank: int
    trace_rank_full: int
    segre: list[dict]

    @property
    def kostant_consistent(self) -> bool:
        """Full-rank trace differentials should force gl-regularity."""
        n = self.char_poly_at_point.degree
        return (self.trace_rank_full < n) or self.gl_regular

    def to_json(self) -> dict:
        return {
            "point": [str(v) for v in self.point],
            "gl_regular": self.gl_regular,
            "diff_nondegenerate_half": self.diff_nondegenerate_half,
            "char_poly": str(self.char_poly_at_point),
            "invariant_factors": [str(f) for f in self.invariant_factors],
            "trace_rank": self.trace_rank,
            "trace_rank_full": self.trace_rank_full,
            "kostant_consistent": self.kostant_consistent,
            "segre": self.segre,
        }


def point_diagnostics(L: OperatorField, point: Sequence) -> PointDiagnostics:
    pt = require_point(L.chart, point)
    M = L.at(pt)
    n = L.dim
    factors = smith_invariant_factors(M)
    nontrivial = [f for f in factors if f.degree > 0]
    chi_pt = char_poly(L).map_coeffs(lambda c: c.evaluate(pt))
    half = n // 2
    forms = trace_power_differentials(L, n)
    rank_half = differentials_rank(forms[:half], pt) if half else 0
    rank_full = differentials_rank(forms, pt)
    return PointDiagnostics(
        point=pt,
        gl_regular=len(nontrivial) == 1,
        diff_nondegenerate_half=half > 0 and rank_half == half,
        char_poly_at_point=chi_pt,
        invariant_factors=nontrivial,
        trace_rank=rank_half,
        trace_rank_full=rank_full,
        segre=segre_rank_sequences(M, chi_pt),
    )
