"""Cotangent lift of a Nijenhuis operator, Newton-Girard polynomials and the passage
between the two companion forms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Iterator

from gmpy2 import mpq

from nijkit.errors import CertificationFailure, InputError
from nijkit.exterior.forms import KForm, canonical_symplectic, change_form_coordinates
from nijkit.exterior.operators import OperatorField, change_coordinates, jacobian
from nijkit.nijenhuis import (
    CompanionCertificate,
    check_second_companion_nijenhuis,
    second_companion,
    torsion,
)
from nijkit.pncompat import PNPair, block_lower_triangular, build_canonical, canonical_A, check_compatibility
from nijkit.symkernel import linalg
from nijkit.symkernel.field import ScalarField
from nijkit.symkernel.poly import Chart, Poly


@dataclass(frozen=True)
class TuriExtension:
    base_dim: int
    A: OperatorField
    L_ext: OperatorField
    S_block: tuple
    certified: bool | None  # None when A itself is not Nijenhuis

    @property
    def chart(self) -> Chart:
        return self.L_ext.chart

    def omega(self) -> KForm:
        n = self.base_dim
        return canonical_symplectic(self.chart, self.chart.names[:n], self.chart.names[n:])

    def pair(self) -> PNPair:
        return PNPair(self.omega(), self.L_ext)

    def s_is_zero(self) -> bool:
        return all(x.is_zero() for row in self.S_block for x in row)

    def to_json(self) -> dict:
        return {
            "n": self.base_dim,
            "A": self.A.to_json(),
            "L": self.L_ext.to_json(),
            "S": [[str(x) for x in row] for row in self.S_block],
            "certified": self.certified,
        }


def turiel_extend(A: OperatorField, fibre: str = "p") -> TuriExtension:
    """Lift ``A`` to ``[[A, 0], [S, A^T]]`` with
    ``S_ij = sum_a p_a (d_j A^a_i - d_i A^a_j)``."""
    n = A.dim
    if A.chart.dim != n:
        raise InputError("A must act on the tangent bundle of its own chart")
    ps = [f"{fibre}{i}" for i in range(1, n + 1)]
    clash = [p for p in ps if p in A.chart]
    if clash:
        raise InputError(f"base chart already uses fibre names {clash}")
    chart = A.chart.extend(ps)
    A_ext = A.rename_into(chart)
    p = [ScalarField.var(chart, name) for name in ps]
    E = A_ext.entries
    zero = ScalarField.zero(chart)
    S = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            acc = zero
            for a in range(n):
                c = E[a][i].partial(j) - E[a][j].partial(i)
                if not c.is_zero():
                    acc = acc + p[a] * c
            S[i][j] = acc
            S[j][i] = -acc
    L = block_lower_triangular(A_ext, S, chart)
    certified = None
    if torsion(A).is_zero():
        ext = TuriExtension(n, A, L, tuple(map(tuple, S)), None)
        report = check_compatibility(ext.pair(), with_torsion=True)
        if not report.ok:
            raise CertificationFailure(f"lift of a Nijenhuis operator failed: {report.to_json()}")
        certified = True
    return TuriExtension(n, A, L, tuple(map(tuple, S)), certified)


# ---------------------------------------------------------------------------
# Newton-Girard


def _weighted_partitions(k: int, part: int = 1) -> Iterator[dict[int, int]]:
    """Multiplicity maps ``{i: m_i}`` with ``sum i*m_i == k`` and all ``i >= part``."""
    if k == 0:
        yield {}
        return
    for i in range(part, k + 1):
        for m in range(1, k // i + 1):
            for rest in _weighted_partitions(k - i * m, i + 1):
                yield {i: m, **rest}


def power_chart(k: int, name: str = "y") -> Chart:
    return Chart([f"{name}{i}" for i in range(1, k + 1)])


@lru_cache(maxsize=None)
def _sigma_terms(k: int) -> tuple:
    terms = []
    for mult in _weighted_partitions(k):
        denom = 1
        for m in mult.values():
            denom *= factorial(m)
        terms.append((tuple(sorted(mult.items())), mpq(1, denom)))
    return tuple(terms)


def newton_girard_sigma(k: int, chart: Chart | None = None, name: str = "y") -> ScalarField:
    """``sum over sum(i m_i) = k`` of ``prod y_i^m_i / m_i!``."""
    if k < 1:
        raise InputError("k must be positive")
    chart = power_chart(k, name) if chart is None else chart
    if chart.dim < k:
        raise InputError(f"sigma_{k} needs at least {k} coordinates")
    terms = {}
    for mult, coeff in _sigma_terms(k):
        e = [0] * chart.dim
        for i, m in mult:
            e[i - 1] = m
        terms[tuple(e)] = coeff
    return ScalarField.poly(Poly(chart, terms))


# ---------------------------------------------------------------------------
# companion conversion


@dataclass(frozen=True)
class CompanionConversion:
    n: int
    x_chart: Chart
    y_chart: Chart
    forward: tuple  # y_k as functions of x
    inverse: tuple  # x_k as functions of y
    A_x: OperatorField
    A_y: OperatorField
    sigma: tuple
    inverse_exact: bool
    second_form_exact: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "forward": {y: str(f) for y, f in zip(self.y_chart.names, self.forward)},
            "inverse": {x: str(f) for x, f in zip(self.x_chart.names, self.inverse)},
            "A_y": self.A_y.to_json(),
            "inverse_exact": self.inverse_exact,
            "second_form_exact": self.second_form_exact,
        }


def first_to_second_companion(n: int) -> CompanionConversion:
    if n < 1:
        raise InputError("n must be positive")
    xc = Chart([f"x{i}" for i in range(1, n + 1)])
    yc = power_chart(n)
    A = canonical_A(n, xc)
    forward = []
    P = A
    for k in range(1, n + 1):
        forward.append(P.trace() * mpq(-1, k))
        P = P @ A
    inverse = [newton_girard_sigma(k, yc) for k in range(1, n + 1)]
    ys = [ScalarField.var(yc, v) for v in yc.names]
    xs = [ScalarField.var(xc, v) for v in xc.names]
    roundtrip_x = [s.compose(forward, xc) for s in inverse]
    roundtrip_y = [f.compose(inverse, yc) for f in forward]
    inverse_exact = roundtrip_x == xs and roundtrip_y == ys
    A_y = change_coordinates(A, inverse, yc)
    second_form_exact = A_y == second_companion(inverse, yc)
    return CompanionConversion(
        n, xc, yc, tuple(forward), tuple(inverse), A, A_y, tuple(inverse), inverse_exact, second_form_exact
    )


def cotangent_lift_map(conv: CompanionConversion, fibre: str = "p") -> tuple[Chart, list[ScalarField]]:
    """Old cotangent coordinates ``(x, p)`` as functions of new ones ``(y, p')``.

    Covectors follow ``p = J^T p'`` with ``J = d(y)/d(x)`` taken at ``x(y)``.
    """
    n = conv.n
    new_chart = conv.y_chart.extend([f"{fibre}{i}" for i in range(1, n + 1)])
    J = jacobian(conv.forward, conv.x_chart)
    J_at = [[entry.compose(conv.inverse, conv.y_chart).rename_into(new_chart) for entry in row] for row in J]
    q = [ScalarField.var(new_chart, f"{fibre}{i}") for i in range(1, n + 1)]
    ps = []
    for i in range(n):
        acc = ScalarField.zero(new_chart)
        for k in range(n):
            if not J_at[k][i].is_zero():
                acc = acc + J_at[k][i] * q[k]
        ps.append(acc)
    xs = [f.rename_into(new_chart) for f in conv.inverse]
    return new_chart, xs + ps


def transport_canonical(n: int) -> PNPair:
    """The canonical pair rewritten in the coordinates ``(y, p')``."""
    conv = first_to_second_companion(n)
    canon = build_canonical(n)
    new_chart, old_of_new = cotangent_lift_map(conv)
    L_new = change_coordinates(canon.L, old_of_new, new_chart)
    omega_new = change_form_coordinates(canon.omega, old_of_new, new_chart)
    return PNPair(omega_new, L_new)


@dataclass(frozen=True)
class AlternativeCanonical:
    n: int
    pair: PNPair
    A: OperatorField
    sigma: tuple
    companion_certificate: CompanionCertificate

    def to_json(self) -> dict:
        out = self.pair.to_json()
        out["sigma"] = [str(s) for s in self.sigma]
        out["second_companion_check"] = self.companion_certificate.to_json()
        return out


def build_alternative_canonical(n: int, certify: bool = True) -> AlternativeCanonical:
    if n < 1:
        raise InputError("n must be positive")
    yc = power_chart(n)
    sigma = [newton_girard_sigma(k, yc) for k in range(1, n + 1)]
    A_small = second_companion(sigma, yc)
    chart = yc.extend([f"p{i}" for i in range(1, n + 1)])
    A = A_small.rename_into(chart)
    zero = [[ScalarField.zero(chart)] * n for _ in range(n)]
    L = block_lower_triangular(A, zero, chart)
    omega = canonical_symplectic(chart, chart.names[:n], chart.names[n:])
    pair = PNPair(omega, L)
    cert = check_second_companion_nijenhuis(sigma, yc)
    if certify:
        report = check_compatibility(pair, with_torsion=True)
        if not (report.ok and cert.nijenhuis and cert.agrees_with_torsion):
            raise CertificationFailure(f"alternative canonical pair n={n} failed certification")
    return AlternativeCanonical(n, pair, A_small, tuple(sigma), cert)


def char_coefficients_from_traces(M) -> list:
    """Characteristic coefficients of a rational matrix via ``sigma_k(-tr M^j / j)``."""
    n = len(M)
    ys = []
    P = M
    for j in range(1, n + 1):
        tr = sum((P[i][i] for i in range(n)), mpq(0))
        ys.append(-tr / j)
        P = linalg.mat_mul(P, M)
    yc = power_chart(n)
    return [newton_girard_sigma(k, yc).evaluate(ys) for k in range(1, n + 1)]
