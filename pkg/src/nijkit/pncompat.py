"""Symplectic form / operator pairs: compatibility, the canonical singular model, block tags,
and canonical transformations generated by a function of the base coordinates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import (
    CertificationFailure,
    DegenerateOmega,
    InputError,
    NotSemisimpleAtPoint,
    PDependence,
    ShapeMismatch,
    SingularMatrix,
    UnsupportedEigenvalues,
)
from nijkit.exterior.forms import KForm, canonical_symplectic, change_form_coordinates, d, i_A
from nijkit.exterior.operators import OperatorField, change_coordinates
from nijkit.nijenhuis import char_poly, first_companion, smith_invariant_factors, torsion
from nijkit.symkernel import linalg
from nijkit.symkernel.field import ScalarField, as_field
from nijkit.symkernel.poly import Chart, require_point
from nijkit.symkernel.upoly import UPoly


def cotangent_chart(n: int, base: str = "x", fibre: str = "p") -> Chart:
    return Chart([f"{base}{i}" for i in range(1, n + 1)] + [f"{fibre}{i}" for i in range(1, n + 1)])


@dataclass(frozen=True)
class PNPair:
    omega: KForm
    L: OperatorField

    def __post_init__(self):
        if self.omega.degree != 2:
            raise InputError("omega must be a 2-form")
        if self.omega.chart != self.L.chart or self.L.dim != self.L.chart.dim:
            raise InputError("omega and L must live on the same chart")
        if self.L.dim % 2:
            raise InputError("a symplectic chart has even dimension")

    @property
    def chart(self) -> Chart:
        return self.L.chart

    @property
    def n(self) -> int:
        return self.L.dim // 2

    def omega_tilde_matrix(self) -> list[list[ScalarField]]:
        return linalg.mat_mul(linalg.transpose(self.L.entries), self.omega.matrix())

    def to_json(self) -> dict:
        return {"n": self.n, "omega": self.omega.to_json(), "L": self.L.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "PNPair":
        try:
            L = OperatorField.from_json(data["L"], Chart(data["chart"]) if "chart" in data else None)
            omega_data = data.get("omega")
            if omega_data is None:
                omega = canonical_symplectic(L.chart, L.chart.names[: L.dim // 2], L.chart.names[L.dim // 2:])
            else:
                omega = KForm.from_json(omega_data, L.chart)
        except KeyError as exc:
            raise InputError(f"pair JSON lacks {exc}") from exc
        if "n" in data and int(data["n"]) * 2 != L.dim:
            raise InputError("declared n does not match the operator size")
        return cls(omega, L)


def recursion_operator(omega: KForm, omega_tilde: KForm) -> OperatorField:
    """``L`` with ``omega_tilde(., .) = omega(L., .)``, i.e. ``L = W^-1 W~``."""
    W = omega.matrix()
    if linalg.bareiss_det(W) == 0:
        raise DegenerateOmega("omega is degenerate (determinant vanishes identically)")
    try:
        entries = linalg.solve(W, omega_tilde.matrix())
    except SingularMatrix as exc:  # pragma: no cover - determinant checked above
        raise DegenerateOmega(str(exc)) from exc
    return OperatorField._raw(entries, omega.chart)


@dataclass
class CompatibilityReport:
    skew: bool
    omega_tilde_closed: bool
    omega_closed: bool
    skew_violations: list[str] = field(default_factory=list)
    closedness_violations: list[str] = field(default_factory=list)
    torsion_zero: bool | None = None

    @property
    def ok(self) -> bool:
        return self.skew and self.omega_tilde_closed and self.omega_closed and self.torsion_zero is not False

    def to_json(self) -> dict:
        out = {
            "skew": self.skew,
            "omega_tilde_closed": self.omega_tilde_closed,
            "omega_closed": self.omega_closed,
            "skew_violations": self.skew_violations,
            "closedness_violations": self.closedness_violations,
            "ok": self.ok,
        }
        if self.torsion_zero is not None:
            out["torsion_zero"] = self.torsion_zero
        return out


def check_compatibility(pair: PNPair, with_torsion: bool = False) -> CompatibilityReport:
    names = pair.chart.names
    m = pair.omega_tilde_matrix()
    size = len(m)
    skew_bad = []
    for i in range(size):
        for j in range(i, size):
            s = m[i][j] + m[j][i]
            if not s.is_zero():
                skew_bad.append(f"omega(L d/d{names[i]}, d/d{names[j]}) + omega(L d/d{names[j]}, d/d{names[i]}) = {s}")
    tilde = KForm.from_matrix(m, pair.chart)
    dt = d(tilde)
    closed_bad = [f"d(omega~) {label}: {v}" for label, v in dt.nonzero_components()]
    domega = d(pair.omega)
    closed_bad += [f"d(omega) {label}: {v}" for label, v in domega.nonzero_components()]
    return CompatibilityReport(
        skew=not skew_bad,
        omega_tilde_closed=dt.is_zero(),
        omega_closed=domega.is_zero(),
        skew_violations=skew_bad,
        closedness_violations=closed_bad,
        torsion_zero=torsion(pair.L).is_zero() if with_torsion else None,
    )


# ---------------------------------------------------------------------------
# the canonical model


def canonical_A(n: int, chart: Chart) -> OperatorField:
    """First companion block with ``sigma_i = x_i``."""
    return first_companion([ScalarField.var(chart, f"x{i}") for i in range(1, n + 1)], chart)


def canonical_S(n: int, chart: Chart) -> list[list[ScalarField]]:
    zero = ScalarField.zero(chart)
    S = [[zero] * n for _ in range(n)]
    for j in range(1, n):
        p = ScalarField.var(chart, f"p{j + 1}")
        S[0][j] = -p
        S[j][0] = p
    return S


def block_lower_triangular(A: OperatorField, S: Sequence[Sequence], chart: Chart) -> OperatorField:
    n = A.dim
    zero = [[ScalarField.zero(chart)] * n for _ in range(n)]
    return OperatorField.from_blocks([[A, zero], [S, A.transpose()]], chart)


@dataclass(frozen=True)
class CanonicalPN:
    n: int
    chart: Chart
    A: OperatorField
    S: tuple
    L: OperatorField
    omega: KForm

    @property
    def pair(self) -> PNPair:
        return PNPair(self.omega, self.L)

    def to_json(self) -> dict:
        return self.pair.to_json()


def build_canonical(n: int, certify: bool = True) -> CanonicalPN:
    if n < 1:
        raise InputError("n must be positive")
    chart = cotangent_chart(n)
    A_small = canonical_A(n, chart)
    S = canonical_S(n, chart)
    L = block_lower_triangular(A_small, S, chart)
    omega = canonical_symplectic(chart, chart.names[:n], chart.names[n:])
    result = CanonicalPN(n, chart, A_small, tuple(tuple(r) for r in S), L, omega)
    if certify:
        report = check_compatibility(result.pair, with_torsion=True)
        if not report.ok:
            raise CertificationFailure(f"canonical pair n={n} failed: {report.to_json()}")
    return result


# ---------------------------------------------------------------------------
# pointwise block tags


@dataclass(frozen=True)
class BlockTag:
    factor: str
    multiplicity: int
    kind: str  # "real" or "complex"
    constant: bool

    @property
    def block_type(self) -> int:
        if self.kind == "real":
            return 2 if self.constant else 1
        return 4 if self.constant else 3

    def to_json(self) -> dict:
        return {
            "factor": self.factor,
            "multiplicity": self.multiplicity,
            "type": self.block_type,
            "eigenvalues": self.kind,
            "constant": self.constant,
        }


def _factor_over_q(p: UPoly) -> list[tuple[UPoly, int]]:
    import sympy

    t = sympy.Symbol("t")
    expr = sum(sympy.Rational(int(c.numerator), int(c.denominator)) * t**k for k, c in enumerate(p.coeffs))
    _, factors = sympy.factor_list(expr, t)
    out = []
    for f, m in factors:
        coeffs = sympy.Poly(f, t).all_coeffs()[::-1]
        out.append((UPoly([mpq(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in coeffs]).monic(), m))
    return out


def classify_semisimple_block(pair: PNPair, point: Sequence) -> list[BlockTag]:
    """Tag each rational irreducible factor of the characteristic polynomial at ``point``.

    The eigenvalue group of ``q^m`` counts as constant when every
    ``d/dx_k d^(m-1)/dt^(m-1) chi`` vanishes modulo ``q`` at the point.
    """
    L = pair.L
    pt = require_point(L.chart, point)
    M = L.at(pt)
    factors = smith_invariant_factors(M)
    top = factors[-1]
    if top.gcd(top.derivative()).degree > 0:
        raise NotSemisimpleAtPoint(f"minimal polynomial {top} has a repeated factor")
    chi = char_poly(L)
    chi_pt = chi.map_coeffs(lambda c: c.evaluate(pt))
    tags = []
    for q, mult in _factor_over_q(chi_pt):
        if q.degree > 2:
            raise UnsupportedEigenvalues(f"irreducible factor {q} of degree {q.degree}")
        deriv = chi
        for _ in range(mult - 1):
            deriv = deriv.derivative()
        constant = True
        for k in range(L.chart.dim):
            g = deriv.map_coeffs(lambda c: c.partial(k).evaluate(pt))
            if not (g % q).is_zero():
                constant = False
                break
        tags.append(BlockTag(str(q), mult, "real" if q.degree == 1 else "complex", constant))
    return tags


# ---------------------------------------------------------------------------
# the block-triangular shape with base coordinates x and fibre coordinates p


def _split(pair_or_L) -> tuple[OperatorField, int]:
    L = pair_or_L.L if isinstance(pair_or_L, PNPair) else pair_or_L
    if L.dim % 2 or L.chart.dim != L.dim:
        raise ShapeMismatch("operator must act on a chart of even dimension", None)
    return L, L.dim // 2


def jacobi_row_structure(pair_or_L) -> list[list[ScalarField]]:
    """Check the shape ``[[A, 0], [S^, A^T]]`` with ``A`` the canonical companion block.

    Returns the extracted lower-left block (required skew-symmetric).
    """
    L, n = _split(pair_or_L)
    A = canonical_A(n, L.chart)
    for i in range(n):
        expected = list(A.entries[i]) + [ScalarField.zero(L.chart)] * n
        if list(L.entries[i]) != expected:
            raise ShapeMismatch(f"row {i + 1} of L is not the canonical companion row", i)
    for i in range(n):
        for j in range(n):
            if L.entries[n + i][n + j] != A.entries[j][i]:
                raise ShapeMismatch(f"row {n + i + 1}: lower-right block is not A^T", n + i)
    S_hat = L.block(n, 2 * n, 0, n)
    for i in range(n):
        for j in range(i, n):
            if not (S_hat[i][j] + S_hat[j][i]).is_zero():
                raise ShapeMismatch(f"row {n + i + 1}: lower-left block is not skew-symmetric", n + i)
    return S_hat


def has_jacobi_row_structure(pair_or_L) -> bool:
    try:
        jacobi_row_structure(pair_or_L)
    except ShapeMismatch:
        return False
    return True


def jacobi_relation_holds(L: OperatorField) -> bool:
    """``J L = C J`` where ``J`` is the Jacobian of the characteristic coefficients
    and ``C`` their first companion matrix."""
    chi = char_poly(L)
    m = L.dim
    sigma = [chi.coeff(m - k) for k in range(1, m + 1)]
    J = [[s.partial(j) for j in range(L.chart.dim)] for s in sigma]
    C = first_companion(sigma, L.chart)
    return linalg.mat_mul(J, L.entries) == linalg.mat_mul(C.entries, J)


def extract_T(pair_or_L, *, require_base_only: bool = True) -> KForm:
    """``T = S^ - S`` as a 2-form on the base chart ``x1..xn``."""
    L, n = _split(pair_or_L)
    S_hat = jacobi_row_structure(L)
    S = canonical_S(n, L.chart)
    fibre = L.chart.names[n:]
    T = [[S_hat[i][j] - S[i][j] for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            bad = [p for p in fibre if T[i][j].depends_on(p)]
            if bad and require_base_only:
                raise PDependence(f"T[{i + 1},{j + 1}] = {T[i][j]} depends on {', '.join(bad)}")
    base = Chart(L.chart.names[:n])
    return KForm.from_matrix([[t.rename_into(base) for t in row] for row in T], base)


def closedness_of_T(T: KForm, A: OperatorField) -> tuple[bool, bool]:
    """Whether ``T`` and ``T_A = i_A T`` are closed."""
    return d(T).is_zero(), d(i_A(A, T)).is_zero()


def generating_transform(U, pair: PNPair) -> PNPair:
    """Apply ``P_i = p_i + dU/dx_i`` (same coordinate names) and return the transformed pair.

    The symplectic form is checked to be unchanged.
    """
    L, n = _split(pair)
    chart = L.chart
    U = as_field(U, chart)
    fibre = chart.names[n:]
    bad = [p for p in fibre if U.depends_on(p)]
    if bad:
        raise PDependence(f"generating function depends on {', '.join(bad)}")
    jacobi_row_structure(L)
    coords = [ScalarField.var(chart, name) for name in chart.names]
    grad = [U.partial(i) for i in range(n)]
    old_of_new = coords[:n] + [coords[n + i] - grad[i] for i in range(n)]
    L_new = change_coordinates(L, old_of_new, chart)
    omega_new = change_form_coordinates(pair.omega, old_of_new, chart)
    if omega_new != pair.omega:
        raise CertificationFailure("the transformation changed omega")
    return PNPair(pair.omega, L_new)


def hessian(U: ScalarField, n: int) -> list[list[ScalarField]]:
    return [[U.partial(i).partial(j) for j in range(n)] for i in range(n)]
