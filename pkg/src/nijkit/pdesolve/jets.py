"""Jet-space reduction of ``d(A* dU) = Omega`` and its integrability conditions.

Jet expressions are rational functions on an enlarged chart
``(x_1..x_n, u_1..u_m, w_1..w_m, z_1..z_m)`` where, for unknowns ``f_s``,
``u_s = f_s``, ``w_s = d f_s / d x_n`` and ``z_s = d^2 f_s / d x_n^2``.
For the equation in ``U`` the unknowns are ``f_s = U_{x_s}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import InputError, NotCompanionAtPoint, SingularMatrix, SingularReduction
from nijkit.exterior.forms import KForm, change_form_coordinates
from nijkit.exterior.operators import OperatorField, change_coordinates
from nijkit.nijenhuis import smith_invariant_factors
from nijkit.symkernel import linalg
from nijkit.symkernel.field import ScalarField, as_field
from nijkit.symkernel.poly import Chart, Poly, require_point


def jet_chart(x_chart: Chart, m: int) -> Chart:
    names = [f"{kind}{s}" for kind in ("u", "w", "z") for s in range(1, m + 1)]
    clash = [v for v in names if v in x_chart]
    if clash:
        raise InputError(f"coordinate names {clash} collide with jet variables")
    return x_chart.extend(names)


class _JetIndex:
    """Positions of the jet variables inside a jet chart."""

    def __init__(self, n: int, m: int):
        self.n, self.m = n, m

    def u(self, s: int) -> int:
        return self.n + s

    def w(self, s: int) -> int:
        return self.n + self.m + s

    def z(self, s: int) -> int:
        return self.n + 2 * self.m + s


@dataclass(frozen=True)
class JetSystem:
    """``d f_s / d x_i = H[i][s](x, f, d f / d x_n)`` for ``i < n - 1``.

    ``H`` holds jet expressions free of the ``z`` variables.
    """

    x_chart: Chart
    m: int
    H: tuple
    point: tuple

    @property
    def n(self) -> int:
        return self.x_chart.dim

    @property
    def chart(self) -> Chart:
        return jet_chart(self.x_chart, self.m)

    @classmethod
    def from_expressions(cls, x_chart: Chart, m: int, rows: Sequence[Sequence], point: Sequence) -> "JetSystem":
        jc = jet_chart(x_chart, m)
        H = tuple(tuple(as_field(e, jc) for e in row) for row in rows)
        if len(H) != x_chart.dim - 1 or any(len(r) != m for r in H):
            raise InputError(f"need {x_chart.dim - 1} rows of {m} expressions")
        idx = _JetIndex(x_chart.dim, m)
        for row in H:
            for e in row:
                if any(idx.z(s) in e.support() for s in range(m)):
                    raise InputError("right-hand sides may not involve z variables")
        return cls(x_chart, m, H, require_point(x_chart, point))


@dataclass(frozen=True)
class SolvedForm:
    """``U_{x_a x_b} = h[(a, b)]`` for ``a <= b < n - 1`` (0-based)."""

    A: OperatorField
    Omega: KForm
    point: tuple
    h: dict = field(compare=False)

    @property
    def n(self) -> int:
        return self.A.dim

    @property
    def x_chart(self) -> Chart:
        return self.A.chart

    @property
    def chart(self) -> Chart:
        return jet_chart(self.x_chart, self.n)

    def rhs(self, a: int, b: int) -> ScalarField:
        return self.h[(a, b) if a <= b else (b, a)]

    def perturbed(self, a: int, b: int, delta) -> "SolvedForm":
        key = (a, b) if a <= b else (b, a)
        h = dict(self.h)
        h[key] = h[key] + as_field(delta, self.chart)
        return replace(self, h=h)

    def to_jet_system(self) -> JetSystem:
        n = self.n
        jc = self.chart
        idx = _JetIndex(n, n)
        rows = []
        for i in range(n - 1):
            row = [self.rhs(s, i) for s in range(n - 1)]
            row.append(ScalarField.poly(Poly.monomial(jc, jc.unit_exponent(idx.w(i)))))
            rows.append(tuple(row))
        return JetSystem(self.x_chart, n, tuple(rows), self.point)

    def to_json(self) -> dict:
        names = self.x_chart.names
        return {
            "n": self.n,
            "point": [str(v) for v in self.point],
            "h": {f"U_{names[a]}{names[b]}": str(v) for (a, b), v in sorted(self.h.items())},
        }


def is_first_companion(M: Sequence[Sequence]) -> bool:
    n = len(M)
    for i in range(n):
        for j in range(1, n):
            want = 1 if j == i + 1 else 0
            if M[i][j] != want:
                return False
    return True


def _second_order_structure(A: OperatorField, Omega: KForm, jc: Chart):
    """Per equation ``(i, j)``: coefficients of ``U_ab`` (keys sorted) and the first-order part."""
    n = A.dim
    E = A.entries
    idx = _JetIndex(n, n)
    out = []
    for i, j in combinations(range(n), 2):
        second: dict[tuple[int, int], ScalarField] = {}
        for k in range(n):
            for key, c in ((tuple(sorted((k, i))), E[k][j]), (tuple(sorted((k, j))), -E[k][i])):
                if c.is_zero():
                    continue
                second[key] = second[key] + c if key in second else c
        rest = -Omega.component((i, j)).rename_into(jc)
        for k in range(n):
            c = E[k][j].partial(i) - E[k][i].partial(j)
            if not c.is_zero():
                rest = rest + c.rename_into(jc) * ScalarField.var(jc, jc.names[idx.u(k)])
        out.append(((i, j), second, rest))
    return out


def reduce_to_solved_form(A: OperatorField, Omega: KForm, point: Sequence) -> SolvedForm:
    """Resolve ``d(A* dU) = Omega`` for the second derivatives not involving ``x_n``."""
    n = A.dim
    xc = A.chart
    if xc.dim != n or Omega.chart != xc or Omega.degree != 2:
        raise InputError("A and Omega must share an n-dimensional chart")
    pt = require_point(xc, point)
    if not is_first_companion(A.at(pt)):
        raise NotCompanionAtPoint(f"A at {tuple(str(v) for v in pt)} is not in companion form")
    jc = jet_chart(xc, n)
    idx = _JetIndex(n, n)
    principal = [(a, b) for a in range(n - 1) for b in range(a, n - 1)]
    equations = _second_order_structure(A, Omega, jc)
    zero = ScalarField.zero(xc)
    M = [[second.get(key, zero) for key in principal] for _, second, _ in equations]
    rhs = []
    for _, second, rest in equations:
        r = rest
        for (a, b), c in second.items():
            if b == n - 1:
                r = r + c.rename_into(jc) * ScalarField.var(jc, jc.names[idx.w(a)])
        rhs.append(-r)
    h = {}
    if principal:
        det = linalg.bareiss_det(M)
        if det.is_zero():
            raise SingularReduction("the second-order system is degenerate identically")
        if det.evaluate(pt) == 0:
            raise SingularReduction("the second-order system is degenerate at the point")
        try:
            inv = linalg.inverse(M)
        except SingularMatrix as exc:  # pragma: no cover - determinant checked above
            raise SingularReduction(str(exc)) from exc
        for row, key in zip(inv, principal):
            acc = ScalarField.zero(jc)
            for c, r in zip(row, rhs):
                if not c.is_zero() and not r.is_zero():
                    acc = acc + c.rename_into(jc) * r
            h[key] = acc
    return SolvedForm(A, Omega, pt, h)


def linear_companion_frame(A: OperatorField, Omega: KForm, point: Sequence):
    """Linear coordinates in which ``A`` at the point is a first companion matrix.

    Returns ``(A', Omega', point', K)`` with old coordinates ``x = K x'``.
    """
    n = A.dim
    xc = A.chart
    pt = require_point(xc, point)
    M = A.at(pt)
    if len([f for f in smith_invariant_factors(M) if f.degree > 0]) != 1:
        raise NotCompanionAtPoint("A is not gl-regular at the point")
    candidates = [[mpq(1) if k == j else mpq(0) for k in range(n)] for j in reversed(range(n))]
    candidates.append([mpq(k + 1) for k in range(n)])
    candidates.append([mpq(1)] * n)
    K = None
    for xi in candidates:
        cols = [xi]
        for _ in range(n - 1):
            cols.append([sum((M[r][c] * cols[-1][c] for c in range(n)), mpq(0)) for r in range(n)])
        cols.reverse()
        K_try = [[cols[j][i] for j in range(n)] for i in range(n)]
        if linalg.rank(K_try) == n:
            K = K_try
            break
    if K is None:
        raise NotCompanionAtPoint("no cyclic vector found among the standard trial vectors")
    coords = [ScalarField.var(xc, name) for name in xc.names]
    old_of_new = []
    for i in range(n):
        acc = ScalarField.zero(xc)
        for j in range(n):
            if K[i][j]:
                acc = acc + coords[j] * K[i][j]
        old_of_new.append(acc)
    inv = linalg.inverse(K)
    new_point = tuple(sum((inv[i][j] * pt[j] for j in range(n)), mpq(0)) for i in range(n))
    return (
        change_coordinates(A, old_of_new, xc),
        change_form_coordinates(Omega, old_of_new, xc),
        new_point,
        K,
    )


# ---------------------------------------------------------------------------
# total derivatives and integrability


class TotalDerivatives:
    def __init__(self, system: JetSystem):
        self.system = system
        self.chart = system.chart
        self.idx = _JetIndex(system.n, system.m)
        self._dn_cache: dict = {}

    def _var(self, k: int) -> ScalarField:
        return ScalarField.poly(Poly.monomial(self.chart, self.chart.unit_exponent(k)))

    def along_last(self, G: ScalarField) -> ScalarField:
        """``D_n = d/dx_n + sum w_s d/du_s + sum z_s d/dw_s`` (on z-free input)."""
        n, m, idx = self.system.n, self.system.m, self.idx
        out = G.partial(n - 1)
        for s in range(m):
            gu = G.partial(idx.u(s))
            if not gu.is_zero():
                out = out + self._var(idx.w(s)) * gu
            gw = G.partial(idx.w(s))
            if not gw.is_zero():
                out = out + self._var(idx.z(s)) * gw
        return out

    def _dn_rhs(self, k: int, s: int) -> ScalarField:
        key = (k, s)
        if key not in self._dn_cache:
            self._dn_cache[key] = self.along_last(self.system.H[k][s])
        return self._dn_cache[key]

    def along(self, k: int, G: ScalarField) -> ScalarField:
        """``D_k = d/dx_k + sum H_ks d/du_s + sum D_n(H_ks) d/dw_s`` for ``k < n - 1``."""
        m, idx = self.system.m, self.idx
        out = G.partial(k)
        for s in range(m):
            gu = G.partial(idx.u(s))
            if not gu.is_zero():
                out = out + self.system.H[k][s] * gu
            gw = G.partial(idx.w(s))
            if not gw.is_zero():
                out = out + self._dn_rhs(k, s) * gw
        return out


@dataclass
class IntegrabilityCertificate:
    ok: bool
    checked: int
    violations: list[dict] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"compatible": self.ok, "identities_checked": self.checked, "violations": self.violations}


def _split_by_z(expr: ScalarField, z_positions: list[int]) -> dict[tuple[int, ...], ScalarField]:
    """Group the numerator by its exponents in the z variables."""
    groups: dict[tuple[int, ...], dict] = {}
    for e, c in expr.num.terms.items():
        key = tuple(e[p] for p in z_positions)
        rest = list(e)
        for p in z_positions:
            rest[p] = 0
        groups.setdefault(key, {})[tuple(rest)] = c
    chart = expr.chart
    return {k: ScalarField(Poly(chart, v), expr.den) for k, v in groups.items()}


def check_compatibility_conditions(system) -> IntegrabilityCertificate:
    """``D_i H_l == D_l H_i`` for every pair ``i < l < n - 1``, split by powers of ``z``."""
    if isinstance(system, SolvedForm):
        system = system.to_jet_system()
    D = TotalDerivatives(system)
    names = system.chart.names
    z_positions = [D.idx.z(s) for s in range(system.m)]
    violations = []
    checked = 0
    for i, l in combinations(range(system.n - 1), 2):
        for s in range(system.m):
            diff = D.along(i, system.H[l][s]) - D.along(l, system.H[i][s])
            for zkey, coeff in sorted(_split_by_z(diff, z_positions).items()):
                checked += 1
                if coeff.is_zero():
                    continue
                label = "*".join(
                    names[p] if k == 1 else f"{names[p]}^{k}" for p, k in zip(z_positions, zkey) if k
                ) or "1"
                violations.append(
                    {
                        "pair": [names[i], names[l]],
                        "unknown": s + 1,
                        "z_monomial": label,
                        "coefficient": str(coeff),
                    }
                )
            if not diff.num.terms:
                checked += 1
    return IntegrabilityCertificate(not violations, checked, violations)
