"""Truncated power-series solution of jet systems with data on the ``x_n`` line.

Data live on the line ``x_1 = b_1, ..., x_{n-1} = b_{n-1}``.  The solution is
extended one variable at a time (by default ``x_{n-1}`` first, ``x_1`` last):
while extending in ``x_k`` the variables not yet handled stay at the base
point, and the ``x_k^(r+1)`` layer of each unknown is read off from the
``x_k^r`` layer of the right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from gmpy2 import mpq

from nijkit.errors import IncompatibleSystem, InputError, ResidualFailure
from nijkit.pdesolve.jets import JetSystem, SolvedForm, check_compatibility_conditions
from nijkit.symkernel.field import ScalarField
from nijkit.symkernel.poly import Chart, Poly, to_rational
from nijkit.symkernel.series import TruncatedSeries, series_from_scalar


class _CompiledExpression:
    """A jet expression split into x-coefficient series per jet monomial."""

    def __init__(self, expr: ScalarField, n: int, m: int, base: tuple, order: int, x_chart: Chart):
        self.num = self._compile(expr.num, n, base, order, x_chart)
        self.den = None if expr.den.is_one() else self._compile(expr.den, n, base, order, x_chart)

    @staticmethod
    def _compile(p: Poly, n: int, base, order, x_chart):
        groups: dict[tuple, dict] = {}
        for e, c in p.terms.items():
            groups.setdefault(e[n:], {})[e[:n]] = c
        return [
            (jet, series_from_scalar(ScalarField.poly(Poly(x_chart, xs)), base, order))
            for jet, xs in sorted(groups.items())
        ]

    @staticmethod
    def _restrict(series: TruncatedSeries, zeros) -> TruncatedSeries:
        return series.restrict_zero(zeros) if zeros else series

    def evaluate(self, values: Sequence[TruncatedSeries], zeros, cache: dict) -> TruncatedSeries:
        num = self._eval(self.num, values, zeros, cache)
        if self.den is None:
            return num
        return num / self._eval(self.den, values, zeros, cache)

    def _eval(self, compiled, values, zeros, cache):
        total = None
        for jet, coeff in compiled:
            term = self._restrict(coeff, zeros)
            for pos, k in enumerate(jet):
                if k:
                    key = (pos, k)
                    if key not in cache:
                        cache[key] = values[pos] ** k
                    term = term * cache[key]
            total = term if total is None else total + term
        if total is None:
            ref = values[0]
            return TruncatedSeries.zero(ref.chart, ref.order, ref.base_point)
        return total


def _line_series(data, x_chart: Chart, base, order: int) -> TruncatedSeries:
    n = x_chart.dim
    if isinstance(data, TruncatedSeries):
        if data.chart != x_chart or data.base_point != tuple(base):
            raise InputError("initial series must live on the system chart at its base point")
        if any(any(e[:n - 1]) for e in data.coeffs):
            raise InputError("initial data may depend on the last coordinate only")
        return data.with_order(order)
    return TruncatedSeries.univariate(x_chart, order, base, n - 1, [to_rational(c) for c in data][: order + 1])


def solve_jet_system(
    system: JetSystem,
    initial: Sequence,
    order: int,
    variable_order: Sequence[int] | None = None,
    check: bool = True,
) -> list[TruncatedSeries]:
    """Series ``f_1..f_m`` of the given order; residuals certified through ``order - 1``."""
    n, m = system.n, system.m
    if order < 1:
        raise InputError("order must be at least 1")
    if len(initial) != m:
        raise InputError(f"need initial data for {m} unknowns")
    if check:
        cert = check_compatibility_conditions(system)
        if not cert.ok:
            raise IncompatibleSystem(f"integrability conditions fail: {cert.violations[:3]}")
    xc, base = system.x_chart, system.point
    order_vars = list(range(n - 2, -1, -1)) if variable_order is None else list(variable_order)
    if sorted(order_vars) != list(range(n - 1)):
        raise InputError("variable_order must be a permutation of the first n-1 coordinates")
    compiled = [[_CompiledExpression(e, n, m, base, order, xc) for e in row] for row in system.H]
    f = [_line_series(v, xc, base, order) for v in initial]
    done: set[int] = set()
    for k in order_vars:
        zeros = [v for v in range(n - 1) if v != k and v not in done]
        for r in range(order):
            values = f + [fs.partial(n - 1) for fs in f]
            cache: dict = {}
            rhs = [compiled[k][s].evaluate(values, zeros, cache) for s in range(m)]
            for s in range(m):
                layer = rhs[s].slice_power(k, r)
                lifted = {}
                for e, c in layer.coeffs.items():
                    if sum(e) + 1 <= order:
                        g = list(e)
                        g[k] = r + 1
                        lifted[tuple(g)] = c / (r + 1)
                if lifted:
                    f[s] = f[s] + TruncatedSeries(xc, order, base, lifted)
        done.add(k)
    _certify(system, compiled, f, order)
    return f


def _certify(system: JetSystem, compiled, f, order: int) -> None:
    n, m = system.n, system.m
    values = f + [fs.partial(n - 1) for fs in f]
    cache: dict = {}
    for i in range(n - 1):
        for s in range(m):
            residual = f[s].partial(i) - compiled[i][s].evaluate(values, [], cache)
            if not residual.vanishes_through(order - 1):
                raise ResidualFailure(
                    f"equation d f_{s + 1}/d {system.x_chart.names[i]}: residual starts at degree {residual.lowest_degree()}"
                )


@dataclass(frozen=True)
class CauchyData:
    """Values of ``U`` and ``U_{x_1}..U_{x_{n-1}}`` along the line, as coefficient lists in ``x_n - b_n``."""

    value: tuple
    gradient: tuple

    @classmethod
    def from_mapping(cls, data: Mapping | None, n: int) -> "CauchyData":
        data = dict(data or {})
        unknown = set(data) - {"v"} - {f"v{i}" for i in range(1, n)}
        if unknown:
            raise InputError(f"unknown initial-data keys {sorted(unknown)}")
        value = tuple(to_rational(c) for c in data.get("v", []))
        grad = tuple(tuple(to_rational(c) for c in data.get(f"v{i}", [])) for i in range(1, n))
        return cls(value, grad)

    @classmethod
    def from_function(cls, U: ScalarField, point: Sequence, order: int) -> "CauchyData":
        """Data of a known function, e.g. to reproduce it exactly."""
        n = U.chart.dim

        def line(f: ScalarField):
            s = series_from_scalar(f, point, order)
            return tuple(s.coefficient((0,) * (n - 1) + (k,)) for k in range(order + 1))

        return cls(line(U), tuple(line(U.partial(i)) for i in range(n - 1)))

    def to_json(self) -> dict:
        out = {"v": [str(c) for c in self.value]}
        for i, g in enumerate(self.gradient, start=1):
            out[f"v{i}"] = [str(c) for c in g]
        return out


def _potential(f: list[TruncatedSeries], constant, order: int) -> TruncatedSeries:
    """``U`` with ``U(b) = constant`` and gradient ``f``, by radial integration."""
    ref = f[0]
    coeffs: dict = {}
    for s, fs in enumerate(f):
        for e, c in fs.coeffs.items():
            d = sum(e)
            if d + 1 > order:
                continue
            g = list(e)
            g[s] += 1
            g = tuple(g)
            coeffs[g] = coeffs.get(g, mpq(0)) + c / (d + 1)
    coeffs[ref.chart.zero_exponent()] = to_rational(constant)
    return TruncatedSeries(ref.chart, order, ref.base_point, coeffs)


def cauchy_series_solve(
    system,
    initial,
    order: int = 8,
    variable_order: Sequence[int] | None = None,
):
    """Series solution through total degree ``order``.

    For a solved form in ``U`` this returns ``U``; for a general jet system, the list of unknowns.
    """
    if isinstance(system, JetSystem):
        return solve_jet_system(system, initial, order, variable_order)
    if not isinstance(system, SolvedForm):
        raise InputError("expected a SolvedForm or a JetSystem")
    n = system.n
    data = initial if isinstance(initial, CauchyData) else CauchyData.from_mapping(initial, n)
    base = system.point
    xc = system.x_chart
    v = TruncatedSeries.univariate(xc, order, base, n - 1, list(data.value)[: order + 1])
    line = [list(g) for g in data.gradient] + [v.partial(n - 1)]
    if n == 1:
        U = v
    else:
        f = solve_jet_system(system.to_jet_system(), line, order - 1, variable_order)
        U = _potential(f, data.value[0] if data.value else 0, order)
        for s in range(n):
            if not (U.partial(s) - f[s]).vanishes_through(order - 2):
                raise ResidualFailure(f"recovered U does not reproduce U_{xc.names[s]}")
    _certify_equation(system, U, order)
    return U


def _certify_equation(system: SolvedForm, U: TruncatedSeries, order: int) -> None:
    """``d(A* dU) - Omega`` must vanish through degree ``order - 2``."""
    n = system.n
    base = system.point
    A = [[series_from_scalar(a, base, order) for a in row] for row in system.A.entries]
    grad = [U.partial(k) for k in range(n)]
    beta = []
    for j in range(n):
        acc = TruncatedSeries.zero(system.x_chart, order - 1, base)
        for i in range(n):
            if A[i][j].coeffs:
                acc = acc + grad[i] * A[i][j]
        beta.append(acc)
    for i in range(n):
        for j in range(i + 1, n):
            lhs = beta[j].partial(i) - beta[i].partial(j)
            om = series_from_scalar(system.Omega.component((i, j)), base, order)
            residual = lhs - om
            if not residual.vanishes_through(order - 2):
                raise ResidualFailure(
                    f"component ({i + 1},{j + 1}) of d(A* dU) - Omega starts at degree {residual.lowest_degree()}"
                )
