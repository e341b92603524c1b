"""Multivariate power series truncated at a total degree."""

from __future__ import annotations

from math import comb
from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import ChartMismatch, EvaluationError, InputError
from nijkit.symkernel.field import ScalarField
from nijkit.symkernel.poly import _NUMBER_TYPES, Chart, Exponent, Poly, grlex_key, rational_str, to_rational


class TruncatedSeries:
    """Coefficients of ``(x - base_point)^e`` for ``|e| <= order``.

    All stored exponents have total degree at most ``order``; arithmetic
    discards anything above it.
    """

    __slots__ = ("chart", "order", "base_point", "coeffs")

    def __init__(self, chart: Chart, order: int, base_point: Sequence, coeffs=None):
        if order < 0:
            raise InputError("series order must be non-negative")
        self.chart = chart
        self.order = order
        self.base_point = tuple(to_rational(v) for v in base_point)
        if len(self.base_point) != chart.dim:
            raise ChartMismatch("base point length does not match chart")
        clean = {}
        for e, c in (coeffs or {}).items():
            e = tuple(e)
            c = to_rational(c)
            if c and sum(e) <= order:
                clean[e] = c
        self.coeffs = clean

    @classmethod
    def _raw(cls, like: "TruncatedSeries", coeffs: dict, order: int | None = None) -> "TruncatedSeries":
        s = object.__new__(cls)
        s.chart = like.chart
        s.order = like.order if order is None else order
        s.base_point = like.base_point
        s.coeffs = coeffs
        return s

    @classmethod
    def zero(cls, chart: Chart, order: int, base_point: Sequence) -> "TruncatedSeries":
        return cls(chart, order, base_point)

    @classmethod
    def constant(cls, chart: Chart, order: int, base_point: Sequence, value) -> "TruncatedSeries":
        return cls(chart, order, base_point, {chart.zero_exponent(): value})

    @classmethod
    def shifted_var(cls, chart: Chart, order: int, base_point: Sequence, i: int) -> "TruncatedSeries":
        """The coordinate ``x_i`` itself, i.e. ``b_i + t_i``."""
        coeffs = {chart.zero_exponent(): base_point[i]}
        if order >= 1:
            coeffs[chart.unit_exponent(i)] = 1
        return cls(chart, order, base_point, coeffs)

    @classmethod
    def univariate(cls, chart: Chart, order: int, base_point: Sequence, var: int, coeffs: Sequence) -> "TruncatedSeries":
        """Series in the single shifted variable ``t_var`` with ``coeffs[k]`` at ``t_var^k``."""
        data = {}
        for k, c in enumerate(coeffs):
            e = [0] * chart.dim
            e[var] = k
            data[tuple(e)] = c
        return cls(chart, order, base_point, data)

    # --- structure ------------------------------------------------------------

    def _check(self, other: "TruncatedSeries") -> None:
        if self.chart != other.chart or self.base_point != other.base_point:
            raise ChartMismatch("series live on different charts or base points")

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, _NUMBER_TYPES):
            return TruncatedSeries.constant(self.chart, self.order, self.base_point, other)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, exponent: Exponent) -> mpq:
        return self.coeffs.get(tuple(exponent), mpq(0))

    def constant_term(self) -> mpq:
        return self.coefficient(self.chart.zero_exponent())

    def truncate(self, order: int) -> "TruncatedSeries":
        order = min(order, self.order)
        return TruncatedSeries._raw(self, {e: c for e, c in self.coeffs.items() if sum(e) <= order}, order)

    def homogeneous_part(self, degree: int) -> dict[Exponent, mpq]:
        return {e: c for e, c in self.coeffs.items() if sum(e) == degree}

    def vanishes_through(self, degree: int) -> bool:
        return all(sum(e) > degree for e in self.coeffs)

    def lowest_degree(self) -> int | None:
        return min((sum(e) for e in self.coeffs), default=None)

    def restrict_zero(self, indices) -> "TruncatedSeries":
        """Set the shifted variables with the given indices to zero."""
        idx = list(indices)
        return TruncatedSeries._raw(self, {e: c for e, c in self.coeffs.items() if all(e[i] == 0 for i in idx)})

    def slice_power(self, var: int, power: int) -> "TruncatedSeries":
        """Coefficient of ``t_var^power`` as a series (with ``t_var`` removed)."""
        out = {}
        for e, c in self.coeffs.items():
            if e[var] == power:
                out[e[:var] + (0,) + e[var + 1:]] = c
        return TruncatedSeries._raw(self, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.order == other.order
            and self.base_point == other.base_point
            and self.coeffs == other.coeffs
        )

    # --- arithmetic -----------------------------------------------------------

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._raw(self, {e: -c for e, c in self.coeffs.items()})

    def __add__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        out = {e: c for e, c in self.coeffs.items() if sum(e) <= order}
        for e, c in other.coeffs.items():
            if sum(e) > order:
                continue
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return TruncatedSeries._raw(self, out, order)

    __radd__ = __add__

    def __sub__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "TruncatedSeries":
        return (-self) + other

    def scale(self, c) -> "TruncatedSeries":
        c = to_rational(c)
        if not c:
            return TruncatedSeries._raw(self, {})
        return TruncatedSeries._raw(self, {e: v * c for e, v in self.coeffs.items()})

    def __mul__(self, other) -> "TruncatedSeries":
        if isinstance(other, _NUMBER_TYPES):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check(other)
        order = min(self.order, other.order)
        a = [(e, sum(e), c) for e, c in self.coeffs.items() if sum(e) <= order]
        b = [(e, sum(e), c) for e, c in other.coeffs.items() if sum(e) <= order]
        out: dict[Exponent, mpq] = {}
        for e1, d1, c1 in a:
            room = order - d1
            for e2, d2, c2 in b:
                if d2 > room:
                    continue
                e = tuple(x + y for x, y in zip(e1, e2))
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return TruncatedSeries._raw(self, {e: c for e, c in out.items() if c}, order)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return self.inverse() ** (-k)
        result = TruncatedSeries.constant(self.chart, self.order, self.base_point, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self) -> "TruncatedSeries":
        c0 = self.constant_term()
        if not c0:
            raise EvaluationError("series with zero constant term is not invertible")
        # 1/(c0 (1 + r)) = (1/c0) * sum (-r)^j, r has no constant term
        r = self.scale(1 / c0) - 1
        result = TruncatedSeries.constant(self.chart, self.order, self.base_point, 1)
        power = result
        for _ in range(self.order):
            power = power * (-r)
            if power.is_zero():
                break
            result = result + power
        return result.scale(1 / c0)

    def __truediv__(self, other) -> "TruncatedSeries":
        if isinstance(other, _NUMBER_TYPES):
            return self.scale(1 / to_rational(other))
        return self * other.inverse()

    def partial(self, i: int) -> "TruncatedSeries":
        """Derivative in ``x_i``; the result is exact only through ``order - 1``."""
        out = {}
        for e, c in self.coeffs.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return TruncatedSeries._raw(self, out, max(self.order - 1, 0))

    def integrate(self, i: int) -> "TruncatedSeries":
        """Antiderivative in ``x_i`` vanishing on ``x_i = b_i``."""
        out = {}
        for e, c in self.coeffs.items():
            if sum(e) + 1 <= self.order:
                k = e[i]
                out[e[:i] + (k + 1,) + e[i + 1:]] = c / (k + 1)
        return TruncatedSeries._raw(self, out)

    def with_order(self, order: int) -> "TruncatedSeries":
        """Reinterpret with a different bound (dropping or keeping terms, never inventing them)."""
        return TruncatedSeries._raw(self, {e: c for e, c in self.coeffs.items() if sum(e) <= order}, order)

    # --- conversion -----------------------------------------------------------

    def to_scalar(self) -> ScalarField:
        """The truncated polynomial rewritten in the original (unshifted) coordinates."""
        chart = self.chart
        one = Poly.constant(chart, 1)
        shifted = [Poly.var(chart, name) - b for name, b in zip(chart.names, self.base_point)]
        p = Poly(chart, self.coeffs).compose(shifted, one)
        return ScalarField.poly(p)

    def __str__(self) -> str:
        names = [f"({n}-{b})" if b else n for n, b in zip(self.chart.names, self.base_point)]
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for e, c in sorted(self.coeffs.items(), key=lambda t: grlex_key(t[0])):
                mono = "*".join(nm if k == 1 else f"{nm}^{k}" for nm, k in zip(names, e) if k)
                if not mono:
                    parts.append(str(c))
                elif c in (1, -1):
                    parts.append(mono if c == 1 else f"-{mono}")
                else:
                    parts.append(f"{c}*{mono}")
            body = " + ".join(parts)
        return f"{body} + O({self.order + 1})"

    def __repr__(self) -> str:
        return f"TruncatedSeries({self})"

    def to_json(self) -> dict:
        return {
            "chart": list(self.chart.names),
            "order": self.order,
            "base_point": [rational_str(b) for b in self.base_point],
            "coeffs": [
                [rational_str(c), list(e)]
                for e, c in sorted(self.coeffs.items(), key=lambda t: grlex_key(t[0]))
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TruncatedSeries":
        try:
            chart = Chart(data["chart"])
            return cls(
                chart,
                int(data["order"]),
                [to_rational(b) for b in data["base_point"]],
                {tuple(e): to_rational(c) for c, e in data["coeffs"]},
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed series JSON: {exc}") from exc


def _shift_poly(p: Poly, base_point: Sequence[mpq], order: int) -> dict[Exponent, mpq]:
    """Coefficients of ``p(b + t)`` in ``t`` up to total degree ``order``."""
    n = p.chart.dim
    out: dict[Exponent, mpq] = {}
    for e, c in p.terms.items():
        # expand prod (b_i + t_i)^{e_i}
        partial = {(0,) * n: c}
        for i, k in enumerate(e):
            if not k:
                continue
            b = base_point[i]
            nxt = {}
            for f, v in partial.items():
                for j in range(k + 1):
                    if sum(f) + j > order:
                        break
                    w = comb(k, j) * (b ** (k - j) if k - j else 1)
                    if not w:
                        continue
                    g = f[:i] + (j,) + f[i + 1:]
                    nxt[g] = nxt.get(g, 0) + v * w
            partial = nxt
        for f, v in partial.items():
            if v:
                out[f] = out.get(f, 0) + v
    return {e: c for e, c in out.items() if c}


def series_from_scalar(f: ScalarField, base_point: Sequence, order: int) -> TruncatedSeries:
    """Exact Taylor expansion of ``f`` at ``base_point`` through total degree ``order``."""
    bp = tuple(to_rational(v) for v in base_point)
    if len(bp) != f.chart.dim:
        raise ChartMismatch("base point length does not match chart")
    if not f.den.evaluate(bp):
        raise EvaluationError(f"denominator {f.den} vanishes at the base point")
    num = TruncatedSeries(f.chart, order, bp, _shift_poly(f.num, bp, order))
    if f.den.is_one():
        return num
    den = TruncatedSeries(f.chart, order, bp, _shift_poly(f.den, bp, order))
    return num * den.inverse()
