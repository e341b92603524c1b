"""Rational functions in named coordinates, kept in canonical reduced form."""

from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import ChartMismatch, DivisionByZero, EvaluationError, InputError
from nijkit.symkernel.poly import (
    _NUMBER_TYPES,
    Chart,
    Poly,
    poly_cofactors,
    rational_str,
    to_rational,
)


class ScalarField:
    """``num/den`` with gcd(num, den) = 1 and the grlex-leading coefficient of ``den`` equal to 1.

    Canonical form makes ``==`` structural.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.constant(num.chart, 1)
        if num.chart != den.chart:
            raise ChartMismatch("numerator and denominator on different charts")
        if den.is_zero():
            raise DivisionByZero("denominator is the zero polynomial")
        num, den = _canonical(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _raw(cls, num: Poly, den: Poly) -> "ScalarField":
        f = object.__new__(cls)
        f.num = num
        f.den = den
        f._hash = None
        return f

    @classmethod
    def poly(cls, p: Poly) -> "ScalarField":
        return cls._raw(p, Poly.constant(p.chart, 1))

    @classmethod
    def constant(cls, chart: Chart, value) -> "ScalarField":
        return cls.poly(Poly.constant(chart, value))

    @classmethod
    def zero(cls, chart: Chart) -> "ScalarField":
        return cls.constant(chart, 0)

    @classmethod
    def one(cls, chart: Chart) -> "ScalarField":
        return cls.constant(chart, 1)

    @classmethod
    def var(cls, chart: Chart, name: str) -> "ScalarField":
        return cls.poly(Poly.var(chart, name))

    @property
    def chart(self) -> Chart:
        return self.num.chart

    # --- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num.terms

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_one()

    def constant_value(self) -> mpq:
        if not self.is_constant():
            raise InputError(f"{self} is not constant")
        return self.num.constant_value()

    def support(self) -> set[int]:
        return self.num.support() | self.den.support()

    def depends_on(self, name: str) -> bool:
        return self.chart.index(name) in self.support()

    def free_names(self) -> list[str]:
        used = self.support()
        return [n for i, n in enumerate(self.chart.names) if i in used]

    # --- comparison ------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, ScalarField):
            return self.chart == other.chart and self.num == other.num and self.den == other.den
        if isinstance(other, _NUMBER_TYPES):
            return self.is_constant() and self.num.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self) -> bool:
        return not self.is_zero()

    def _coerce(self, other) -> "ScalarField":
        if isinstance(other, ScalarField):
            if other.chart != self.chart:
                raise ChartMismatch(f"{self.chart!r} vs {other.chart!r}")
            return other
        if isinstance(other, _NUMBER_TYPES):
            return ScalarField.constant(self.chart, other)
        if isinstance(other, Poly):
            return ScalarField.poly(other)
        return NotImplemented

    # --- arithmetic ------------------------------------------------------

    def __neg__(self) -> "ScalarField":
        return ScalarField._raw(-self.num, self.den)

    def __add__(self, other) -> "ScalarField":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            if self.den.is_one():
                return ScalarField._raw(self.num + other.num, self.den)
            return ScalarField(self.num + other.num, self.den)
        if other.den.is_one():
            return ScalarField._raw(self.num + other.num * self.den, self.den)
        if self.den.is_one():
            return ScalarField._raw(self.num * other.den + other.num, other.den)
        return ScalarField(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "ScalarField":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "ScalarField":
        return (-self) + other

    def __mul__(self, other) -> "ScalarField":
        if isinstance(other, _NUMBER_TYPES):
            c = to_rational(other)
            if not c:
                return ScalarField.zero(self.chart)
            return ScalarField._raw(self.num.scale(c), self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return ScalarField.zero(self.chart)
        if self.den.is_one() and other.den.is_one():
            return ScalarField._raw(self.num * other.num, self.den)
        return ScalarField(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScalarField":
        if isinstance(other, _NUMBER_TYPES):
            c = to_rational(other)
            if not c:
                raise DivisionByZero("division by zero constant")
            return ScalarField._raw(self.num.scale(1 / c), self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise DivisionByZero("division by the zero rational function")
        if other.is_constant():
            return ScalarField._raw(self.num.scale(1 / other.num.constant_value()), self.den)
        if self.den.is_one() and other.den.is_one():
            q = self.num.exact_div(other.num)
            if q is not None:
                return ScalarField._raw(q, self.den)
        return ScalarField(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "ScalarField":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int) -> "ScalarField":
        if not isinstance(k, int):
            raise InputError("exponent must be an integer")
        if k < 0:
            return ScalarField.one(self.chart) / (self ** (-k))
        return ScalarField._raw(self.num ** k, self.den ** k)

    # --- calculus --------------------------------------------------------

    def partial(self, name_or_index) -> "ScalarField":
        i = name_or_index if isinstance(name_or_index, int) else self.chart.index(name_or_index)
        if self.den.is_one():
            return ScalarField._raw(self.num.partial(i), self.den)
        num = self.num.partial(i) * self.den - self.num * self.den.partial(i)
        return ScalarField(num, self.den * self.den)

    def evaluate(self, point: Sequence) -> mpq:
        d = self.den.evaluate(point)
        if not d:
            raise EvaluationError(f"denominator {self.den} vanishes at {tuple(map(str, point))}")
        return self.num.evaluate(point) / d

    def compose(self, images: Sequence["ScalarField"], target: Chart) -> "ScalarField":
        """Substitute ``images[i]`` (fields on ``target``) for coordinate ``i``."""
        one = ScalarField.one(target)
        if all(isinstance(im, ScalarField) and im.den.is_one() for im in images):
            polys = [im.num for im in images]
            num = self.num.compose(polys, Poly.constant(target, 1))
            den = self.den.compose(polys, Poly.constant(target, 1))
            if den.is_one():
                return ScalarField._raw(num, den)
            return ScalarField(num, den)
        return self.num.compose(images, one) / self.den.compose(images, one)

    def substitute(self, mapping: dict, target: Chart | None = None) -> "ScalarField":
        """Replace the named coordinates by fields; others map to themselves on ``target``."""
        target = target or self.chart
        images = []
        for name in self.chart.names:
            if name in mapping:
                v = mapping[name]
                images.append(v if isinstance(v, ScalarField) else ScalarField.constant(target, v))
            elif name in target:
                images.append(ScalarField.var(target, name))
            elif self.chart.index(name) in self.support():
                raise ChartMismatch(f"no image for coordinate {name!r}")
            else:
                images.append(ScalarField.zero(target))
        return self.compose(images, target)

    def rename_into(self, target: Chart) -> "ScalarField":
        if target == self.chart:
            return self
        return ScalarField._raw(self.num.rename_into(target), self.den.rename_into(target))

    # --- printing / serialization -----------------------------------------

    def __str__(self) -> str:
        if self.den.is_one():
            return str(self.num)
        num = str(self.num)
        if len(self.num.terms) > 1:
            num = f"({num})"
        return f"{num}/({self.den})"

    def __repr__(self) -> str:
        return f"ScalarField({self})"

    def to_json(self) -> dict:
        def terms(p: Poly):
            return [[rational_str(c), list(e)] for e, c in p.sorted_terms()]

        return {"chart": list(self.chart.names), "num": terms(self.num), "den": terms(self.den)}

    @classmethod
    def from_json(cls, data: dict, chart: Chart | None = None) -> "ScalarField":
        try:
            own = Chart(data["chart"])
            num = Poly(own, {tuple(e): to_rational(c) for c, e in data["num"]})
            den_terms = data.get("den") or [["1", [0] * own.dim]]
            den = Poly(own, {tuple(e): to_rational(c) for c, e in den_terms})
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed scalar JSON: {exc}") from exc
        f = cls(num, den)
        return f.rename_into(chart) if chart is not None else f


def _canonical(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    chart = num.chart
    if num.is_zero():
        return num, Poly.constant(chart, 1)
    if den.is_constant():
        c = den.constant_value()
        if c == 1:
            return num, den
        return num.scale(1 / c), Poly.constant(chart, 1)
    if num.is_constant():
        g_num, g_den = num, den
    else:
        q = num.exact_div(den)
        if q is not None:
            return q, Poly.constant(chart, 1)
        _, g_num, g_den = poly_cofactors(num, den)
    lc = g_den.leading()[1]
    if lc != 1:
        g_num = g_num.scale(1 / lc)
        g_den = g_den.scale(1 / lc)
    return g_num, g_den


def as_field(value, chart: Chart) -> ScalarField:
    if isinstance(value, ScalarField):
        if value.chart != chart:
            return value.rename_into(chart)
        return value
    if isinstance(value, Poly):
        return ScalarField.poly(value.rename_into(chart))
    if isinstance(value, str):
        from nijkit.symkernel.parser import parse_scalar

        return parse_scalar(value, chart)
    return ScalarField.constant(chart, value)
