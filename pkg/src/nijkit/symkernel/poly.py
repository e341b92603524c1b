"""Charts and sparse multivariate polynomials over exact rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from nijkit.errors import ChartMismatch, EvaluationError, InputError

Exponent = tuple[int, ...]
Rational = mpq

_NUMBER_TYPES = (int, Fraction, type(mpq(0)))


def to_rational(value) -> mpq:
    """Convert an int, Fraction, mpq or ``"p/q"`` string to ``mpq``."""
    if isinstance(value, str):
        text = value.strip()
        try:
            return mpq(text)
        except ValueError as exc:
            raise InputError(f"not an exact rational: {value!r}") from exc
    if isinstance(value, bool):
        return mpq(int(value))
    if isinstance(value, _NUMBER_TYPES):
        return mpq(value)
    raise InputError(f"not an exact rational: {value!r}")


def rational_str(value: mpq) -> str:
    return str(value)


@dataclass(frozen=True)
class Coord:
    name: str
    index: int


class Chart:
    """An ordered tuple of distinct coordinate names."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise InputError(f"duplicate coordinate names in chart {names}")
        for name in names:
            if not name.isidentifier():
                raise InputError(f"invalid coordinate name {name!r}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    @classmethod
    def of(cls, *names: str) -> "Chart":
        return cls(names)

    @property
    def dim(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Chart) and self.names == other.names

    def __hash__(self) -> int:
        return hash(("Chart", self.names))

    def __repr__(self) -> str:
        return f"Chart({', '.join(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ChartMismatch(f"{name!r} is not a coordinate of {self!r}") from None

    def coord(self, name: str) -> Coord:
        return Coord(name, self.index(name))

    @property
    def coords(self) -> list[Coord]:
        return [Coord(n, i) for i, n in enumerate(self.names)]

    def extend(self, names: Iterable[str]) -> "Chart":
        return Chart(self.names + tuple(names))

    def zero_exponent(self) -> Exponent:
        return (0,) * len(self.names)

    def unit_exponent(self, i: int) -> Exponent:
        e = [0] * len(self.names)
        e[i] = 1
        return tuple(e)


def grlex_key(e: Exponent):
    return (sum(e), e)


class Poly:
    """Sparse polynomial: exponent tuple -> nonzero ``mpq`` coefficient."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Exponent, object] | None = None):
        self.chart = chart
        clean: dict[Exponent, mpq] = {}
        n = chart.dim
        if terms:
            for e, c in terms.items():
                e = tuple(int(k) for k in e)
                if len(e) != n or any(k < 0 for k in e):
                    raise InputError(f"bad exponent vector {e} for {chart!r}")
                c = to_rational(c)
                if c:
                    clean[e] = clean.get(e, mpq(0)) + c
                    if not clean[e]:
                        del clean[e]
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, chart: Chart, terms: dict) -> "Poly":
        p = object.__new__(cls)
        p.chart = chart
        p.terms = terms
        p._hash = None
        return p

    # --- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> "Poly":
        return cls._raw(chart, {})

    @classmethod
    def constant(cls, chart: Chart, value) -> "Poly":
        value = to_rational(value)
        return cls._raw(chart, {chart.zero_exponent(): value} if value else {})

    @classmethod
    def var(cls, chart: Chart, name: str) -> "Poly":
        return cls._raw(chart, {chart.unit_exponent(chart.index(name)): mpq(1)})

    @classmethod
    def monomial(cls, chart: Chart, exponent: Exponent, coeff=1) -> "Poly":
        return cls(chart, {tuple(exponent): coeff})

    # --- predicates -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        if not self.terms:
            return True
        return len(self.terms) == 1 and self.chart.zero_exponent() in self.terms

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get(self.chart.zero_exponent()) == 1

    def constant_value(self) -> mpq:
        return self.terms.get(self.chart.zero_exponent(), mpq(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def support(self) -> set[int]:
        """Indices of coordinates that actually occur."""
        used = set()
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used.add(i)
        return used

    def leading(self) -> tuple[Exponent, mpq]:
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    # --- comparison -----------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.chart == other.chart and self.terms == other.terms
        if isinstance(other, _NUMBER_TYPES):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    def _check(self, other: "Poly") -> None:
        if self.chart != other.chart:
            raise ChartMismatch(f"{self.chart!r} vs {other.chart!r}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, _NUMBER_TYPES):
            return Poly.constant(self.chart, other)
        return NotImplemented

    # --- arithmetic -----------------------------------------------------

    def __neg__(self) -> "Poly":
        return Poly._raw(self.chart, {e: -c for e, c in self.terms.items()})

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(self.chart, out)

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = to_rational(c)
        if not c:
            return Poly.zero(self.chart)
        return Poly._raw(self.chart, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other) -> "Poly":
        if isinstance(other, _NUMBER_TYPES):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.chart)
        if len(other.terms) == 1:
            (f, d), = other.terms.items()
            return Poly._raw(self.chart, {tuple(a + b for a, b in zip(e, f)): c * d for e, c in self.terms.items()})
        if len(self.terms) == 1:
            return other * self
        out: dict[Exponent, mpq] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return Poly._raw(self.chart, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise InputError("polynomial powers must be non-negative integers")
        result = Poly.constant(self.chart, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exact_div(self, other: "Poly") -> "Poly | None":
        """Quotient if ``other`` divides ``self`` exactly, otherwise ``None``."""
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if other.is_constant():
            return self.scale(1 / other.constant_value())
        lt_e, lt_c = other.leading()
        rem = dict(self.terms)
        quot: dict[Exponent, mpq] = {}
        other_items = list(other.terms.items())
        while rem:
            e = max(rem, key=grlex_key)
            c = rem[e]
            diff = tuple(a - b for a, b in zip(e, lt_e))
            if any(k < 0 for k in diff):
                return None
            q = c / lt_c
            quot[diff] = q
            for f, d in other_items:
                g = tuple(a + b for a, b in zip(f, diff))
                v = rem.get(g, mpq(0)) - q * d
                if v:
                    rem[g] = v
                else:
                    rem.pop(g, None)
        return Poly._raw(self.chart, quot)

    # --- calculus and evaluation ---------------------------------------

    def partial(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Poly._raw(self.chart, out)

    def evaluate(self, point: Sequence) -> mpq:
        pt = [to_rational(v) for v in point]
        if len(pt) != self.chart.dim:
            raise ChartMismatch(f"point of length {len(pt)} for {self.chart!r}")
        total = mpq(0)
        for e, c in self.terms.items():
            term = c
            for v, k in zip(pt, e):
                if k:
                    term *= v ** k
            total += term
        return total

    def compose(self, images: Sequence, one):
        """Substitute ``images[i]`` for coordinate ``i``; ``one`` is the target ring's unit.

        Works for any ring whose elements support ``+``, ``*`` and ``**``.
        """
        if len(images) != self.chart.dim:
            raise ChartMismatch("wrong number of substitution images")
        powers: list[dict[int, object]] = [dict() for _ in images]

        def power(i, k):
            cache = powers[i]
            if k not in cache:
                cache[k] = images[i] ** k
            return cache[k]

        total = one * 0
        for e, c in sorted(self.terms.items(), key=lambda t: grlex_key(t[0])):
            term = one * c
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            total = total + term
        return total

    def rename_into(self, target: Chart) -> "Poly":
        """Re-express on a chart containing every coordinate this polynomial uses."""
        if target == self.chart:
            return self
        used = self.support()
        mapping = {i: target.index(self.chart.names[i]) for i in used}
        n = target.dim
        out = {}
        for e, c in self.terms.items():
            f = [0] * n
            for i in used:
                f[mapping[i]] = e[i]
            out[tuple(f)] = c
        return Poly._raw(target, out)

    def coefficient(self, exponent: Exponent) -> mpq:
        return self.terms.get(tuple(exponent), mpq(0))

    # --- printing -------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Exponent, mpq]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                name if k == 1 else f"{name}^{k}" for name, k in zip(self.chart.names, e) if k
            )
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if not pieces:
                pieces.append(("-" if neg else "") + body)
            else:
                pieces.append((" - " if neg else " + ") + body)
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"Poly({self})"


@lru_cache(maxsize=64)
def _sympy_ring(n: int):
    from sympy.polys.domains import QQ
    from sympy.polys.orderings import grlex
    from sympy.polys.rings import ring

    names = ",".join(f"v{i}" for i in range(n)) if n > 1 else "v0"
    R = ring(names, QQ, grlex)[0]
    return R


def poly_cofactors(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """Return ``(g, a/g, b/g)`` with ``g`` a gcd of ``a`` and ``b``."""
    a._check(b)
    chart = a.chart
    if chart.dim == 0:
        return Poly.constant(chart, 1), a, b
    R = _sympy_ring(chart.dim)
    ra = R.from_dict(dict(a.terms)) if a.terms else R.zero
    rb = R.from_dict(dict(b.terms)) if b.terms else R.zero
    g, ca, cb = ra.cofactors(rb)

    def back(p):
        return Poly._raw(chart, {tuple(e): mpq(c) for e, c in p.items() if c})

    return back(g), back(ca), back(cb)


def require_point(chart: Chart, point: Sequence) -> tuple[mpq, ...]:
    pt = tuple(to_rational(v) for v in point)
    if len(pt) != chart.dim:
        raise ChartMismatch(f"point {point} has length {len(pt)}, chart {chart!r} has {chart.dim}")
    return pt


__all__ = [
    "Chart",
    "Coord",
    "EvaluationError",
    "Poly",
    "poly_cofactors",
    "rational_str",
    "require_point",
    "to_rational",
]
