"""Differential forms of degree 0..3 with rational-function coefficients.

A ``k``-form stores its components on strictly increasing index tuples:
``alpha = sum_{I increasing} alpha_I dx_I`` with ``alpha(e_I) = alpha_I``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Mapping, Sequence

from nijkit.errors import ChartMismatch, DegreeOverflow, InputError
from nijkit.exterior.operators import OperatorField, jacobian
from nijkit.symkernel import linalg
from nijkit.symkernel.field import ScalarField, as_field
from nijkit.symkernel.poly import Chart

MAX_DEGREE = 3


def _sort_with_sign(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation (0 on a repeated index) and the sorted tuple."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, tuple(sorted(idx))
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class KForm:
    __slots__ = ("degree", "chart", "comps")

    def __init__(self, degree: int, chart: Chart, comps: Mapping[Sequence[int], object] | None = None):
        if not 0 <= degree <= MAX_DEGREE:
            raise DegreeOverflow(f"forms of degree {degree} are not supported (max {MAX_DEGREE})")
        self.degree = degree
        self.chart = chart
        clean: dict[tuple[int, ...], ScalarField] = {}
        for idx, value in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(not 0 <= i < chart.dim for i in idx):
                raise InputError(f"bad index tuple {idx} for a {degree}-form on {chart!r}")
            sign, key = _sort_with_sign(idx)
            value = as_field(value, chart)
            if sign == 0 or value.is_zero():
                continue
            acc = clean.get(key)
            acc = value * sign if acc is None else acc + value * sign
            if acc.is_zero():
                clean.pop(key, None)
            else:
                clean[key] = acc
        self.comps = clean

    @classmethod
    def _raw(cls, degree: int, chart: Chart, comps: dict) -> "KForm":
        f = object.__new__(cls)
        f.degree = degree
        f.chart = chart
        f.comps = {k: v for k, v in comps.items() if not v.is_zero()}
        return f

    # --- constructors ---------------------------------------------------------

    @classmethod
    def function(cls, f) -> "KForm":
        f = f if isinstance(f, ScalarField) else None
        if f is None:
            raise InputError("function() needs a ScalarField")
        return cls._raw(0, f.chart, {(): f})

    @classmethod
    def zero(cls, degree: int, chart: Chart) -> "KForm":
        return cls._raw(degree, chart, {})

    @classmethod
    def coordinate_differential(cls, chart: Chart, name: str) -> "KForm":
        return cls._raw(1, chart, {(chart.index(name),): ScalarField.one(chart)})

    @classmethod
    def one_form(cls, coeffs: Sequence, chart: Chart) -> "KForm":
        return cls(1, chart, {(i,): c for i, c in enumerate(coeffs)})

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence], chart: Chart) -> "KForm":
        """2-form whose values on coordinate pairs are the upper triangle of ``matrix``."""
        n = len(matrix)
        return cls(2, chart, {(i, j): matrix[i][j] for i in range(n) for j in range(i + 1, n)})

    # --- access -----------------------------------------------------------------

    def component(self, indices: Sequence[int]) -> ScalarField:
        sign, key = _sort_with_sign(indices)
        if sign == 0:
            return ScalarField.zero(self.chart)
        v = self.comps.get(key)
        if v is None:
            return ScalarField.zero(self.chart)
        return v if sign > 0 else -v

    def scalar(self) -> ScalarField:
        if self.degree != 0:
            raise InputError("not a 0-form")
        return self.component(())

    def matrix(self) -> list[list[ScalarField]]:
        if self.degree != 2:
            raise InputError("matrix() is defined for 2-forms")
        n = self.chart.dim
        return [[self.component((i, j)) for j in range(n)] for i in range(n)]

    def coefficients(self) -> list[ScalarField]:
        if self.degree != 1:
            raise InputError("coefficients() is defined for 1-forms")
        return [self.component((i,)) for i in range(self.chart.dim)]

    def is_zero(self) -> bool:
        return not self.comps

    def nonzero_components(self) -> list[tuple[str, ScalarField]]:
        names = self.chart.names
        return [("d" + "^d".join(names[i] for i in idx) if idx else "1", v) for idx, v in sorted(self.comps.items())]

    def apply(self, *vectors: Sequence[ScalarField]) -> ScalarField:
        """Evaluate on vector fields given by their components."""
        if len(vectors) != self.degree:
            raise InputError(f"a {self.degree}-form takes {self.degree} arguments")
        total = ScalarField.zero(self.chart)
        for idx, c in self.comps.items():
            sub = [[v[i] for i in idx] for v in vectors]
            total = total + c * linalg.leibniz_det(sub)
        return total if self.degree else self.scalar()

    # --- arithmetic ---------------------------------------------------------------

    def _check(self, other: "KForm") -> None:
        if self.chart != other.chart:
            raise ChartMismatch("forms on different charts")
        if self.degree != other.degree:
            raise InputError("cannot add forms of different degrees")

    def __eq__(self, other) -> bool:
        if not isinstance(other, KForm):
            return NotImplemented
        return self.degree == other.degree and self.chart == other.chart and self.comps == other.comps

    def __hash__(self) -> int:
        return hash((self.degree, self.chart, frozenset(self.comps.items())))

    def __add__(self, other: "KForm") -> "KForm":
        self._check(other)
        out = dict(self.comps)
        for k, v in other.comps.items():
            out[k] = out[k] + v if k in out else v
        return KForm._raw(self.degree, self.chart, out)

    def __neg__(self) -> "KForm":
        return KForm._raw(self.degree, self.chart, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def scale(self, f) -> "KForm":
        f = as_field(f, self.chart)
        return KForm._raw(self.degree, self.chart, {k: v * f for k, v in self.comps.items()})

    def map(self, fn) -> "KForm":
        return KForm._raw(self.degree, self.chart, {k: fn(v) for k, v in self.comps.items()})

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for label, v in self.nonzero_components():
            text = str(v)
            if len(v.num.terms) > 1 or not v.den.is_one():
                text = f"({text})"
            if label == "1":
                parts.append(text)
            elif text in ("1", "-1"):
                parts.append(label if text == "1" else f"-{label}")
            else:
                parts.append(f"{text} {label}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"KForm({self.degree}: {self})"

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "chart": list(self.chart.names),
            "comps": {",".join(map(str, idx)): v.to_json() for idx, v in sorted(self.comps.items())},
        }

    @classmethod
    def from_json(cls, data: dict, chart: Chart | None = None) -> "KForm":
        try:
            own = Chart(data["chart"]) if "chart" in data else chart
            if own is None:
                raise InputError("form JSON lacks a chart")
            degree = int(data["degree"])
            comps = {}
            for key, value in data.get("comps", {}).items():
                idx = tuple(int(k) for k in key.split(",")) if key.strip() else ()
                comps[idx] = ScalarField.from_json(value, own) if isinstance(value, dict) else as_field(value, own)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed form JSON: {exc}") from exc
        return cls(degree, own, comps)


def _merge(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    return _sort_with_sign(a + b)


def wedge(a: KForm, b: KForm) -> KForm:
    if a.chart != b.chart:
        raise ChartMismatch("forms on different charts")
    degree = a.degree + b.degree
    if degree > MAX_DEGREE:
        raise DegreeOverflow(f"wedge would produce a {degree}-form (max {MAX_DEGREE})")
    out: dict[tuple[int, ...], ScalarField] = {}
    for ia, va in a.comps.items():
        for ib, vb in b.comps.items():
            sign, key = _merge(ia, ib)
            if not sign:
                continue
            term = va * vb
            if sign < 0:
                term = -term
            out[key] = out[key] + term if key in out else term
    return KForm._raw(degree, a.chart, out)


def d(a: KForm) -> KForm:
    """Exterior derivative."""
    if a.degree >= MAX_DEGREE:
        raise DegreeOverflow(f"d of a {a.degree}-form exceeds the supported degree")
    out: dict[tuple[int, ...], ScalarField] = {}
    for idx, v in a.comps.items():
        for i in v.support():
            sign, key = _sort_with_sign((i,) + idx)
            if not sign:
                continue
            term = v.partial(i)
            if term.is_zero():
                continue
            if sign < 0:
                term = -term
            out[key] = out[key] + term if key in out else term
    return KForm._raw(a.degree + 1, a.chart, out)


def pullback(A: OperatorField, a: KForm) -> KForm:
    """``(A^* alpha)_j = sum_i alpha_i A^i_j`` on 1-forms."""
    if a.degree != 1:
        raise InputError("pullback is defined on 1-forms only")
    if A.chart != a.chart:
        raise ChartMismatch("operator and form on different charts")
    n = A.dim
    out = {}
    for j in range(n):
        acc = ScalarField.zero(a.chart)
        for (i,), v in a.comps.items():
            e = A.entries[i][j]
            if not e.is_zero():
                acc = acc + v * e
        out[(j,)] = acc
    return KForm._raw(1, a.chart, out)


def i_A(A: OperatorField, a: KForm) -> KForm:
    """Insert ``A`` into each argument in turn and sum; zero on functions."""
    if A.chart != a.chart:
        raise ChartMismatch("operator and form on different charts")
    if a.degree == 0:
        return KForm.zero(0, a.chart)
    n = A.dim
    out = {}
    for idx in combinations(range(n), a.degree):
        acc = ScalarField.zero(a.chart)
        for slot, j in enumerate(idx):
            for i in range(n):
                e = A.entries[i][j]
                if e.is_zero():
                    continue
                replaced = idx[:slot] + (i,) + idx[slot + 1:]
                c = a.component(replaced)
                if not c.is_zero():
                    acc = acc + e * c
        out[idx] = acc
    return KForm._raw(a.degree, a.chart, out)


def d_A(A: OperatorField, a: KForm) -> KForm:
    """Nijenhuis differential ``[i_A, d] = i_A d - d i_A``."""
    if a.degree > 2:
        raise DegreeOverflow("d_A of a 3-form would be a 4-form")
    if a.degree == 0:
        return i_A(A, d(a))
    return i_A(A, d(a)) - d(i_A(A, a))


def two_form_pullback_matrix(A: OperatorField, omega: KForm) -> list[list[ScalarField]]:
    """Matrix of the bilinear form ``omega(A., .)``, skew or not."""
    return linalg.mat_mul(linalg.transpose(A.entries), omega.matrix())


def change_form_coordinates(form: KForm, old_of_new: Sequence[ScalarField], new_chart: Chart) -> KForm:
    """Pull a form back along the map new -> old given by ``old_of_new``."""
    images = [as_field(f, new_chart) for f in old_of_new]
    k = jacobian(images, new_chart)
    moved = {idx: v.compose(images, new_chart) for idx, v in form.comps.items()}
    if form.degree == 0:
        return KForm._raw(0, new_chart, {(): moved.get((), ScalarField.zero(new_chart))})
    out = {}
    m = new_chart.dim
    for new_idx in combinations(range(m), form.degree):
        acc = ScalarField.zero(new_chart)
        for old_idx, v in moved.items():
            sub = [[k[i][j] for j in new_idx] for i in old_idx]
            det = linalg.leibniz_det(sub)
            if not det.is_zero():
                acc = acc + v * det
        out[new_idx] = acc
    return KForm._raw(form.degree, new_chart, out)


def canonical_symplectic(chart: Chart, xs: Sequence[str], ps: Sequence[str]) -> KForm:
    """``sum_i dx_i ^ dp_i``."""
    return KForm(2, chart, {(chart.index(x), chart.index(p)): 1 for x, p in zip(xs, ps)})
