"""Fields of endomorphisms ``A^i_j`` (row = upper index) in a fixed chart."""

from __future__ import annotations

from typing import Sequence

from nijkit.errors import ChartMismatch, InputError
from nijkit.symkernel import linalg
from nijkit.symkernel.field import ScalarField, as_field
from nijkit.symkernel.poly import Chart, require_point


class OperatorField:
    __slots__ = ("chart", "entries")

    def __init__(self, entries: Sequence[Sequence], chart: Chart):
        rows = [[as_field(x, chart) for x in row] for row in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise InputError("operator matrix must be square")
        self.chart = chart
        self.entries = tuple(tuple(r) for r in rows)

    @classmethod
    def _raw(cls, entries, chart: Chart) -> "OperatorField":
        op = object.__new__(cls)
        op.chart = chart
        op.entries = tuple(tuple(r) for r in entries)
        return op

    @classmethod
    def identity(cls, chart: Chart, dim: int | None = None) -> "OperatorField":
        n = chart.dim if dim is None else dim
        one, zero = ScalarField.one(chart), ScalarField.zero(chart)
        return cls._raw([[one if i == j else zero for j in range(n)] for i in range(n)], chart)

    @classmethod
    def zeros(cls, chart: Chart, dim: int | None = None) -> "OperatorField":
        n = chart.dim if dim is None else dim
        zero = ScalarField.zero(chart)
        return cls._raw([[zero] * n for _ in range(n)], chart)

    @classmethod
    def diag(cls, values: Sequence, chart: Chart) -> "OperatorField":
        vals = [as_field(v, chart) for v in values]
        zero = ScalarField.zero(chart)
        return cls._raw([[vals[i] if i == j else zero for j in range(len(vals))] for i in range(len(vals))], chart)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence["OperatorField | Sequence[Sequence]"]], chart: Chart) -> "OperatorField":
        rows = []
        for block_row in blocks:
            mats = [b.entries if isinstance(b, OperatorField) else b for b in block_row]
            for r in range(len(mats[0])):
                rows.append([x for m in mats for x in m[r]])
        return cls(rows, chart)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self) -> list[list[ScalarField]]:
        return [list(r) for r in self.entries]

    def block(self, r0: int, r1: int, c0: int, c1: int) -> list[list[ScalarField]]:
        return [list(row[c0:c1]) for row in self.entries[r0:r1]]

    def _check(self, other: "OperatorField") -> None:
        if self.chart != other.chart or self.dim != other.dim:
            raise ChartMismatch("operators on different charts or dimensions")

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorField):
            return NotImplemented
        return self.chart == other.chart and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.chart, self.entries))

    def __add__(self, other: "OperatorField") -> "OperatorField":
        self._check(other)
        return OperatorField._raw(linalg.mat_add(self.entries, other.entries), self.chart)

    def __sub__(self, other: "OperatorField") -> "OperatorField":
        self._check(other)
        return OperatorField._raw(linalg.mat_sub(self.entries, other.entries), self.chart)

    def __neg__(self) -> "OperatorField":
        return OperatorField._raw([[-x for x in r] for r in self.entries], self.chart)

    def scale(self, c) -> "OperatorField":
        c = as_field(c, self.chart)
        return OperatorField._raw([[x * c for x in r] for r in self.entries], self.chart)

    def __matmul__(self, other: "OperatorField") -> "OperatorField":
        self._check(other)
        return OperatorField._raw(linalg.mat_mul(self.entries, other.entries), self.chart)

    def power(self, k: int) -> "OperatorField":
        result = OperatorField.identity(self.chart, self.dim)
        for _ in range(k):
            result = result @ self
        return result

    def transpose(self) -> "OperatorField":
        return OperatorField._raw(linalg.transpose(self.entries), self.chart)

    def trace(self) -> ScalarField:
        total = ScalarField.zero(self.chart)
        for i in range(self.dim):
            total = total + self.entries[i][i]
        return total

    def apply(self, vector: Sequence[ScalarField]) -> list[ScalarField]:
        """``(A v)^i = A^i_j v^j``."""
        out = []
        for row in self.entries:
            acc = ScalarField.zero(self.chart)
            for a, v in zip(row, vector):
                if not a.is_zero() and not v.is_zero():
                    acc = acc + a * v
            out.append(acc)
        return out

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.entries for x in r)

    def at(self, point: Sequence) -> list[list]:
        pt = require_point(self.chart, point)
        return [[x.evaluate(pt) for x in r] for r in self.entries]

    def map(self, fn) -> "OperatorField":
        return OperatorField._raw([[fn(x) for x in r] for r in self.entries], self.chart)

    def rename_into(self, chart: Chart) -> "OperatorField":
        return OperatorField._raw([[x.rename_into(chart) for x in r] for r in self.entries], chart)

    def __str__(self) -> str:
        width = max((len(str(x)) for r in self.entries for x in r), default=1)
        return "\n".join("[ " + "  ".join(str(x).rjust(width) for x in r) + " ]" for r in self.entries)

    def __repr__(self) -> str:
        return f"OperatorField(dim={self.dim}, chart={self.chart!r})"

    def to_json(self) -> dict:
        return {"chart": list(self.chart.names), "matrix": [[str(x) for x in r] for r in self.entries]}

    @classmethod
    def from_json(cls, data, chart: Chart | None = None) -> "OperatorField":
        if isinstance(data, list):
            if chart is None:
                raise InputError("a bare matrix needs a chart")
            return cls(data, chart)
        try:
            own = Chart(data["chart"]) if "chart" in data else chart
            if own is None:
                raise InputError("operator JSON lacks a chart")
            return cls(data["matrix"], own)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed operator JSON: {exc}") from exc


def jacobian(functions: Sequence[ScalarField], chart: Chart) -> list[list[ScalarField]]:
    """``J[a][b] = d f_a / d chart_b``."""
    return [[f.partial(b) for b in range(chart.dim)] for f in functions]


def change_coordinates(op: OperatorField, old_of_new: Sequence[ScalarField], new_chart: Chart) -> OperatorField:
    """Express ``op`` in new coordinates, given the old coordinates as functions of the new ones.

    With ``K = d(old)/d(new)`` the new matrix is ``K^-1 A(old(new)) K``.
    """
    images = [as_field(f, new_chart) for f in old_of_new]
    if len(images) != op.chart.dim:
        raise ChartMismatch("need one image per old coordinate")
    moved = [[x.compose(images, new_chart) for x in r] for r in op.entries]
    k = jacobian(images, new_chart)
    return OperatorField._raw(linalg.solve(k, linalg.mat_mul(moved, k)), new_chart)
