"""Exact computer-algebra kernel: polynomials, rational functions, series, parsing."""

from nijkit.symkernel.field import ScalarField, as_field
from nijkit.symkernel.parser import parse_scalar
from nijkit.symkernel.poly import Chart, Coord, Poly, to_rational
from nijkit.symkernel.series import TruncatedSeries, series_from_scalar
from nijkit.symkernel.upoly import UPoly, poly_square_root


def partial(f: ScalarField, v) -> ScalarField:
    """Exact partial derivative of ``f`` in coordinate ``v`` (a name, index or ``Coord``)."""
    if isinstance(v, Coord):
        if f.chart.names[v.index] != v.name:
            from nijkit.errors import ChartMismatch

            raise ChartMismatch(f"{v} does not belong to {f.chart!r}")
        v = v.index
    return f.partial(v)


__all__ = [
    "Chart",
    "Coord",
    "Poly",
    "ScalarField",
    "TruncatedSeries",
    "UPoly",
    "as_field",
    "parse_scalar",
    "partial",
    "poly_square_root",
    "series_from_scalar",
    "to_rational",
]
