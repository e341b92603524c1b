"""Bring a pair of block-triangular shape to the canonical model by a generating function."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from nijkit.errors import InputError, InvalidProblem, NijkitError, PipelineError
from nijkit.exterior.forms import KForm
from nijkit.exterior.operators import OperatorField
from nijkit.pdesolve.cauchy import CauchyData, cauchy_series_solve
from nijkit.pdesolve.jets import SolvedForm, check_compatibility_conditions, reduce_to_solved_form
from nijkit.pncompat import (
    PNPair,
    canonical_A,
    canonical_S,
    closedness_of_T,
    extract_T,
    generating_transform,
    jacobi_row_structure,
)
from nijkit.symkernel.field import ScalarField
from nijkit.symkernel.poly import Chart, to_rational
from nijkit.symkernel.series import TruncatedSeries, series_from_scalar


@dataclass(frozen=True)
class Canonicalization:
    U: TruncatedSeries
    T: KForm
    solved_form: SolvedForm
    transformed: PNPair
    residual: tuple  # S~ - S as series at the base point
    order: int

    @property
    def generating_function(self) -> ScalarField:
        return self.U.to_scalar()

    def residual_vanishes_through(self, degree: int) -> bool:
        return all(r.vanishes_through(degree) for row in self.residual for r in row)

    def residual_lowest_degree(self) -> int | None:
        degrees = [r.lowest_degree() for row in self.residual for r in row]
        degrees = [d for d in degrees if d is not None]
        return min(degrees) if degrees else None

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "U": self.U.to_json(),
            "generating_function": str(self.generating_function),
            "T": {label: str(v) for label, v in self.T.nonzero_components()},
            "residual_lowest_degree": self.residual_lowest_degree(),
        }


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except NijkitError as exc:
        raise PipelineError(name, exc) from exc


def _check_closed(T: KForm, A: OperatorField) -> None:
    closed, closed_a = closedness_of_T(T, A)
    if not closed:
        raise InvalidProblem("T is not closed")
    if not closed_a:
        raise InvalidProblem("i_A T is not closed")


def _require_compatible(system: SolvedForm) -> None:
    cert = check_compatibility_conditions(system)
    if not cert.ok:
        raise InvalidProblem(f"integrability conditions fail: {cert.violations[:3]}")


def solve_canonicalization(
    pair: PNPair,
    point: Sequence,
    order: int = 8,
    initial=None,
) -> Canonicalization:
    """Find ``U`` with ``d(A* dU) = -T`` so that ``p -> p + grad U`` removes ``T``.

    ``point`` is either a base point ``(x_1..x_n)`` or a full point of the pair's chart.
    """
    n = pair.n
    pt = [to_rational(v) for v in point]
    if len(pt) == 2 * n:
        pt = pt[:n]
    if len(pt) != n:
        raise InputError(f"point must have {n} or {2 * n} coordinates")
    _stage("jacobi-rows", jacobi_row_structure, pair)
    T = _stage("extract-T", extract_T, pair)
    base = T.chart
    A = canonical_A(n, base)
    _stage("closedness", _check_closed, T, A)
    Omega = T.scale(-1)
    system = _stage("reduce", reduce_to_solved_form, A, Omega, pt)
    _stage("compatibility", _require_compatible, system)
    if isinstance(initial, ScalarField):
        initial = CauchyData.from_function(initial.rename_into(base), pt, order)
    U = _stage("cauchy", cauchy_series_solve, system, initial, order)
    U_field = U.to_scalar().rename_into(pair.chart)
    transformed = _stage("transform", generating_transform, U_field, pair)
    S_new = _stage("verify", jacobi_row_structure, transformed)
    S = canonical_S(n, pair.chart)
    full_point = list(pt) + [0] * n
    residual = tuple(
        tuple(series_from_scalar(S_new[i][j] - S[i][j], full_point, order) for j in range(n)) for i in range(n)
    )
    return Canonicalization(U, T, system, transformed, residual, order)


def base_chart(n: int) -> Chart:
    return Chart([f"x{i}" for i in range(1, n + 1)])
