"""Seeded random test data: polynomials, operators, admissible right-hand sides."""

from __future__ import annotations

import os
import random
from itertools import product

from gmpy2 import mpq

from nijkit.exterior.forms import KForm
from nijkit.exterior.operators import OperatorField
from nijkit.nijenhuis import second_companion
from nijkit.pdesolve.diagonal import cohomological_operator
from nijkit.symkernel.field import ScalarField
from nijkit.symkernel.poly import Chart, Poly

DEFAULT_SEED = 20240917


def seed_from_env(explicit: int | None = None) -> int:
    if explicit is not None:
        return explicit
    raw = os.environ.get("NIJKIT_SEED")
    return int(raw) if raw else DEFAULT_SEED


def make_rng(seed: int | None = None) -> random.Random:
    return random.Random(seed_from_env(seed))


def random_poly(rng: random.Random, chart: Chart, degree: int, terms: int = 3, coeff: int = 3, support=None) -> Poly:
    idx = list(range(chart.dim)) if support is None else list(support)
    exps = [e for e in product(range(degree + 1), repeat=len(idx)) if sum(e) <= degree]
    data = {}
    for _ in range(terms):
        e = rng.choice(exps)
        full = [0] * chart.dim
        for i, k in zip(idx, e):
            full[i] = k
        c = rng.randint(-coeff, coeff)
        if c:
            data[tuple(full)] = data.get(tuple(full), 0) + c
    return Poly(chart, data)


def random_field(rng, chart, degree, terms=3, coeff=3, support=None) -> ScalarField:
    return ScalarField.poly(random_poly(rng, chart, degree, terms, coeff, support))


def random_rational_field(rng, chart, degree=2) -> ScalarField:
    num = random_poly(rng, chart, degree, 3)
    den = random_poly(rng, chart, 1, 2) + Poly.constant(chart, rng.choice([1, 2, 3]))
    if den.is_zero():
        den = Poly.constant(chart, 1)
    return ScalarField(num, den)


def random_operator(rng, chart: Chart, degree: int = 2, density: float = 0.7) -> OperatorField:
    n = chart.dim
    rows = [
        [random_field(rng, chart, degree) if rng.random() < density else ScalarField.zero(chart) for _ in range(n)]
        for _ in range(n)
    ]
    return OperatorField(rows, chart)


def random_one_form(rng, chart: Chart, degree: int = 2) -> KForm:
    return KForm.one_form([random_field(rng, chart, degree) for _ in range(chart.dim)], chart)


def random_two_form(rng, chart: Chart, degree: int = 2) -> KForm:
    n = chart.dim
    return KForm(2, chart, {(i, j): random_field(rng, chart, degree) for i in range(n) for j in range(i + 1, n)})


def potential_sigma(F: ScalarField) -> list[ScalarField]:
    """``sigma_k = -dF/dy_(n-k+1)``, which makes ``A* dy_n = dF`` exact."""
    n = F.chart.dim
    return [-F.partial(n - k) for k in range(1, n + 1)]


def random_second_companion(rng, chart: Chart, degree: int = 3):
    F = random_field(rng, chart, degree, terms=rng.randint(1, 4), coeff=2)
    sigma = potential_sigma(F)
    return sigma, second_companion(sigma, chart)


def random_admissible_omega(rng, A: OperatorField, degree: int = 3) -> tuple[ScalarField, KForm]:
    """``(V, d(A* dV))`` for a random polynomial potential ``V``."""
    V = random_field(rng, A.chart, degree, terms=4)
    return V, cohomological_operator(A, V)


def random_rational(rng, bound: int = 5) -> mpq:
    return mpq(rng.randint(-bound, bound), rng.randint(1, bound))
