"""Dense matrix helpers over exact fields (``mpq`` or ``ScalarField`` entries).

Matrices are plain lists of rows.
"""

from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import SingularMatrix

Matrix = list[list]


def _weight(x) -> int:
    num = getattr(x, "num", None)
    if num is None:
        return 0
    return len(num.terms) + len(x.den.terms) + (0 if x.is_constant() else 100)


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(rows):
        row = []
        ai = a[i]
        for j in range(cols):
            acc = None
            for k in range(inner):
                x = ai[k]
                if x == 0:
                    continue
                y = b[k][j]
                if y == 0:
                    continue
                acc = x * y if acc is None else acc + x * y
            row.append(acc if acc is not None else ai[0] * 0)
        out.append(row)
    return out


def mat_add(a, b) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def transpose(a) -> Matrix:
    return [list(col) for col in zip(*a)]


def identity_like(a, n: int | None = None) -> Matrix:
    zero = a[0][0] * 0
    one = zero + 1
    n = len(a) if n is None else n
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def bareiss_det(m: Sequence[Sequence]):
    """Fraction-free determinant; every division is exact in the entry ring."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        return mpq(1)
    sign = 1
    prev = None
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if not a[r][k] == 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return a[0][0] * 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                val = a[i][j] * pivot - a[i][k] * a[k][j]
                a[i][j] = val if prev is None else val / prev
        prev = pivot
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def leibniz_det(m: Sequence[Sequence]):
    """Cofactor expansion; slow, used as an independent oracle."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 0:
        return mpq(1)
    total = None
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * leibniz_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else m[0][0] * 0


def solve(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    """``X`` with ``a @ X == b`` by Gauss-Jordan elimination; ``a`` must be square."""
    n = len(a)
    m = [list(a[i]) + list(b[i]) for i in range(n)]
    width = len(m[0]) if m else 0
    for col in range(n):
        candidates = [r for r in range(col, n) if not m[r][col] == 0]
        if not candidates:
            raise SingularMatrix(f"matrix is singular (no pivot in column {col})")
        piv = min(candidates, key=lambda r: _weight(m[r][col]))
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        if not p == 1:
            m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r == col:
                continue
            f = m[r][col]
            if f == 0:
                continue
            row = m[col]
            m[r] = [m[r][j] - f * row[j] if not row[j] == 0 else m[r][j] for j in range(width)]
    return [row[n:] for row in m]


def inverse(a: Sequence[Sequence]) -> Matrix:
    return solve(a, identity_like(a))


def rank(m: Sequence[Sequence]) -> int:
    a = [list(r) for r in m]
    if not a:
        return 0
    rows, cols = len(a), len(a[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if not a[i][c] == 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, rows):
            f = a[i][c]
            if f == 0:
                continue
            f = f / p
            a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == rows:
            break
    return r


def rational_matrix(m) -> Matrix:
    return [[mpq(x) for x in row] for row in m]


def mat_pow(a, k: int) -> Matrix:
    result = identity_like(a)
    for _ in range(k):
        result = mat_mul(result, a)
    return result
