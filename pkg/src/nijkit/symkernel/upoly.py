"""Univariate polynomials over an exact field (``mpq`` or ``ScalarField``)."""

from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq

from nijkit.errors import InputError, NotAFullSquare


def _is_zero(c) -> bool:
    return c == 0


class UPoly:
    """Coefficients stored lowest degree first; trailing zeros stripped."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Sequence, var: str = "t"):
        coeffs = list(coeffs)
        while coeffs and _is_zero(coeffs[-1]):
            coeffs.pop()
        self.coeffs = tuple(coeffs)
        self.var = var

    @classmethod
    def from_high(cls, coeffs: Sequence, var: str = "t") -> "UPoly":
        return cls(list(reversed(list(coeffs))), var)

    # --- structure ------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self):
        return self.coeffs[-1]

    def coeff(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self._zero()

    def _zero(self):
        if self.coeffs:
            return self.coeffs[0] * 0
        return mpq(0)

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.lc() == 1

    def __eq__(self, other) -> bool:
        if isinstance(other, UPoly):
            return len(self.coeffs) == len(other.coeffs) and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    # --- arithmetic -----------------------------------------------------

    def _like(self, coeffs) -> "UPoly":
        return UPoly(coeffs, self.var)

    def __add__(self, other) -> "UPoly":
        if not isinstance(other, UPoly):
            other = self._like([other])
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return self._like([x + b[k] if k < len(b) else x for k, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self) -> "UPoly":
        return self._like([-c for c in self.coeffs])

    def __sub__(self, other) -> "UPoly":
        if not isinstance(other, UPoly):
            other = self._like([other])
        return self + (-other)

    def __mul__(self, other) -> "UPoly":
        if not isinstance(other, UPoly):
            return self._like([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return self._like([])
        out = [None] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                term = a * b
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        zero = self._zero()
        return self._like([zero if c is None else c for c in out])

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "UPoly":
        result = self._like([self.coeffs[0] * 0 + 1]) if self.coeffs else self._like([mpq(1)])
        for _ in range(k):
            result = result * self
        return result

    def divmod(self, other: "UPoly") -> tuple["UPoly", "UPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs) + 1
        if dq <= 0:
            return self._like([]), self
        quot = [None] * dq
        lc = other.lc()
        m = len(other.coeffs) - 1
        for k in range(dq - 1, -1, -1):
            c = rem[k + m] / lc
            quot[k] = c
            if not _is_zero(c):
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        return self._like(quot), self._like(rem[:m])

    def __mod__(self, other: "UPoly") -> "UPoly":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "UPoly") -> "UPoly":
        return self.divmod(other)[0]

    def monic(self) -> "UPoly":
        if self.is_zero():
            return self
        lc = self.lc()
        return self._like([c / lc for c in self.coeffs])

    def gcd(self, other: "UPoly") -> "UPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def derivative(self) -> "UPoly":
        return self._like([c * k for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, value):
        acc = None
        for c in reversed(self.coeffs):
            acc = c if acc is None else acc * value + c
        return self._zero() if acc is None else acc

    def map_coeffs(self, fn) -> "UPoly":
        return self._like([fn(c) for c in self.coeffs])

    # --- printing -------------------------------------------------------

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if _is_zero(c):
                continue
            mono = "" if k == 0 else (self.var if k == 1 else f"{self.var}^{k}")
            text = str(c)
            simple = _is_simple(c)
            if not mono:
                body = text if simple else f"({text})"
            elif c == 1:
                body = mono
            elif c == -1:
                body = f"-{mono}"
            else:
                body = f"{text}*{mono}" if simple else f"({text})*{mono}"
            parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self) -> str:
        return f"UPoly({self})"


def _is_simple(c) -> bool:
    text = str(c)
    body = text[1:] if text.startswith("-") else text
    return not any(ch in body for ch in "+- ") and "/(" not in body


def poly_square_root(q: UPoly) -> UPoly:
    """Monic ``r`` with ``r**2 == q``, by matching coefficients from the top down.

    Raises ``NotAFullSquare`` naming the first coefficient identity that fails.
    """
    if q.is_zero() or q.degree % 2:
        raise InputError("square root needs a polynomial of even degree")
    if not q.is_monic():
        raise InputError("square root needs a monic polynomial")
    n = q.degree // 2
    one = q.lc()
    h = [one]  # h[k] is the coefficient of t^(n-k)
    for k in range(1, n + 1):
        acc = q.coeff(2 * n - k)
        for i in range(1, k):
            acc = acc - h[i] * h[k - i]
        h.append(acc / 2)
    r = UPoly(list(reversed(h)), q.var)
    square = r * r
    for power in range(n - 1, -1, -1):
        lhs = square.coeff(power)
        rhs = q.coeff(power)
        if not (lhs - rhs) == 0:
            raise NotAFullSquare(
                f"coefficient of {q.var}^{power}: square gives {lhs}, polynomial has {rhs}", power
            )
    return r
