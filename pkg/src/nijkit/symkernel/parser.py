"""Infix expression parser producing canonical ``ScalarField`` values.

Grammar (loosest to tightest)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" power)?          # right-associative
    primary := INTEGER | IDENT | "(" expr ")"

Exponents must evaluate to non-negative integer constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from nijkit.errors import DivisionByZero, ParseError, UnknownIdentifier
from nijkit.symkernel.field import ScalarField
from nijkit.symkernel.poly import Chart

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()]))")


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        text = m.group(kind)
        start = m.start(kind)
        if text == "**":
            text = "^"
        tokens.append(Token(kind, text, start))
        pos = m.end()
    tokens.append(Token("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, chart: Chart):
        self.src = src
        self.chart = chart
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos, self.src)
        self.advance()

    def parse(self) -> ScalarField:
        if self.tok.kind == "end":
            raise ParseError("empty expression", 0, self.src)
        value = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.pos, self.src)
        return value

    def expr(self) -> ScalarField:
        value = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> ScalarField:
        value = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            rhs = self.unary()
            if op.text == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise DivisionByZero(f"division by the zero polynomial (at position {op.pos})")
                value = value / rhs
        return value

    def unary(self) -> ScalarField:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            operand = self.unary()
            return -operand if op == "-" else operand
        return self.power()

    def power(self) -> ScalarField:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            caret = self.advance()
            exponent = self.power()
            if not exponent.is_constant():
                raise ParseError("exponent must be a constant", caret.pos, self.src)
            k = exponent.constant_value()
            if k.denominator != 1 or k < 0:
                raise ParseError("exponent must be a non-negative integer", caret.pos, self.src)
            return base ** int(k)
        return base

    def primary(self) -> ScalarField:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return ScalarField.constant(self.chart, int(t.text))
        if t.kind == "ident":
            self.advance()
            if t.text not in self.chart:
                raise UnknownIdentifier(f"unknown identifier {t.text!r}", t.pos, self.src)
            return ScalarField.var(self.chart, t.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            value = self.expr()
            self.expect(")")
            return value
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos, self.src)


def parse_scalar(src: str, chart: Chart) -> ScalarField:
    """Parse ``src`` into the exact rational function it denotes on ``chart``."""
    return _Parser(src, chart).parse()
