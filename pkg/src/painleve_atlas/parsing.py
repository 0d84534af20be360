"""Recursive-descent parser for the expression grammar.

Grammar (whitespace insignificant):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := INT | IDENT | '(' expr ')'

'^' binds tightest and takes a literal integer exponent.  Identifiers must be
declared in the symbol context passed to parse_expr; anything else raises
UnknownSymbol.  Offsets in errors are 0-based byte offsets into the source.
"""

from __future__ import annotations

import re

import sympy as sp

from .errors import DivisionByZero, ExprSyntaxError, UnknownSymbol
from .expr import Expr, Symbol

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([-+*/^()]))")


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def _tokenize(source: str):
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        m = _TOKEN.match(source, i)
        if m is None:
            stripped = source[i:].lstrip()
            at = i + (len(source[i:]) - len(stripped))
            if not stripped:
                break
            raise ExprSyntaxError(
                f"unexpected character {stripped[0]!r}", _byte_offset(source, at))
        at = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), _byte_offset(source, at)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), _byte_offset(source, at)))
        else:
            tokens.append(("op", m.group(3), _byte_offset(source, at)))
        i = m.end()
    tokens.append(("end", "", _byte_offset(source, n)))
    return tokens


class _Parser:
    def __init__(self, source: str, symbols: dict):
        self.source = source
        self.symbols = symbols
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}", off)
        return self.advance()

    def parse(self) -> sp.Expr:
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", off)
        return e

    def expr(self) -> sp.Expr:
        e = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                e = e + rhs if text == "+" else e - rhs
            else:
                return e

    def term(self) -> sp.Expr:
        e = self.unary()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.unary()
                if text == "/":
                    if sp.cancel(rhs) == 0:
                        raise DivisionByZero(f"division by zero at byte {off}")
                    e = e / rhs
                else:
                    e = e * rhs
            else:
                return e

    def unary(self) -> sp.Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return -self.unary()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            sign = 1
            kind, text, off = self.peek()
            if kind == "op" and text == "-":
                self.advance()
                sign = -1
                kind, text, off = self.peek()
            if kind != "int":
                raise ExprSyntaxError("exponent must be an integer literal", off)
            self.advance()
            k = sign * int(text)
            if k < 0 and sp.cancel(base) == 0:
                raise DivisionByZero(f"negative power of zero at byte {off}")
            base = base ** k
            kind, text, off = self.peek()
            if kind == "op" and text == "^":
                raise ExprSyntaxError("chained '^' needs parentheses", off)
        return base

    def atom(self) -> sp.Expr:
        kind, text, off = self.advance()
        if kind == "int":
            return sp.Integer(int(text))
        if kind == "name":
            if text not in self.symbols:
                raise UnknownSymbol(text, off)
            return self.symbols[text]
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(
            f"expected a number, symbol or '(', got {text!r}" if text
            else "unexpected end of input", off)


def _symbol_context(symbols) -> dict:
    ctx = {}
    if symbols is None:
        return ctx
    if isinstance(symbols, dict):
        items = symbols.items()
    else:
        items = ((getattr(s, "name", str(s)), s) for s in symbols)
    for name, s in items:
        if isinstance(s, Symbol):
            ctx[name] = s.sym
        elif isinstance(s, sp.Symbol):
            ctx[name] = s
        else:
            ctx[name] = sp.Symbol(name)
    return ctx


def parse_expr(source: str, symbols=None) -> Expr:
    """Parse source into a canonical Expr; symbols is the set of legal names."""
    tree = _Parser(source, _symbol_context(symbols)).parse()
    return Expr.from_sympy(tree)
