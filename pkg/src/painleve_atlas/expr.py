"""Canonical rational-function arithmetic over Q.

An Expr is a pair of expanded sympy polynomials num/den with gcd 1 and the
grlex-leading coefficient of den normalized to 1.  Equality is representational:
two Exprs are equal iff they canonicalize to the same pair.  sympy supplies the
polynomial arithmetic; the canonical form, the grammar and the serialization
are fixed here so that identical inputs always produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Complex, Rational

import sympy as sp

from .errors import DivisionByZero, PoleAtPoint, UnboundSymbol

VARIABLE = "variable"
PARAMETER = "parameter"
POLE_POSITION = "pole-position"

_KINDS = (VARIABLE, PARAMETER, POLE_POSITION)


@dataclass(frozen=True)
class Symbol:
    """A named indeterminate with a semantic kind."""

    name: str
    kind: str = VARIABLE

    def __post_init__(self):
        if not self.name or not self.name.isidentifier():
            raise ValueError(f"not a valid symbol name: {self.name!r}")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown symbol kind: {self.kind!r}")

    @property
    def sym(self) -> sp.Symbol:
        return sp.Symbol(self.name)

    def __str__(self) -> str:
        return self.name


def _sympify(value) -> sp.Expr:
    if isinstance(value, Expr):
        return value.as_sympy()
    if isinstance(value, Symbol):
        return value.sym
    if isinstance(value, str):
        return sp.Symbol(value)
    if isinstance(value, sp.Expr):
        return value
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, (int, Rational)):
        return sp.Rational(value)
    raise TypeError(f"cannot interpret {value!r} as an expression")


def _grlex_key(monom):
    return (sum(monom), monom)


def _leading_coeff(poly: sp.Expr):
    """Grlex-leading coefficient w.r.t. name-sorted generators."""
    syms = sorted(poly.free_symbols, key=lambda s: s.name)
    if not syms:
        return poly
    p = sp.Poly(poly, *syms)
    best = max(p.monoms(), key=_grlex_key)
    return p.coeff_monomial(best)


def _canonical_pair(e: sp.Expr):
    num, den = sp.fraction(sp.cancel(sp.together(e)))
    num = sp.expand(num)
    den = sp.expand(den)
    if den == 0:
        raise DivisionByZero("zero denominator")
    lc = _leading_coeff(den)
    if lc != 1:
        num = sp.expand(num / lc)
        den = sp.expand(den / lc)
    return num, den


class Expr:
    """Immutable canonical rational function."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        n = _sympify(num)
        d = _sympify(den)
        if d == 0:
            raise DivisionByZero("zero denominator")
        self.num, self.den = _canonical_pair(n / d)

    @classmethod
    def _raw(cls, num: sp.Expr, den: sp.Expr) -> "Expr":
        obj = object.__new__(cls)
        obj.num, obj.den = num, den
        return obj

    @classmethod
    def from_sympy(cls, e: sp.Expr) -> "Expr":
        return cls._raw(*_canonical_pair(e))

    def as_sympy(self) -> sp.Expr:
        return self.num / self.den

    @property
    def is_polynomial(self) -> bool:
        return self.den == 1

    @property
    def free_symbols(self):
        return self.num.free_symbols | self.den.free_symbols

    # -- arithmetic --

    def _combine(self, other, op):
        try:
            o = _sympify(other)
        except TypeError:
            return NotImplemented
        return Expr.from_sympy(op(self.as_sympy(), o))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _sympify(other)
        if sp.cancel(o) == 0:
            raise DivisionByZero("division by zero expression")
        return Expr.from_sympy(self.as_sympy() / o)

    def __rtruediv__(self, other):
        if self.num == 0:
            raise DivisionByZero("division by zero expression")
        return Expr.from_sympy(_sympify(other) / self.as_sympy())

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0 and self.num == 0:
            raise DivisionByZero("negative power of zero")
        return Expr.from_sympy(self.as_sympy() ** k)

    def __neg__(self):
        return Expr._raw(sp.expand(-self.num), self.den)

    # -- comparison --

    def __eq__(self, other):
        try:
            o = other if isinstance(other, Expr) else Expr(other)
        except TypeError:
            return NotImplemented
        if self.num == o.num and self.den == o.den:
            return True
        return sp.expand(self.num * o.den - o.num * self.den) == 0

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return self.num != 0

    # -- calculus / substitution --

    def diff(self, sym) -> "Expr":
        return Expr.from_sympy(sp.diff(self.as_sympy(), _sympify(sym)))

    def subs(self, bindings: dict) -> "Expr":
        sb = {_sympify(k): _sympify(v) for k, v in bindings.items()}
        return Expr.from_sympy(self.as_sympy().subs(sb, simultaneous=True))

    def eval(self, bindings: dict) -> complex:
        """Exact-substitution numeric evaluation at a complex point."""
        sb = {}
        for k, v in bindings.items():
            if isinstance(v, Complex) and not isinstance(v, (Expr, sp.Expr)):
                v = sp.sympify(v)
            sb[_sympify(k)] = _sympify(v)
        nv = self.num.subs(sb)
        dv = self.den.subs(sb)
        missing = nv.free_symbols | dv.free_symbols
        if missing:
            raise UnboundSymbol(missing)
        dc = complex(dv)
        if dc == 0:
            raise PoleAtPoint(abs(dc))
        return complex(nv) / dc

    def __repr__(self):
        return f"Expr({serialize(self)})"

    def __str__(self):
        return serialize(self)


def as_expr(value) -> Expr:
    return value if isinstance(value, Expr) else Expr(value)


def differentiate(expr: Expr, sym) -> Expr:
    return as_expr(expr).diff(sym)


def normalize_arith(op: str, a, b):
    """Combine two expressions; op in {add, sub, mul, div, eq}."""
    x, y = as_expr(a), as_expr(b)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    if op == "eq":
        return x == y
    raise ValueError(f"unknown arithmetic op: {op!r}")


def substitute_eval(expr: Expr, bindings: dict):
    """Substitute bindings; full numeric binding yields a complex number."""
    e = as_expr(expr)
    numeric = {}
    symbolic = {}
    for k, v in bindings.items():
        if isinstance(v, Complex) and not isinstance(v, (Expr, sp.Expr)):
            numeric[k] = v
        else:
            symbolic[k] = v
    if symbolic:
        e = e.subs(symbolic)
    if not numeric:
        return e
    remaining = {s.name for s in e.free_symbols}
    if remaining <= {str(k) for k in numeric}:
        return e.eval(numeric)
    return e.subs({k: sp.sympify(v) for k, v in numeric.items()})


# -- serialization --

def _coeff_parts(c: sp.Expr):
    """Split a rational coefficient into sign and text."""
    if c.is_Rational:
        sign = -1 if c < 0 else 1
        c = abs(c)
        if c.q == 1:
            return sign, str(c.p)
        return sign, f"{c.p}/{c.q}"
    raise ValueError(f"non-rational coefficient in canonical serialization: {c}")


def _serialize_poly(poly: sp.Expr) -> str:
    syms = sorted(poly.free_symbols, key=lambda s: s.name)
    if not syms:
        sign, text = _coeff_parts(poly)
        return text if sign > 0 else "-" + text
    p = sp.Poly(poly, *syms)
    terms = sorted(p.terms(), key=lambda t: _grlex_key(t[0]), reverse=True)
    pieces = []
    for monom, coeff in terms:
        sign, ctext = _coeff_parts(coeff)
        factors = []
        for s, e in zip(syms, monom):
            if e == 1:
                factors.append(s.name)
            elif e > 1:
                factors.append(f"{s.name}^{e}")
        if not factors:
            body = ctext
        elif ctext == "1":
            body = "*".join(factors)
        else:
            body = "*".join([ctext] + factors)
        pieces.append((sign, body))
    first_sign, first_body = pieces[0]
    out = [("-" if first_sign < 0 else "") + first_body]
    for sign, body in pieces[1:]:
        out.append((" - " if sign < 0 else " + ") + body)
    return "".join(out)


def serialize(expr: Expr) -> str:
    """Canonical text form; parsing it back reproduces the same Expr."""
    e = as_expr(expr)
    if e.den == 1:
        return _serialize_poly(e.num)
    return f"({_serialize_poly(e.num)})/({_serialize_poly(e.den)})"
