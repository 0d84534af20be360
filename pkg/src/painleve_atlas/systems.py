"""The built-in Painleve systems and Hamiltonian-to-ODE machinery.

Each catalog entry stores the prefactor-scaled Hamiltonian (zH for the third
and fifth equations, z(z-1)H for the sixth), so the stored polynomial carries
exact rational coefficients and no rational functions of z.  First-order
systems are regenerated from the Hamiltonian on demand:

    prefactor * dx/dz = -d(h_scaled)/dy,   prefactor * dy/dz = +d(h_scaled)/dx.

The prefactor depends on z only, so it commutes with the x,y partials.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import sympy as sp

from .errors import (
    ConstraintViolated,
    MonomialAboveFace,
    NotPolynomializable,
    UnknownEquation,
    UnknownSymbol,
)
from .expr import PARAMETER, VARIABLE, Expr, Symbol, as_expr

X = Symbol("x", VARIABLE)
Y = Symbol("y", VARIABLE)
Z = Symbol("z", VARIABLE)

ALPHA = Symbol("a", PARAMETER)
BETA = Symbol("b", PARAMETER)
A0 = Symbol("a0", PARAMETER)
A1 = Symbol("a1", PARAMETER)
A2 = Symbol("a2", PARAMETER)
A3 = Symbol("a3", PARAMETER)
A4 = Symbol("a4", PARAMETER)


@dataclass(frozen=True)
class HamiltonianSpec:
    """A prefactor-scaled Hamiltonian with its symbol bookkeeping."""

    h_scaled: Expr
    prefactor: Expr
    pair: tuple[Symbol, Symbol]
    time: Symbol
    params: tuple[Symbol, ...] = ()
    param_constraint: Expr | None = None


@dataclass(frozen=True)
class CatalogInfo:
    """Reference data for one catalog equation.

    weight is (p, q, r, s); blowup_weight is the eigenvalue triple at a
    movable-pole fixed point; balance_count and chart_count are the number
    of Laurent balance types and the number of charts of the space of
    initial conditions (always balance_count + 1).
    """

    weight: tuple[int, int, int, int]
    hamiltonian_degree: int
    kovalevskaya_index: int
    blowup_weight: tuple[int, int, int]
    balance_count: int
    chart_count: int


@dataclass(frozen=True)
class PainleveSystem:
    """A first-order polynomial/rational ODE system in one or two variables.

    scaled_rhs holds P_i = prefactor * d(vars[i])/dz as canonical Exprs.
    """

    name: str
    vars: tuple[Symbol, ...]
    time: Symbol
    prefactor: Expr
    scaled_rhs: tuple[Expr, ...]
    params: tuple[Symbol, ...] = ()
    param_constraint: Expr | None = None
    hamiltonian: HamiltonianSpec | None = None

    def __post_init__(self):
        if len(self.vars) not in (1, 2):
            raise ValueError("a system has one or two dependent variables")
        if len(self.scaled_rhs) != len(self.vars):
            raise ValueError("one right-hand side per variable")

    @property
    def pair(self) -> tuple[Symbol, Symbol]:
        if len(self.vars) != 2:
            raise ValueError(f"{self.name} is not a planar system")
        return self.vars  # type: ignore[return-value]

    @property
    def rhs(self) -> tuple[Expr, ...]:
        return tuple(p / self.prefactor for p in self.scaled_rhs)

    def bind(self, bindings: dict) -> "PainleveSystem":
        """Substitute rational parameter values; unbound names stay symbolic."""
        named = {p.name: p for p in self.params}
        subs = {}
        for key, value in bindings.items():
            name = key.name if isinstance(key, Symbol) else str(key)
            if name not in named:
                raise UnknownSymbol(name)
            subs[named[name].sym] = _rational(value)
        if not subs:
            return self
        remaining = tuple(p for p in self.params if p.sym not in subs)
        constraint = self.param_constraint
        if constraint is not None:
            constraint = constraint.subs(subs)
            if not constraint.free_symbols and constraint != 0:
                raise ConstraintViolated(
                    f"{self.name} parameters violate the constraint: "
                    f"residual {constraint}"
                )
            if not constraint.free_symbols:
                constraint = None
        ham = self.hamiltonian
        if ham is not None:
            ham = HamiltonianSpec(
                h_scaled=ham.h_scaled.subs(subs),
                prefactor=ham.prefactor,
                pair=ham.pair,
                time=ham.time,
                params=remaining,
                param_constraint=constraint,
            )
        return PainleveSystem(
            name=self.name,
            vars=self.vars,
            time=self.time,
            prefactor=self.prefactor,
            scaled_rhs=tuple(p.subs(subs) for p in self.scaled_rhs),
            params=remaining,
            param_constraint=constraint,
            hamiltonian=ham,
        )

    def vanishes(self, expr) -> bool:
        """Zero test modulo the parameter constraint, when one is present."""
        e = as_expr(expr)
        if self.param_constraint is not None:
            e = e.subs(_constraint_solution(self.param_constraint))
        return not bool(e)

    def equal(self, left, right) -> bool:
        return self.vanishes(as_expr(left) - as_expr(right))


def _rational(value):
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"parameter values must be exact rationals, got {value!r}")
    if isinstance(value, (int, Rational, Fraction)):
        return sp.Rational(value)
    if isinstance(value, str):
        return sp.Rational(Fraction(value))
    if isinstance(value, sp.Rational):
        return value
    raise TypeError(f"parameter values must be exact rationals, got {value!r}")


def _constraint_solution(constraint: Expr) -> dict:
    """Solve a linear parameter constraint for its first active parameter."""
    e = constraint.as_sympy()
    for sym in sorted(e.free_symbols, key=lambda s: s.name):
        coeff = sp.diff(e, sym)
        if coeff.free_symbols or coeff == 0:
            continue
        return {sym: sp.expand(sym - e / coeff)}
    raise ValueError(f"constraint {constraint} is not linear in any parameter")


def hamilton_to_ode(spec: HamiltonianSpec, name: str = "user") -> PainleveSystem:
    """Derive the first-order system of a prefactor-scaled Hamiltonian."""
    sx, sy = spec.pair
    return PainleveSystem(
        name=name,
        vars=spec.pair,
        time=spec.time,
        prefactor=spec.prefactor,
        scaled_rhs=(-spec.h_scaled.diff(sy), spec.h_scaled.diff(sx)),
        params=spec.params,
        param_constraint=spec.param_constraint,
        hamiltonian=spec,
    )


def _build_catalog():
    x, y, z = X.sym, Y.sym, Z.sym
    a, b = ALPHA.sym, BETA.sym
    a0, a1, a2, a3, a4 = A0.sym, A1.sym, A2.sym, A3.sym, A4.sym
    one = Expr(1)
    zpf = Expr(z)

    entries = {}

    entries["PI"] = (
        HamiltonianSpec(Expr(x**2 / 2 - 2 * y**3 - z * y), one, (X, Y), Z),
        CatalogInfo((3, 2, 4, 5), 6, 6, (6, 4, 5), 1, 2),
    )
    entries["PII"] = (
        HamiltonianSpec(
            Expr(x**2 / 2 - y**4 / 2 - z * y**2 / 2 - a * y),
            one, (X, Y), Z, (ALPHA,),
        ),
        CatalogInfo((2, 1, 2, 3), 4, 4, (4, 2, 3), 2, 3),
    )
    entries["PIV"] = (
        HamiltonianSpec(
            Expr(-x * y**2 + x**2 * y - 2 * x * y * z - 2 * a * x + 2 * b * y),
            one, (X, Y), Z, (ALPHA, BETA),
        ),
        CatalogInfo((1, 1, 1, 2), 3, 3, (3, 1, 2), 3, 4),
    )
    entries["P3D8"] = (
        HamiltonianSpec(
            Expr(x**2 * y**2 - z / (2 * y) - y / 2), zpf, (X, Y), Z,
        ),
        CatalogInfo((-1, 2, 4, 1), 2, 2, (2, 4, 1), 2, 3),
    )
    entries["P3D7"] = (
        HamiltonianSpec(
            Expr(x**2 * y**2 + z * x + y + a * x * y), zpf, (X, Y), Z, (ALPHA,),
        ),
        CatalogInfo((-1, 2, 3, 1), 2, 2, (2, 3, 1), 2, 3),
    )
    entries["P3D6"] = (
        HamiltonianSpec(
            Expr(x**2 * y**2 - x * y**2 + z * x + (a + b) * x * y - a * y),
            zpf, (X, Y), Z, (ALPHA, BETA),
        ),
        CatalogInfo((0, 1, 2, 1), 2, 2, (2, 2, 1), 3, 4),
    )
    entries["PV"] = (
        HamiltonianSpec(
            Expr(
                x * (x + z) * y * (y - 1)
                + a2 * y * z - a3 * x * y - a1 * x * (y - 1)
            ),
            zpf, (X, Y), Z, (A1, A2, A3),
        ),
        CatalogInfo((1, 0, 1, 1), 2, 2, (2, 1, 1), 4, 5),
    )
    entries["PVI"] = (
        HamiltonianSpec(
            Expr(
                y * (y - 1) * (y - z) * x**2
                + a2 * (a1 + a2) * (y - z)
                - (
                    a4 * (y - 1) * (y - z)
                    + a3 * y * (y - z)
                    + a0 * y * (y - 1)
                ) * x
            ),
            Expr(z * (z - 1)), (X, Y), Z, (A0, A1, A2, A3, A4),
            Expr(a0 + a1 + 2 * a2 + a3 + a4),
        ),
        CatalogInfo((1, 0, 0, 1), 2, 2, (2, 0, 1), 5, 6),
    )
    return entries


_CATALOG = _build_catalog()

_ALIASES = {
    "pi": "PI", "p1": "PI",
    "pii": "PII", "p2": "PII",
    "piv": "PIV", "p4": "PIV",
    "p3d8": "P3D8", "piiid8": "P3D8", "d8": "P3D8",
    "p3d7": "P3D7", "piiid7": "P3D7", "d7": "P3D7",
    "p3d6": "P3D6", "piiid6": "P3D6", "d6": "P3D6", "p3": "P3D6",
    "pv": "PV", "p5": "PV",
    "pvi": "PVI", "p6": "PVI",
}


def catalog_names() -> tuple[str, ...]:
    return tuple(_CATALOG)


def _resolve(name: str) -> str:
    key = "".join(ch for ch in name.lower() if ch.isalnum())
    if key in _ALIASES:
        return _ALIASES[key]
    raise UnknownEquation(name)


@functools.lru_cache(maxsize=None)
def _base_system(key: str) -> PainleveSystem:
    spec, _ = _CATALOG[key]
    return hamilton_to_ode(spec, name=key)


def catalog_get(name: str, params: dict | None = None) -> PainleveSystem:
    """Look up a built-in system, optionally binding parameter values."""
    sys = _base_system(_resolve(name))
    if params:
        sys = sys.bind(params)
    return sys


def catalog_info(name: str) -> CatalogInfo:
    return _CATALOG[_resolve(name)][1]


# -- rational monomial enumeration --
#
# A "monomial" of a right-hand side R_i = P_i / prefactor is one term of the
# numerator over the fixed denominator.  The denominator must factor as a
# monomial in the variables times a polynomial unit in z alone (nonzero at
# z = 0); the monomial contributes negative exponents, the unit contributes
# nothing.

def scaled_terms(sys: PainleveSystem, i: int) -> list[tuple[Expr, tuple[int, ...]]]:
    """Monomials of scaled_rhs[i] with the variable/time exponents of rhs[i].

    Returns (term, exponents) pairs where term is at the P-scale (summing
    the terms gives back scaled_rhs[i] exactly) and exponents are those of
    the corresponding monomial of P_i / prefactor.
    """
    syms = [v.sym for v in sys.vars] + [sys.time.sym]
    p = sys.scaled_rhs[i]
    if p.num == 0:
        return []
    den_total = sp.expand(p.den * sys.prefactor.as_sympy())
    dvec = _monomial_part(den_total, syms, sys)
    out = []
    npoly = sp.Poly(p.num, *syms)
    for monom, coeff in npoly.terms():
        term = Expr(coeff * sp.prod([s**e for s, e in zip(syms, monom)]), p.den)
        exps = tuple(e - d for e, d in zip(monom, dvec))
        out.append((term, exps))
    return out


def _monomial_part(den: sp.Expr, syms, sys) -> tuple[int, ...]:
    dpoly = sp.Poly(den, *syms)
    monoms = dpoly.monoms()
    dvec = tuple(min(m[j] for m in monoms) for j in range(len(syms)))
    unit = sp.cancel(den / sp.prod([s**e for s, e in zip(syms, dvec)]))
    bad = unit.free_symbols & {v.sym for v in sys.vars}
    if bad:
        raise NotPolynomializable(
            f"denominator of {sys.name} is not a monomial times a unit in "
            f"{sys.time}: residual factor {unit}"
        )
    return dvec


def weighted_degree(expr: Expr, weight_entries) -> int:
    """Max weighted degree over the rational monomials of expr.

    weight_entries assigns one integer degree per symbol, as a dict keyed by
    symbol name.  Denominator units (z-polynomials with nonzero constant
    term) do not count, matching the exponent convention.
    """
    e = as_expr(expr)
    syms = sorted(e.free_symbols, key=lambda s: s.name)
    degs = [weight_entries.get(s.name, 0) for s in syms]
    npoly = sp.Poly(e.num, *syms) if syms else None
    if npoly is None:
        return 0
    dpoly = sp.Poly(e.den, *syms)
    dvec = tuple(min(m[j] for m in dpoly.monoms()) for j in range(len(syms)))
    dshift = sum(d * w for d, w in zip(dvec, degs))
    return max(sum(m[j] * degs[j] for j in range(len(syms))) - dshift
               for m in npoly.monoms())


@dataclass(frozen=True)
class TruncationSplit:
    """Quasi-homogeneous truncation f and perturbation g at a fixed weight."""

    f: tuple[Expr, ...]
    g: tuple[Expr, ...]
    weight: tuple[int, ...]


def split_truncation(sys: PainleveSystem, weight) -> TruncationSplit:
    """Split scaled_rhs into the face part f and the strictly-below part g.

    weight is a sequence (p_1, ..., p_m, r, s).  A monomial with exponent
    vector on the face has weighted value s exactly; anything above the
    face is an error.
    """
    entries = tuple(int(v) for v in weight)
    m = len(sys.vars)
    if len(entries) != m + 2:
        raise ValueError(f"weight needs {m + 2} entries, got {len(entries)}")
    normal, s = entries[:-1], entries[-1]
    f_parts, g_parts = [], []
    for i in range(m):
        f_i, g_i = Expr(0), Expr(0)
        for term, exps in scaled_terms(sys, i):
            vec = exponent_vector(exps, i, m)
            value = sum(c * e for c, e in zip(normal, vec))
            if value == s:
                f_i = f_i + term
            elif value < s:
                g_i = g_i + term
            else:
                raise MonomialAboveFace(str(term), value, s)
        f_parts.append(f_i)
        g_parts.append(g_i)
    return TruncationSplit(tuple(f_parts), tuple(g_parts), entries)


def exponent_vector(exps: tuple[int, ...], i: int, m: int) -> tuple[int, ...]:
    """Exponent rule: drop one from the i-th variable, add one to the time."""
    return tuple(
        e - 1 if j == i else (e + 1 if j == m else e)
        for j, e in enumerate(exps)
    )


def parameter_split(sys: PainleveSystem) -> tuple[tuple[Expr, ...], tuple[Expr, ...]]:
    """Intrinsic truncation: parameter-free monomials vs parameter-carrying.

    This split is computed on the symbolic catalog entry and coincides with
    split_truncation at the fitted weight for every built-in system; it is
    what makes the f/g distinction survive numeric parameter binding.
    """
    psyms = {p.sym for p in sys.params}
    f_parts, g_parts = [], []
    for i in range(len(sys.vars)):
        f_i, g_i = Expr(0), Expr(0)
        for term, _ in scaled_terms(sys, i):
            if term.free_symbols & psyms:
                g_i = g_i + term
            else:
                f_i = f_i + term
        f_parts.append(f_i)
        g_parts.append(g_i)
    return tuple(f_parts), tuple(g_parts)
