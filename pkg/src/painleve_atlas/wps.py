"""Charts of the weighted projective compactification and their flows.

A weight (p, q, r, s) embeds the phase space (x, y, z) into the weighted
projective 3-space with coordinates of degrees p, q, r, s.  Chart k is the
affine piece where the k-th variable carries the scale:

    chart 1: x = eps1^(-p/s),    y = Y1 eps1^(-q/s), z = Z1 eps1^(-r/s)
    chart 2: x = X2 eps2^(-p/s), y = eps2^(-q/s),    z = Z2 eps2^(-r/s)
    chart 3: x = X3 eps3^(-p/s), y = Y3 eps3^(-q/s), z = eps3^(-r/s)

A chart exists only when its weight entry is nonzero, and carries an
orbifold group of order |entry|.  The flow is written in a rescaled time t
with dz/dt = z eps_k times the minimal polynomial factor clearing the
remaining denominators (charts 1 and 2 only; chart 3 fields may stay
rational).  The divisor eps_k = 0 carries the fixed points that Laurent
series converge to.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

from .errors import (
    NonIntegerPower,
    NotPolynomializable,
    OnOverlapBoundary,
    PoleAtPoint,
    PositiveDimensionalUnexpected,
)
from .expr import VARIABLE, Expr, Symbol
from .systems import PainleveSystem
from .weights import Weight

CHART_COORDS = {
    1: (Symbol("Y1", VARIABLE), Symbol("Z1", VARIABLE), Symbol("eps1", VARIABLE)),
    2: (Symbol("X2", VARIABLE), Symbol("Z2", VARIABLE), Symbol("eps2", VARIABLE)),
    3: (Symbol("X3", VARIABLE), Symbol("Y3", VARIABLE), Symbol("eps3", VARIABLE)),
}

# time direction fixups so catalog chart fields match their source form
_RESCALE_OVERRIDES = {("P3D7", 1): -1, ("P3D7", 2): -2}

FREE_PARAM = sp.Symbol("c")


def _weight_entries(weight) -> tuple[int, int, int, int]:
    entries = tuple(int(v) for v in weight)
    if len(entries) != 4:
        raise ValueError("chart geometry needs a planar weight (p, q, r, s)")
    return entries


@dataclass(frozen=True)
class ChartAtlas:
    """The affine chart plus the numbered charts a weight admits."""

    weight: tuple[int, int, int, int]
    charts: tuple[int, ...]

    def has_chart(self, k: int) -> bool:
        return k == 0 or k in self.charts

    def orbifold_order(self, k: int) -> int:
        if k not in self.charts:
            raise ValueError(f"chart {k} is not part of this atlas")
        return abs(self.weight[k - 1])

    def coords(self, k: int) -> tuple[Symbol, ...]:
        if k == 0:
            from .systems import X, Y, Z
            return (X, Y, Z)
        return CHART_COORDS[k]


def chart_atlas(weight) -> ChartAtlas:
    entries = _weight_entries(weight)
    charts = tuple(k for k in (1, 2, 3) if entries[k - 1] != 0)
    return ChartAtlas(entries, charts)


@dataclass(frozen=True)
class VectorField3:
    """A chart flow d/dt with dz/dt recorded as time_rescaling.

    time_rescaling mixes the chart coordinates with the affine z, which the
    caller tracks separately; on the divisor it vanishes, which is what
    freezes z at a movable pole.
    """

    system: str
    chart: int
    coords: tuple[Symbol, Symbol, Symbol]
    components: tuple[Expr, Expr, Expr]
    time_rescaling: Expr
    weight: tuple[int, int, int, int]
    raw_components: tuple[Expr, Expr, Expr]


@dataclass(frozen=True)
class FixedPointRecord:
    chart: int
    location: tuple[Expr, ...]
    jacobian: tuple[tuple[Expr, ...], ...]
    eigenvalues: tuple[Expr, ...]
    classification: str


@dataclass(frozen=True)
class TransitionMap:
    source: int
    target: int
    inputs: tuple[Symbol, ...]
    outputs: tuple[Expr, ...]


def field_in_chart(sys: PainleveSystem, weight, chart: int) -> VectorField3:
    if len(sys.vars) != 2:
        raise ValueError("chart flows are defined for planar systems")
    entries = _weight_entries(weight)
    if chart not in (1, 2, 3):
        raise ValueError(f"chart must be 1, 2 or 3, not {chart}")
    if entries[chart - 1] == 0:
        raise ValueError(
            f"chart {chart} does not exist at weight {entries}"
        )
    return _field_in_chart(sys, entries, chart)


@functools.lru_cache(maxsize=None)
def _field_in_chart(sys: PainleveSystem, entries, chart: int) -> VectorField3:
    p, q, r, s = entries
    wvec = (p, q, r)
    wk = wvec[chart - 1]
    lam = sp.Symbol("_lam")
    coords = CHART_COORDS[chart]
    eps = coords[2].sym
    base = chart - 1
    others = [j for j in range(3) if j != base]

    # the lift: each affine variable in terms of chart coordinates and lam
    chart_of: dict[int, sp.Expr] = {base: sp.Integer(1)}
    chart_of[others[0]] = coords[0].sym
    chart_of[others[1]] = coords[1].sym
    subs = {}
    affine = [v.sym for v in sys.vars] + [sys.time.sym]
    for j in range(3):
        subs[affine[j]] = chart_of[j] * lam ** (-wvec[j])

    pf = sys.prefactor.as_sympy().subs(subs, simultaneous=True)
    flows = [
        sp.cancel(sys.scaled_rhs[0].as_sympy().subs(subs, simultaneous=True) / pf),
        sp.cancel(sys.scaled_rhs[1].as_sympy().subs(subs, simultaneous=True) / pf),
        sp.Integer(1),
    ]
    zfactor = chart_of[2]  # 1 in chart 3, the Z coordinate otherwise

    raws = []
    for j in others:
        raws.append(
            flows[j] * lam ** wvec[j]
            - sp.Rational(wvec[j], wk) * chart_of[j] * flows[base] * lam ** wk
        )
    raws.append(-sp.Rational(s, wk) * eps * flows[base] * lam ** wk)

    reduced = [
        _reduce_lift(zfactor * raw * lam ** (s - r), lam, eps, s, sys.name)
        for raw in raws
    ]

    raw_components = tuple(Expr.from_sympy(comp) for comp in reduced)
    extra = sp.Integer(1)
    if chart != 3:
        for raw in raw_components:
            extra = sp.lcm(extra, raw.den)  # canonical dens are monic
    factor = extra * _RESCALE_OVERRIDES.get((sys.name, chart), 1)
    components = tuple(Expr.from_sympy(sp.cancel(comp * factor)) for comp in reduced)
    rescale = Expr.from_sympy(sys.time.sym * eps * factor)
    return VectorField3(
        system=sys.name,
        chart=chart,
        coords=coords,
        components=components,
        time_rescaling=rescale,
        weight=entries,
        raw_components=raw_components,
    )


def _reduce_lift(expr: sp.Expr, lam, eps, s: int, name: str) -> sp.Expr:
    """Replace lam^(k s) by eps^k; any other power means a bad face."""
    num, den = sp.fraction(sp.cancel(sp.together(sp.expand(expr))))
    dpoly = sp.Poly(den, lam)
    dshift = min(m[0] for m in dpoly.monoms())
    rest = sp.cancel(den / lam**dshift)
    if rest.has(lam):
        raise NotPolynomializable(
            f"{name}: denominator {den} is not a monomial in the scale"
        )
    out = sp.Integer(0)
    for (e,), coeff in sp.Poly(num, lam).terms():
        net = e - dshift
        if net < 0 or net % s != 0:
            raise NotPolynomializable(
                f"{name}: scale exponent {net} is not a nonnegative "
                f"multiple of {s}"
            )
        out += coeff * eps ** (net // s)
    return sp.cancel(out / rest)


def transition_map(weight, source: int, target: int) -> TransitionMap:
    """Coordinate functions of one chart in terms of another.

    Charts are 0 (affine) or 1..3.  Raises NonIntegerPower when the change
    of charts needs a fractional power, which is where the orbifold
    structure lives.
    """
    entries = _weight_entries(weight)
    wvec = entries[:3]
    s = entries[3]
    atlas = chart_atlas(entries)
    for k in (source, target):
        if not atlas.has_chart(k):
            raise ValueError(f"chart {k} does not exist at weight {entries}")
    if source == target:
        coords = atlas.coords(source)
        return TransitionMap(source, target, coords,
                             tuple(Expr(c.sym) for c in coords))

    def ipow(base: sp.Expr, exponent: Fraction) -> sp.Expr:
        if exponent.denominator != 1:
            raise NonIntegerPower(
                f"chart {source} -> {target} needs exponent {exponent}"
            )
        return base ** int(exponent)

    ins = atlas.coords(source)
    if source == 0:
        vt = ins[target - 1].sym
        wt = wvec[target - 1]
        outputs = []
        for j in range(3):
            if j == target - 1:
                continue
            outputs.append(Expr.from_sympy(
                ins[j].sym * ipow(vt, Fraction(-wvec[j], wt))))
        outputs.append(Expr.from_sympy(ipow(vt, Fraction(-s, wt))))
        return TransitionMap(source, target, ins, tuple(outputs))

    base = source - 1
    others = [j for j in range(3) if j != base]
    value = {base: sp.Integer(1), others[0]: ins[0].sym, others[1]: ins[1].sym}
    eps = ins[2].sym
    if target == 0:
        outputs = [
            Expr.from_sympy(value[j] * ipow(eps, Fraction(-wvec[j], s)))
            for j in range(3)
        ]
        return TransitionMap(source, target, ins, tuple(outputs))

    tbase = target - 1
    wt = wvec[tbase]
    ct = value[tbase]
    outputs = []
    for j in range(3):
        if j == tbase:
            continue
        outputs.append(Expr.from_sympy(
            value[j] * ipow(ct, Fraction(-wvec[j], wt))))
    outputs.append(Expr.from_sympy(ipow(ct, Fraction(-s, wt)) * eps))
    return TransitionMap(source, target, ins, tuple(outputs))


def transition_point(weight, source: int, target: int, point) -> tuple[complex, ...]:
    """Numeric chart change; boundary points of the overlap are an error."""
    tmap = transition_map(weight, source, target)
    if len(point) != len(tmap.inputs):
        raise ValueError(f"expected {len(tmap.inputs)} coordinates")
    bindings = {sym: complex(v) for sym, v in zip(tmap.inputs, point)}
    out = []
    for comp in tmap.outputs:
        try:
            out.append(comp.eval(bindings))
        except PoleAtPoint:
            raise OnOverlapBoundary(
                f"chart {source} point {tuple(point)} leaves chart {target}"
            ) from None
    return tuple(out)


def find_fixed_points(vf: VectorField3, divisor_only: bool = True):
    """Fixed points of a chart flow on the divisor eps = 0.

    Candidates from the cleared polynomial field are validated against the
    uncleared rational flow, which removes the loci manufactured by
    denominator clearing.  One-parameter families come back with the free
    coordinate replaced by the symbol c.
    """
    c1, c2, ceps = (c.sym for c in vf.coords)
    comps = [comp.as_sympy() for comp in vf.components]
    if not divisor_only:
        sols = sp.solve([sp.expand(f) for f in comps], [c1, c2, ceps], dict=True)
        records = [_record(vf, sol, (c1, c2, ceps)) for sol in sols]
        return tuple(rec for rec in records if rec is not None)
    on_divisor = [sp.expand(f.subs(ceps, 0)) for f in comps[:2]]
    if all(f == 0 for f in on_divisor):
        raise PositiveDimensionalUnexpected(
            f"{vf.system} chart {vf.chart}: the whole divisor is fixed"
        )
    sols = sp.solve(on_divisor, [c1, c2], dict=True)
    records = []
    for sol in sols:
        sol = dict(sol)
        sol[ceps] = sp.Integer(0)
        rec = _record(vf, sol, (c1, c2, ceps))
        if rec is not None:
            records.append(rec)
    records.sort(key=lambda rec: str(rec.location))
    return tuple(records)


def _record(vf: VectorField3, sol: dict, syms) -> FixedPointRecord | None:
    c1, c2, ceps = syms
    free = [s for s in (c1, c2) if s not in sol]
    if len(free) > 1:
        raise PositiveDimensionalUnexpected(
            f"{vf.system} chart {vf.chart}: fixed locus of dimension 2"
        )
    location = []
    rename = {free[0]: FREE_PARAM} if free else {}
    for s in (c1, c2, ceps):
        v = sol.get(s, s)
        location.append(sp.simplify(v.subs(rename) if rename else v))
    subs = dict(zip((c1, c2, ceps), location))
    for raw in vf.raw_components:
        e = sp.cancel(raw.as_sympy())
        n, d = sp.fraction(e)
        dval = sp.simplify(d.subs(subs, simultaneous=True))
        if dval == 0:
            return None  # an artifact of the clearing, not a true rest point
        if sp.simplify(n.subs(subs, simultaneous=True)) != 0:
            return None
    jac, eigs = jacobian_eigen(vf, tuple(location))
    if free:
        kind = "family"
    elif vf.chart == 3 or sp.simplify(location[_z_slot(vf.chart)]) != 0:
        kind = "irregular-singular"
    else:
        kind = "movable-pole"
    return FixedPointRecord(
        chart=vf.chart,
        location=tuple(Expr.from_sympy(v) for v in location),
        jacobian=jac,
        eigenvalues=eigs,
        classification=kind,
    )


def _z_slot(chart: int) -> int:
    # which chart coordinate carries z: Z1, Z2, or (chart 3) none
    return 1 if chart in (1, 2) else -1


def jacobian_eigen(vf: VectorField3, location):
    """Jacobian of the cleared field at a point, with its eigenvalues."""
    syms = [c.sym for c in vf.coords]
    loc = [v.as_sympy() if isinstance(v, Expr) else sp.sympify(v) for v in location]
    subs = dict(zip(syms, loc))
    rows = []
    for comp in vf.components:
        e = comp.as_sympy()
        rows.append([
            sp.simplify(sp.diff(e, s).subs(subs, simultaneous=True))
            for s in syms
        ])
    matrix = sp.Matrix(rows)
    eigs = []
    for value, mult in matrix.eigenvals().items():
        eigs.extend([sp.simplify(value)] * mult)
    eigs.sort(key=sp.default_sort_key)
    jac = tuple(tuple(Expr.from_sympy(v) for v in row) for row in rows)
    return jac, tuple(Expr.from_sympy(v) for v in eigs)
