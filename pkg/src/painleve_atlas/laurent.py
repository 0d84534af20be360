"""Formal Laurent-series solutions about a movable singular point.

Series live in the local coordinate T = z - z0, with z0 a free symbol kept
away from the fixed singular values of the equation, so prefactors evaluated
at z0 stay invertible.  A balance is a pair of integer leading orders with
nonzero leading coefficients solving the dominant part of the system; it is
grown one index at a time by solving a 2x2 linear block per step.  At a
resonant step the block degenerates, the compatibility condition is checked,
and a fresh arbitrary constant enters along the kernel direction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import sympy as sp

from .errors import NoBalance, ResonanceObstruction
from .expr import PARAMETER, POLE_POSITION, VARIABLE, Expr, Symbol, serialize
from .systems import PainleveSystem, _constraint_solution
from .weights import compute_exponents, fit_weight
from .wps import FREE_PARAM, chart_atlas, field_in_chart, find_fixed_points

POLE = Symbol("z0", POLE_POSITION)
ARBITRARY = Symbol("C", PARAMETER)
LOCAL = Symbol("T", VARIABLE)


@dataclass(frozen=True)
class NoLimit:
    """Returned when a series does not approach a point of the atlas."""

    reason: str = ""


@dataclass(frozen=True)
class LaurentSolution:
    """A truncated pole expansion x = sum A_n T^(n-rho_x), y likewise.

    leading_orders holds (rho_x, rho_y) and coeffs[n] the pair (A_n, B_n).
    The index frame is chosen so both components step together: the start
    orders sum to -(deg x + deg y), a component whose true order sits higher
    being padded with leading zeros.  That alignment is what makes each step
    a single 2x2 block and places the arbitrary constant at one well-defined
    index, kappa, for regular and non-regular balances alike.
    """

    system: PainleveSystem
    leading_orders: tuple[int, int]
    coeffs: tuple[tuple[Expr, Expr], ...]
    regular: bool
    kappa: int | None = None
    free_param_index: int | None = None
    origin: str = "direct"

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def pair_at(self, n: int) -> tuple[Expr, Expr]:
        return self.coeffs[n]

    @property
    def x_leading(self) -> tuple[int, Expr]:
        """True leading (order, coefficient) of the first component."""
        return self._leading(0)

    @property
    def y_leading(self) -> tuple[int, Expr]:
        return self._leading(1)

    def _leading(self, i: int) -> tuple[int, Expr]:
        base = -self.leading_orders[i]
        for n, pair in enumerate(self.coeffs):
            if pair[i]:
                return base + n, pair[i]
        raise ValueError("component vanishes through the stored truncation")

    def truncated(self, t=None) -> tuple[sp.Expr, sp.Expr]:
        """The truncation as a pair of sympy expressions in t (default T)."""
        tv = _local_symbol(t)
        out = []
        for i in (0, 1):
            base = -self.leading_orders[i]
            out.append(sp.Add(*[
                pair[i].as_sympy() * tv ** (base + n)
                for n, pair in enumerate(self.coeffs)
            ]))
        return out[0], out[1]


def _local_symbol(t) -> sp.Symbol:
    if t is None:
        return LOCAL.sym
    if isinstance(t, Symbol):
        return t.sym
    return sp.sympify(t)


def _system_data(sys: PainleveSystem):
    """Split each scaled component into denominator monomial and numerator terms."""
    x, y = (v.sym for v in sys.pair)
    z = sys.time.sym
    data = []
    for comp in sys.scaled_rhs:
        dpoly = sp.Poly(comp.den, x, y, z)
        if len(dpoly.terms()) != 1:
            raise ValueError(
                f"{sys.name}: component denominator is not a monomial"
            )
        (dexp, dcoeff), = dpoly.terms()
        terms = [
            (m[0], m[1], c) for m, c in sp.Poly(comp.num, x, y).terms()
        ]
        data.append((terms, dexp, dcoeff))
    return x, y, z, data


def _aligned_frame(o1: int, o2: int, p: int, q: int) -> tuple[int, int]:
    # Pad one start order so the pair sums to -(p+q); the symplectic pairing
    # of the local exponents then couples (A_n, B_n) in the same step.
    d = o1 + o2 + p + q
    if d <= 0:
        return o1, o2
    if o1 + p >= o2 + q:
        return o1 - d, o2
    return o1, o2 - d


def seed_balances(sys: PainleveSystem, weight=None,
                  search_bound: int = 6) -> tuple[LaurentSolution, ...]:
    """Find every pole-type leading behavior within the order bound.

    Each balance is returned as an order-zero LaurentSolution in its aligned
    index frame, marked regular when the frame start orders match the weight
    degrees (p, q).  Solutions are sorted by true leading orders, then by
    the serialized leading coefficients.
    """
    w = weight if weight is not None else fit_weight(compute_exponents(sys, "f"))
    p, q = w.p, w.q
    if search_bound < max(abs(p), abs(q)) + 2:
        raise ValueError(
            f"search_bound {search_bound} below max(|p|,|q|)+2 = "
            f"{max(abs(p), abs(q)) + 2}"
        )
    x, y, z, data = _system_data(sys)
    z0 = POLE.sym
    pf0 = sys.prefactor.as_sympy().subs(z, z0)
    lead_a, lead_b = sp.Symbol("_A0"), sp.Symbol("_B0")
    # solve the faces in constraint-reduced parameters, else balances that
    # factor only modulo the constraint come back as radicals
    reduce = ({} if sys.param_constraint is None
              else _constraint_solution(sys.param_constraint))

    found = []
    seen = set()
    for o1 in range(-search_bound, search_bound + 1):
        for o2 in range(-search_bound, search_bound + 1):
            if min(o1, o2) >= 0:
                continue
            faces = _face_system(data, pf0, z, z0, (o1, o2), lead_a, lead_b)
            if faces is None:
                continue
            if reduce:
                faces = [sp.expand(g.subs(reduce)) for g in faces]
            for sol in sp.solve(faces, [lead_a, lead_b], dict=True):
                va, vb = sol.get(lead_a), sol.get(lead_b)
                if va is None or vb is None:
                    continue
                if {lead_a, lead_b} & (va.free_symbols | vb.free_symbols):
                    continue
                va, vb = sp.cancel(va), sp.cancel(vb)
                if sys.vanishes(va) or sys.vanishes(vb):
                    continue
                key = (o1, o2, sp.srepr(va), sp.srepr(vb))
                if key in seen:
                    continue
                seen.add(key)
                found.append((o1, o2, va, vb))
    if not found:
        raise NoBalance(
            f"{sys.name}: no pole-type leading behavior with orders within "
            f"+/-{search_bound}"
        )

    sols = []
    for o1, o2, va, vb in found:
        b1, b2 = _aligned_frame(o1, o2, p, q)
        pair0 = (
            Expr.from_sympy(va) if b1 == o1 else Expr(0),
            Expr.from_sympy(vb) if b2 == o2 else Expr(0),
        )
        sol = LaurentSolution(
            system=sys,
            leading_orders=(-b1, -b2),
            coeffs=(pair0,),
            regular=(-b1, -b2) == (p, q),
        )
        # a padded seed is grown through the padding depth so the table
        # holds the true leading coefficient of both components
        depth = (o1 - b1) + (o2 - b2)
        if depth > 0:
            sol = extend_series(sol, sys, order=depth)
        sols.append(sol)
    sols.sort(key=_seed_key)
    return tuple(sols)


def _seed_key(sol: LaurentSolution):
    (ox, cx), (oy, cy) = sol.x_leading, sol.y_leading
    return ox, oy, serialize(cx), serialize(cy)


def _face_system(data, pf0, z, z0, orders, lead_a, lead_b):
    """Leading-order algebraic system for a candidate pair, or None."""
    faces = []
    for i, (terms, dexp, dcoeff) in enumerate(data):
        oi = orders[i]
        dshift = dexp[0] * orders[0] + dexp[1] * orders[1]
        monords = [m1 * orders[0] + m2 * orders[1] for m1, m2, _ in terms]
        cand = list(monords)
        if oi != 0:
            cand.append(dshift + oi - 1)
        if not cand:
            return None
        lam = min(cand)
        g = sp.Integer(0)
        if oi != 0 and dshift + oi - 1 == lam:
            g += (pf0 * oi * dcoeff * z0 ** dexp[2]
                  * lead_a ** dexp[0] * lead_b ** dexp[1]
                  * (lead_a, lead_b)[i])
        for (m1, m2, c), od in zip(terms, monords):
            if od == lam:
                g -= c.subs(z, z0) * lead_a ** m1 * lead_b ** m2
        g = sp.expand(g)
        # a single-monomial face forces a leading coefficient to vanish
        if len(sp.Add.make_args(g)) == 1:
            return None
        faces.append(g)
    return faces


def _zseries(c: sp.Expr, z, z0, t) -> list[sp.Expr]:
    shifted = sp.expand(c.subs(z, z0 + t))
    if not shifted.has(t):
        return [shifted]
    poly = sp.Poly(shifted, t)
    coeffs = [sp.Integer(0)] * (poly.degree() + 1)
    for (k,), val in poly.terms():
        coeffs[k] = val
    return coeffs


# -- coefficient arithmetic --
#
# A series coefficient is held as a tuple (P, i, j, E) standing for
# P / (z0**i * (z0-1)**j * E), with P and E expanded ring polynomials.
# Recursion steps only ever divide by block determinants and pivot entries,
# whose nonmonomial factors cancel into the numerator for every catalog
# balance, so E stays 1 on those runs; it exists so a division that does
# not come out exact still has somewhere to go.


class _CoeffRing:
    """Polynomial-ring context shared by one series extension."""

    def __init__(self, names):
        self.ring, gens = sp.xring(" ".join(names), sp.QQ)
        self.gen = dict(zip(names, gens))
        self.gidx = {nm: k for k, nm in enumerate(names)}
        self.pone = self.ring.one
        self.z0p = self.gen[POLE.name]
        self.zm1 = self.z0p - 1
        self.zi = names.index(POLE.name)
        self.zero = (self.ring.zero, 0, 0, self.pone)
        self.one = (self.pone, 0, 0, self.pone)

    def mono(self, i, j):
        m = self.pone
        if i:
            m = self.z0p ** i
        if j:
            m = m * self.zm1 ** j
        return m

    def shift_z0(self, P, k):
        """Exact P / z0**k as a monomial shift on the term dict."""
        zi = self.zi
        return self.ring.from_dict({
            m[:zi] + (m[zi] - k,) + m[zi + 1:]: c for m, c in P.iterterms()
        })

    def quo_zm1(self, P):
        """Exact quotient P / (z0 - 1), or None when it does not divide.

        Synthetic division along the z0 exponent, one pass per monomial
        group; avoids the generic long division, which walks the whole
        polynomial once per quotient term.
        """
        zi = self.zi
        dom = self.ring.domain
        groups = {}
        for m, c in P.iterterms():
            key = m[:zi] + (0,) + m[zi + 1:]
            groups.setdefault(key, {})[m[zi]] = c
        out = {}
        for key, uni in groups.items():
            total = dom.zero
            for c in uni.values():
                total += c
            if total:
                return None
            acc = dom.zero
            for d in range(max(uni), 0, -1):
                acc += uni.get(d, dom.zero)
                if acc:
                    out[key[:zi] + (d - 1,) + key[zi + 1:]] = acc
        return self.ring.from_dict(out)

    def val(self, num: sp.Expr, den: sp.Expr):
        """Value from a canonical sympy pair; den factors are peeled."""
        P = self.ring.from_expr(num)
        D = self.ring.from_expr(den)
        i = j = 0
        if not P:
            return self.zero
        k = min(m[self.zi] for m in D.itermonoms())
        if k:
            D, i = self.shift_z0(D, k), k
        while True:
            q = self.quo_zm1(D)
            if q is None:
                break
            D, j = q, j + 1
        if len(D) == 1 and not any(next(iter(D.itermonoms()))):
            c = D.LC
            return (P.quo_ground(c), i, j, self.pone) if c != 1 else (P, i, j, self.pone)
        return (P, i, j, D)

    def add(self, u, v):
        P, i, j, E = u
        Q, a, b, F = v
        if not Q:
            return u
        if not P:
            return v
        if i == a and j == b and E == F:
            return (P + Q, i, j, E)
        i2, j2 = max(i, a), max(j, b)
        pm, qm = self.mono(i2 - i, j2 - j), self.mono(i2 - a, j2 - b)
        if E == F:
            return (P * pm + Q * qm, i2, j2, E)
        return (P * pm * F + Q * qm * E, i2, j2, E * F)

    def sub(self, u, v):
        return self.add(u, self.neg(v))

    def neg(self, u):
        return (-u[0], u[1], u[2], u[3])

    def mul(self, u, v):
        P, i, j, E = u
        Q, a, b, F = v
        if not P or not Q:
            return self.zero
        if F == self.pone:
            return (P * Q, i + a, j + b, E)
        if E == self.pone:
            return (P * Q, i + a, j + b, F)
        return (P * Q, i + a, j + b, E * F)

    def scale(self, u, c):
        if not u[0] or not c:
            return self.zero
        q = sp.QQ(c.p, c.q) if isinstance(c, sp.Rational) else sp.QQ(c)
        return (u[0].mul_ground(q), u[1], u[2], u[3])

    def div(self, u, v):
        """u / v; exact polynomial division when it holds, else E grows."""
        P, i, j, E = u
        Q, a, b, F = v
        if not Q:
            raise ZeroDivisionError("division by zero series coefficient")
        if not P:
            return self.zero
        # pole-monomial content of the divisor moves to the tracked powers
        k = min(m[self.zi] for m in Q.itermonoms())
        if k:
            Q = self.shift_z0(Q, k)
        l = 0
        while True:
            q = self.quo_zm1(Q)
            if q is None:
                break
            Q, l = q, l + 1
        num = P if F == self.pone else P * F
        if len(Q) == 1 and not any(next(iter(Q.itermonoms()))):
            c = Q.LC
            if c != 1:
                num = num.quo_ground(c)
        else:
            q, r = num.div(Q)
            if not r:
                num = q
            else:
                E = E * Q if E != self.pone else Q
        i, j = i - a + k, j - b + l
        if i < 0:
            num = num * self.z0p ** (-i)
            i = 0
        if j < 0:
            num = num * self.zm1 ** (-j)
            j = 0
        return self.norm((num, i, j, E))

    def norm(self, u):
        """Strip pole-monomial content and shared E factors."""
        P, i, j, E = u
        if not P:
            return self.zero
        if i:
            k = min(min(m[self.zi] for m in P.itermonoms()), i)
            if k:
                P, i = self.shift_z0(P, k), i - k
        while j:
            q = self.quo_zm1(P)
            if q is None:
                break
            P, j = q, j - 1
        if E != self.pone:
            g = P.gcd(E)
            if g != self.pone:
                P, E = P.quo(g), E.quo(g)
            if len(E) == 1 and not any(next(iter(E.itermonoms()))):
                c = E.LC
                P, E = P.quo_ground(c), self.pone
        return (P, i, j, E)

    def to_expr(self, u):
        u = self.norm(u)
        P, i, j, E = u
        if not P:
            return Expr._raw(sp.Integer(0), sp.Integer(1))
        den = self.mono(i, j)
        if E != self.pone:
            den = den * E
        if den == self.pone:
            return Expr._raw(P.as_expr(), sp.Integer(1))
        best = max(den.itermonoms(), key=_grlex_key)
        lc = den[best]
        if lc != 1:
            P = P.quo_ground(lc)
            den = den.quo_ground(lc)
        return Expr._raw(P.as_expr(), den.as_expr())


def _grlex_key(monom):
    return (sum(monom), monom)


def _group_sum(cr, parts):
    """Sum values grouped by denominator, aligning each group only once."""
    groups = {}
    for P, i, j, E in parts:
        key = (i, j, E)
        got = groups.get(key)
        groups[key] = P if got is None else got + P
    total = cr.zero
    for (i, j, E), P in groups.items():
        if P:
            total = cr.add(total, (P, i, j, E))
    return total


def _series_sum(cr, u, v, r):
    """Value of sum_k u[k]*v[r-k]; out-of-range indices contribute nothing."""
    parts = []
    for k in range(max(0, r + 1 - len(v)), min(r + 1, len(u))):
        a, b = u[k], v[r - k]
        if a[0] and b[0]:
            parts.append(cr.mul(a, b))
    return _group_sum(cr, parts)


def _short_chain(cr, short, full, r):
    """Value at index r of (short list) * (full list), short on the left."""
    parts = []
    for k, s in enumerate(short):
        if k > r or r - k >= len(full):
            continue
        if not s[0]:
            continue
        parts.append(cr.mul(s, full[r - k]))
    return _group_sum(cr, parts)


def _pair_plan(pairs):
    """Chain each needed (m1, m2) power product to a stored parent."""
    need = {p for p in pairs if p[0] + p[1] >= 2}
    plan = []
    seen = {(1, 0), (0, 1)}
    while need:
        p = min(need, key=lambda q: (q[0] + q[1], q))
        need.discard(p)
        m1, m2 = p
        if p in seen:
            continue
        for parent, axis in (((m1 - 1, m2), 0), ((m1, m2 - 1), 1)):
            if parent in seen or parent in need:
                plan.append((p, parent, axis))
                seen.add(p)
                break
        else:
            parent = (m1 - 1, m2) if m1 else (m1, m2 - 1)
            need.add(parent)
            need.add(p)
    plan.sort(key=lambda e: (e[0][0] + e[0][1], e[0]))
    return plan


def _vpow(cr, base, k):
    out = cr.one
    for _ in range(k):
        out = cr.mul(out, base)
    return out


def _block_rows(cr, pre, lead, b1, b2, xp, yp, zpf0):
    """Step matrix entries as (constant, slope) value pairs, linear in n.

    Only face terms couple to the step unknowns, so the whole matrix follows
    from the index-zero data; the slope comes from the derivative slot.
    """
    x0, y0 = xp[1], yp[1]
    rows = []
    for i, (dexp, dstart, tser) in enumerate(pre):
        bi = (b1, b2)[i]
        vme = (x0, y0)[i]
        cent = [cr.zero, cr.zero]
        slope = [cr.zero, cr.zero]
        if dstart == lead[i]:
            base = zpf0[i]
            slope[i] = cr.mul(base, cr.mul(xp[dexp[0]], yp[dexp[1]]))
            cent[i] = cr.scale(slope[i], bi)
            for jj in (0, 1):
                if dexp[jj]:
                    other = cr.mul(xp[dexp[0] - (jj == 0)],
                                   yp[dexp[1] - (jj == 1)])
                    cent[jj] = cr.add(
                        cent[jj],
                        cr.scale(cr.mul(cr.mul(base, vme), other),
                                 bi * dexp[jj]))
        for m1, m2, cser, start in tser:
            if start != lead[i]:
                continue
            if m1:
                cent[0] = cr.sub(
                    cent[0],
                    cr.scale(cr.mul(cser[0], cr.mul(xp[m1 - 1], yp[m2])), m1))
            if m2:
                cent[1] = cr.sub(
                    cent[1],
                    cr.scale(cr.mul(cser[0], cr.mul(xp[m1], yp[m2 - 1])), m2))
        rows.append(((cent[0], slope[0]), (cent[1], slope[1])))
    return rows


def extend_series(sol: LaurentSolution, sys: PainleveSystem | None = None,
                  order: int = 8) -> LaurentSolution:
    """Grow the coefficient table through the given index.

    Each step solves a 2x2 linear block for the next coefficient pair.  The
    block matrix is linear in the step index and built once from the leading
    data; power products of the two series are cached and extended one index
    per step, so a step costs one convolution pass per cached product.  A
    step with vanishing block determinant is a resonance: the data must
    satisfy the rank-one compatibility condition (otherwise
    ResonanceObstruction) and a fresh constant enters along the kernel.
    The kernel is scaled to unit first component when that division stays
    inside the pole-monomial denominator form, and kept as a cleared
    polynomial pair otherwise, so coefficient denominators never acquire
    factors beyond powers of z0 and z0 - 1.
    """
    sysm = sys if sys is not None else sol.system
    if order <= sol.order:
        return sol
    data = _system_data(sysm)[3]
    z, z0, t = sysm.time.sym, POLE.sym, LOCAL.sym
    b1 = -sol.leading_orders[0]
    b2 = -sol.leading_orders[1]
    reduce = ({} if sysm.param_constraint is None
              else _constraint_solution(sysm.param_constraint))

    def red(e):
        return sp.expand(e.subs(reduce)) if reduce else e

    loaded = [[Expr.from_sympy(red(p[i].as_sympy())) for p in sol.coeffs]
              for i in (0, 1)]
    base_syms = ({z0.name}
                 | {p.name for p in sysm.params}
                 - {s.name for s in reduce})
    for col in loaded:
        for v in col:
            base_syms |= {s.name for s in v.free_symbols}

    # the resonant steps are known in advance from the index-linear block,
    # so exactly one fresh constant generator is reserved per resonance
    start = len(sol.coeffs)
    probe = _CoeffRing(sorted(base_syms))
    head = [[col[0]] for col in loaded]
    pblock = _prepare(probe, sysm, data, red, z, z0, t, b1, b2, head).block
    resonant = [n for n in range(start, order + 1)
                if not _det_at(probe, pblock, n)[0]]
    fresh = {}
    k, idx = 0, 1
    while k < len(resonant):
        cand = ARBITRARY.name if idx == 1 else f"{ARBITRARY.name}{idx}"
        idx += 1
        if cand in base_syms:
            continue
        fresh[resonant[k]] = cand
        k += 1

    cr = _CoeffRing(sorted(base_syms | set(fresh.values())))
    st = _prepare(cr, sysm, data, red, z, z0, t, b1, b2, loaded)
    ax, ay = st.ax, st.ay
    kappa, fpi = sol.kappa, sol.free_param_index

    for n in range(start, order + 1):
        # phase one: append known parts in dependency order; out-of-range
        # accesses drop exactly the linear couplings to the step unknowns
        for pair, parent, axis in st.plan:
            src = _pair_list(st.lists, ax, ay, parent)
            st.lists[pair].append(_series_sum(cr, src, (ax, ay)[axis], n))
        for i in (0, 1):
            if st.md[i] is not None:
                st.md[i].append(_series_sum(cr, st.dv[i], st.dpair[i], n))

        rhs = []
        for i, (dexp, dstart, tser) in enumerate(st.pre):
            tot = cr.zero
            rd = st.lead[i] + n - dstart
            if rd >= 0:
                mdl = st.md[i] if st.md[i] is not None else st.dv[i]
                tot = _short_chain(cr, st.zpf[i], mdl, rd)
            for m1, m2, cser, tstart in tser:
                rt = st.lead[i] + n - tstart
                if rt < 0:
                    continue
                if m1 + m2 == 0:
                    if rt < len(cser):
                        tot = cr.sub(tot, cser[rt])
                    continue
                pl = _pair_list(st.lists, ax, ay, (m1, m2))
                tot = cr.sub(tot, _short_chain(cr, cser, pl, rt))
            rhs.append(cr.neg(tot))

        m11 = cr.add(st.block[0][0][0], cr.scale(st.block[0][0][1], n))
        m12 = cr.add(st.block[0][1][0], cr.scale(st.block[0][1][1], n))
        m21 = cr.add(st.block[1][0][0], cr.scale(st.block[1][0][1], n))
        m22 = cr.add(st.block[1][1][0], cr.scale(st.block[1][1][1], n))
        det = cr.sub(cr.mul(m11, m22), cr.mul(m12, m21))
        if det[0]:
            av = cr.div(cr.sub(cr.mul(rhs[0], m22), cr.mul(rhs[1], m12)), det)
            bv = cr.div(cr.sub(cr.mul(m11, rhs[1]), cr.mul(m21, rhs[0])), det)
        else:
            cgen = (cr.gen[fresh[n]], 0, 0, cr.pone)
            av, bv = _resonant_step(cr, (m11, m12, m21, m22), rhs, n, cgen)
            if kappa is None:
                kappa, fpi = n, n
        ax.append(av)
        ay.append(bv)
        st.dv[0].append(cr.scale(av, b1 + n))
        st.dv[1].append(cr.scale(bv, b2 + n))

        # phase two: add the dropped unknown couplings at the new index
        for pair, parent, axis in st.plan:
            st.lists[pair][n] = cr.add(
                st.lists[pair][n], _pair_fix(cr, st.xp, st.yp, pair, av, bv))
        for i in (0, 1):
            if st.md[i] is None:
                continue
            d1, d2 = st.pre[i][0][0], st.pre[i][0][1]
            own = cr.scale(
                cr.mul(cr.mul(st.xp[d1], st.yp[d2]), (av, bv)[i]),
                (b1, b2)[i] + n)
            cross = cr.mul(st.dv[i][0],
                           _pair_fix(cr, st.xp, st.yp, (d1, d2), av, bv))
            st.md[i][n] = cr.add(st.md[i][n], cr.add(own, cross))

    coeffs = tuple(
        (cr.to_expr(a), cr.to_expr(b)) for a, b in zip(ax, ay)
    )
    return replace(sol, coeffs=coeffs, kappa=kappa, free_param_index=fpi)


def _pair_list(lists, ax, ay, pair):
    if pair == (1, 0):
        return ax
    if pair == (0, 1):
        return ay
    return lists[pair]


def _pair_fix(cr, xp, yp, pair, av, bv):
    """Linear coupling of a power product to the step unknowns."""
    m1, m2 = pair
    fix = cr.zero
    if m1:
        fix = cr.scale(cr.mul(cr.mul(xp[m1 - 1], yp[m2]), av), m1)
    if m2:
        fix = cr.add(fix, cr.scale(
            cr.mul(cr.mul(xp[m1], yp[m2 - 1]), bv), m2))
    return fix


@dataclass
class _SeriesState:
    ax: list
    ay: list
    dv: tuple
    pre: list
    lead: list
    zpf: list
    plan: list
    lists: dict
    md: list
    dpair: list
    block: list
    xp: list
    yp: list


def _prepare(cr, sysm, data, red, z, z0, t, b1, b2, loaded):
    """Convert the cleared system and the stored table into ring values."""
    def cv(e: Expr):
        return cr.val(e.num, e.den)

    ax = [cv(v) for v in loaded[0]]
    ay = [cv(v) for v in loaded[1]]
    pfser = [cv(Expr.from_sympy(c))
             for c in _zseries(red(sysm.prefactor.as_sympy()), z, z0, t)]
    zser = [cv(Expr.from_sympy(z0)), cr.one]

    pre, lead, pairs, zpf = [], [], set(), []
    for i, (terms, dexp, dcoeff) in enumerate(data):
        bi = (b1, b2)[i]
        dstart = dexp[0] * b1 + dexp[1] * b2 + bi - 1
        tser = []
        for m1, m2, c in terms:
            c = red(c)
            if c == 0:
                continue
            cser = [cv(Expr.from_sympy(cc)) for cc in _zseries(c, z, z0, t)]
            tser.append((m1, m2, cser, m1 * b1 + m2 * b2))
            pairs.add((m1, m2))
        pre.append((dexp, dstart, tser))
        lead.append(min([dstart] + [s for *_u, s in tser]))
        pairs.add((dexp[0], dexp[1]))
        # the denominator coefficient and z powers fold into the prefactor
        dcv = cv(Expr.from_sympy(red(sp.sympify(dcoeff))))
        short = [cr.mul(dcv, s) for s in pfser]
        for _ in range(dexp[2]):
            short = _list_conv(cr, zser, short)
        zpf.append(short)

    plan = _pair_plan(pairs)
    mpow = 3
    for m1, m2 in pairs:
        mpow = max(mpow, m1, m2)
    xp = [_vpow(cr, ax[0], m) for m in range(mpow + 1)]
    yp = [_vpow(cr, ay[0], m) for m in range(mpow + 1)]

    depth = len(ax)
    lists = {}
    for pair, parent, axis in plan:
        src = _pair_list(lists, ax, ay, parent)
        fac = (ax, ay)[axis]
        lists[pair] = [_series_sum(cr, src, fac, r) for r in range(depth)]

    dv = ([cr.scale(v, b1 + m) for m, v in enumerate(ax)],
          [cr.scale(v, b2 + m) for m, v in enumerate(ay)])
    md, dpair = [], []
    for i, (dexp, *_u) in enumerate(pre):
        if dexp[0] + dexp[1] == 0:
            md.append(None)
            dpair.append(None)
            continue
        dp = _pair_list(lists, ax, ay, (dexp[0], dexp[1]))
        dpair.append(dp)
        md.append([_series_sum(cr, dv[i], dp, r) for r in range(depth)])

    zpf0 = [s[0] for s in zpf]
    block = _block_rows(cr, pre, lead, b1, b2, xp, yp, zpf0)
    return _SeriesState(ax, ay, dv, pre, lead, zpf, plan, lists,
                        md, dpair, block, xp, yp)


def _list_conv(cr, u, v):
    out = [cr.zero] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        if not a[0]:
            continue
        for j, b in enumerate(v):
            if not b[0]:
                continue
            out[i + j] = cr.add(out[i + j], cr.mul(a, b))
    return out


def _det_at(cr, block, n):
    m11 = cr.add(block[0][0][0], cr.scale(block[0][0][1], n))
    m12 = cr.add(block[0][1][0], cr.scale(block[0][1][1], n))
    m21 = cr.add(block[1][0][0], cr.scale(block[1][0][1], n))
    m22 = cr.add(block[1][1][0], cr.scale(block[1][1][1], n))
    return cr.sub(cr.mul(m11, m22), cr.mul(m12, m21))


def _pole_monomial(cr, v):
    """True when the numerator is a single term times a power of z0 - 1.

    Dividing by such a value never leaves the tracked-denominator form, so
    these are the safe pivots for the resonant solve.
    """
    P = v[0]
    if not P:
        return False
    k = min(mo[cr.zi] for mo in P.itermonoms())
    if k:
        P = cr.shift_z0(P, k)
    while len(P) > 1:
        q = cr.quo_zm1(P)
        if q is None:
            return False
        P = q
    return True


def _kernel_direction(cr, prow):
    """Null direction of the pivot row, cleared to a small polynomial pair.

    Normalized to (1, q) or (0, 1) whenever the needed division is safe;
    otherwise the direction keeps polynomial entries so the arbitrary
    constant never drags a non-pole denominator through the table.
    """
    k0, k1 = cr.norm(prow[1]), cr.norm(cr.neg(prow[0]))
    if not k0[0]:
        return cr.zero, cr.one
    if not k1[0]:
        return cr.one, cr.zero
    if _pole_monomial(cr, k0):
        return cr.one, cr.div(k1, k0)
    # clear denominators against each other, then shared content
    i2, j2 = max(k0[1], k1[1]), max(k0[2], k1[2])
    P = k0[0] * cr.mono(i2 - k0[1], j2 - k0[2])
    Q = k1[0] * cr.mono(i2 - k1[1], j2 - k1[2])
    if k0[3] != k1[3]:
        P, Q = P * k1[3], Q * k0[3]
    s = min(min(mo[cr.zi] for mo in P.itermonoms()),
            min(mo[cr.zi] for mo in Q.itermonoms()))
    if s:
        P, Q = cr.shift_z0(P, s), cr.shift_z0(Q, s)
    while True:
        p2, q2 = cr.quo_zm1(P), cr.quo_zm1(Q)
        if p2 is None or q2 is None:
            break
        P, Q = p2, q2
    c = P[max(P.itermonoms(), key=_grlex_key)]
    if c != 1:
        P, Q = P.quo_ground(c), Q.quo_ground(c)
    return cr.norm((P, 0, 0, cr.pone)), cr.norm((Q, 0, 0, cr.pone))


def _resonant_step(cr, m, rhs, n, cgen):
    m11, m12, m21, m22 = m
    r1, r2 = rhs

    def show(u):
        return cr.to_expr(u).as_sympy()

    if not any(e[0] for e in m):
        raise ResonanceObstruction(n, (show(r1), show(r2)))
    # rank one: keep the pivot row, the eliminated row must be consistent
    if m11[0] or m12[0]:
        prow, pr, orh, ofac = (m11, m12), r1, r2, (m21, m22)
    else:
        prow, pr, orh, ofac = (m21, m22), r2, r1, (m11, m12)
    jp = 0 if prow[0][0] else 1
    compat = cr.sub(cr.mul(orh, prow[jp]), cr.mul(ofac[jp], pr))
    if compat[0]:
        raise ResonanceObstruction(n, show(cr.norm(compat)))
    kern = _kernel_direction(cr, prow)
    # particular part along a division-safe pivot component when one exists
    if prow[1][0] and (_pole_monomial(cr, prow[1]) or not prow[0][0]
                       or not _pole_monomial(cr, prow[0])):
        part = (cr.zero, cr.div(pr, prow[1]))
    else:
        part = (cr.div(pr, prow[0]), cr.zero)
    av = cr.norm(cr.add(part[0], cr.mul(cgen, kern[0])))
    bv = cr.norm(cr.add(part[1], cr.mul(cgen, kern[1])))
    return av, bv


def residual_orders(sol: LaurentSolution,
                    sys: PainleveSystem | None = None,
                    values: dict | None = None) -> tuple[int | None, int | None]:
    """Lowest T-order with nonvanishing coefficient per cleared equation.

    Substitutes the stored truncation directly into den*pf*v' - num, so it
    checks the coefficient table through an independent code path.  None
    means the residual vanished through the inspected window.

    values maps free-parameter names to numbers; instantiating them (while
    z0 stays symbolic) keeps the fully expanded check affordable for the
    larger systems at order 8.  A vanishing specialization can only raise
    the reported order, never lower it.
    """
    sysm = sys if sys is not None else sol.system
    x, y, z, data = _system_data(sysm)
    z0, t = POLE.sym, LOCAL.sym
    xt, yt = sol.truncated(t)
    pf = sysm.prefactor.as_sympy().subs(z, z0 + t)
    zloc = z0 + t
    if values:
        reduce = ({} if sysm.param_constraint is None
                  else _constraint_solution(sysm.param_constraint))
        sub = {sp.Symbol(k): sp.sympify(v) for k, v in values.items()}
        xt, yt = xt.subs(reduce).subs(sub), yt.subs(reduce).subs(sub)
        pf = pf.subs(reduce).subs(sub)
        zloc = zloc.subs(sub)
    out = []
    for i, comp in enumerate(sysm.scaled_rhs):
        v = (xt, yt)[i]
        den, num = comp.den, comp.num
        if values:
            den, num = den.subs(reduce).subs(sub), num.subs(reduce).subs(sub)
        den = den.subs({x: xt, y: yt, z: zloc})
        num = num.subs({x: xt, y: yt, z: zloc})
        res = sp.expand(den * pf * sp.diff(v, t) - num)
        orders = {}
        for term in sp.Add.make_args(res):
            c, k = term.as_coeff_exponent(t)
            orders[k] = orders.get(k, sp.Integer(0)) + c
        low = None
        for k in sorted(orders):
            if not sysm.vanishes(orders[k]):
                low = int(k)
                break
        out.append(low)
    return out[0], out[1]


def limit_point(sol: LaurentSolution, atlas=None):
    """Fixed point the series approaches as T -> 0, or NoLimit.

    A chart bounds the series when its base coordinate tends to zero on the
    divisor; among those the chart with the smallest orbifold order is
    preferred.  The limit is matched against the chart's fixed points, and a
    free family parameter is pinned by the matching (typically to z0).
    """
    sysm = sol.system
    if atlas is None:
        atlas = chart_atlas(fit_weight(compute_exponents(sysm, "f")))
    entries = tuple(atlas.weight)
    try:
        mx, cx = sol.x_leading
        my, cy = sol.y_leading
    except ValueError:
        return NoLimit("a component vanishes through the truncation")
    m = (mx, my, 0)
    c = (cx.as_sympy(), cy.as_sympy(), POLE.sym)

    cands = [
        k for k in (1, 2, 3)
        if atlas.has_chart(k) and Fraction(m[k - 1], entries[k - 1]) < 0
    ]
    cands.sort(key=lambda k: (abs(entries[k - 1]), k))
    for k in cands:
        vals = _chart_limit(m, c, entries, k)
        if vals is None:
            continue
        vf = field_in_chart(sysm, atlas.weight, k)
        for rec in find_fixed_points(vf):
            hit = _family_match(sysm, rec, vals)
            if hit is not None:
                return hit
    if not cands:
        return NoLimit("the series leaves every chart of the atlas")
    return NoLimit("no chart limit lands on a fixed point")


def _chart_limit(m, c, entries, k):
    wk, mk = entries[k - 1], m[k - 1]
    out = []
    for j in (0, 1, 2):
        if j == k - 1:
            continue
        wj = entries[j]
        e = Fraction(m[j]) - Fraction(wj * mk, wk)
        if e < 0:
            return None
        if e > 0:
            out.append(sp.Integer(0))
            continue
        if wj == 0:
            out.append(c[j])
            continue
        val = sp.cancel(c[j] * c[k - 1] ** sp.Rational(-wj, wk))
        if any(
            pw.exp.is_Rational and not pw.exp.is_Integer
            for pw in val.atoms(sp.Pow)
        ):
            # the limit needs a branch choice in this chart; try another
            return None
        out.append(val)
    out.append(sp.Integer(0))
    return tuple(out)


def _family_match(sysm, rec, vals):
    binding = None
    for le, lv in zip(rec.location, vals):
        d = sp.expand(le.as_sympy() - lv)
        if FREE_PARAM in d.free_symbols:
            here = {sp.cancel(s) for s in sp.solve(d, FREE_PARAM)}
            binding = here if binding is None else binding & here
            if not binding:
                return None
        elif not sysm.vanishes(d):
            return None
    if binding is None:
        return rec
    val = sorted(binding, key=sp.default_sort_key)[0]
    sub = {FREE_PARAM.name: Expr.from_sympy(val)}
    return replace(
        rec,
        location=tuple(e.subs(sub) for e in rec.location),
        jacobian=tuple(
            tuple(e.subs(sub) for e in row) for row in rec.jacobian
        ),
        eigenvalues=tuple(e.subs(sub) for e in rec.eigenvalues),
    )
