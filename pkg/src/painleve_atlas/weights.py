"""Newton polyhedra of Painleve systems and the weights they determine.

A monomial x^mu1 y^mu2 z^eta appearing in the i-th right-hand side
contributes the exponent vector (mu1 - d_i1, mu2 - d_i2, eta + 1).  The
weight (p, q, r, s) is the common normal of the face spanned by the
truncation f: every f-monomial satisfies p e1 + q e2 + r e3 = s, every
g-monomial sits strictly below, and s >= 1 normalizes the scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import sympy as sp

from .errors import NotCoplanar, Underdetermined
from .expr import Expr, serialize
from .systems import PainleveSystem, exponent_vector, scaled_terms


@dataclass(frozen=True)
class Weight:
    """An integer weight (p_1, ..., p_m, r, s) with primitive normal part."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(v) for v in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) < 3:
            raise ValueError("a weight has at least (p, r, s)")
        if entries[-1] < 1:
            raise ValueError(f"weight scale must be positive, got {entries[-1]}")
        if _gcd(entries[:-1]) != 1:
            raise ValueError(f"weight normal {entries[:-1]} is not primitive")

    def __iter__(self):
        return iter(self.entries)

    @property
    def normal(self) -> tuple[int, ...]:
        return self.entries[:-1]

    @property
    def p(self) -> int:
        return self.entries[0]

    @property
    def q(self) -> int:
        if len(self.entries) != 4:
            raise ValueError("q is only defined for planar systems")
        return self.entries[1]

    @property
    def r(self) -> int:
        return self.entries[-2]

    @property
    def s(self) -> int:
        return self.entries[-1]

    def value(self, vector) -> int:
        return sum(c * int(e) for c, e in zip(self.normal, vector))


@dataclass(frozen=True)
class ExponentSet:
    """Deduplicated exponent vectors, per equation and as a union."""

    vectors: tuple[tuple[int, ...], ...]
    by_equation: tuple[tuple[tuple[int, ...], ...], ...]
    sources: tuple[tuple[int, tuple[int, ...], Expr], ...]

    def source_of(self, i: int, vector: tuple[int, ...]) -> Expr | None:
        for eq, vec, term in self.sources:
            if eq == i and vec == vector:
                return term
        return None


@dataclass(frozen=True)
class AssumptionReport:
    coplanar: bool
    single_face: bool | None
    g_below: bool
    zs_invariant: bool
    sr_unit_gap: bool
    witness: tuple[int, tuple[int, ...], str] | None = None

    def ok(self) -> bool:
        return (
            self.coplanar
            and self.g_below
            and self.zs_invariant
            and self.single_face is not False
        )


def compute_exponents(sys: PainleveSystem, part: str = "all") -> ExponentSet:
    """Exponent vectors of the chosen part of the system.

    part selects "all" monomials, the parameter-free truncation "f", or the
    parameter-carrying remainder "g".  Vectors are deduplicated within each
    equation; terms landing on the same vector are summed in the source
    table.
    """
    if part not in ("all", "f", "g"):
        raise ValueError(f"part must be all, f or g, not {part!r}")
    psyms = {p.sym for p in sys.params}
    m = len(sys.vars)
    per_equation = []
    sources = []
    for i in range(m):
        seen: dict[tuple[int, ...], Expr] = {}
        for term, exps in scaled_terms(sys, i):
            carries = bool(term.free_symbols & psyms)
            if (part == "f" and carries) or (part == "g" and not carries):
                continue
            vec = exponent_vector(exps, i, m)
            seen[vec] = seen[vec] + term if vec in seen else term
        per_equation.append(tuple(sorted(seen)))
        sources.extend((i, vec, term) for vec, term in sorted(seen.items()))
    union = sorted(set(itertools.chain.from_iterable(per_equation)))
    return ExponentSet(tuple(union), tuple(per_equation), tuple(sources))


def _gcd(values) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, abs(int(v)))
    return g


def _primitive(vector) -> tuple[int, ...]:
    denom = sp.ilcm(*[sp.Rational(v).q for v in vector]) if vector else 1
    ints = [int(sp.Rational(v) * denom) for v in vector]
    g = _gcd(ints)
    return tuple(v // g for v in ints) if g else tuple(ints)


def _orient(normal: tuple[int, ...], s: int) -> tuple[tuple[int, ...], int]:
    """Sign convention: s > 0 first, then r > 0, then leading entry > 0."""
    if s > 0:
        return normal, s
    if s < 0:
        return tuple(-c for c in normal), -s
    if normal[-1] < 0 or (normal[-1] == 0 and next(c for c in normal if c) < 0):
        return tuple(-c for c in normal), 0
    return normal, 0


def fit_weight(exps: ExponentSet, below: ExponentSet | None = None,
               search_box: int = 6) -> Weight:
    """Fit the unique face normal of an exponent set.

    The affine hull of the vectors must be a hyperplane: a full-dimensional
    hull has no normal (NotCoplanar) and a lower-dimensional hull pins no
    unique direction (Underdetermined) unless a second exponent set is
    supplied, in which case the primitive normal with the smallest scale
    that keeps that set strictly below the face is searched for in a box.
    """
    vectors = exps.vectors
    if not vectors:
        raise Underdetermined("no exponents to fit")
    n = len(vectors[0])
    if len(vectors) > 1:
        diffs = sp.Matrix([
            [v[j] - vectors[0][j] for j in range(n)] for v in vectors[1:]
        ])
        kernel = diffs.nullspace()
    else:
        kernel = [sp.eye(n).col(j) for j in range(n)]
    if not kernel:
        raise NotCoplanar(
            f"{len(vectors)} exponent vectors span all of dimension {n}"
        )
    if len(kernel) == 1:
        normal = _primitive(tuple(kernel[0]))
        s = sum(c * e for c, e in zip(normal, vectors[0]))
        normal, s = _orient(normal, s)
        if s < 1:
            raise Underdetermined(
                f"face through the origin (scale {s}) is not a weight"
            )
        return Weight((*normal, s))
    if below is None:
        raise Underdetermined(
            f"face normal has {len(kernel)} degrees of freedom; "
            "supply the below-face exponents to prune"
        )
    return _search_box(vectors, below.vectors, n, search_box)


def _search_box(vectors, below, n, radius) -> Weight:
    best = None
    for cand in itertools.product(range(-radius, radius + 1), repeat=n):
        if cand[-1] < 0 or _gcd(cand) != 1:
            continue
        values = {sum(c * e for c, e in zip(cand, v)) for v in vectors}
        if len(values) != 1:
            continue
        s = values.pop()
        if s < 1:
            continue
        if any(sum(c * e for c, e in zip(cand, u)) >= s for u in below):
            continue
        key = (s, cand[-1], cand)
        if best is None or key < best:
            best = key
    if best is None:
        raise Underdetermined(
            f"no primitive normal within radius {radius} separates the face "
            "from the remainder"
        )
    return Weight((*best[2], best[0]))


def check_assumptions(sys: PainleveSystem, weight) -> AssumptionReport:
    """Verify the face geometry of a system at a given weight.

    Checks that the truncation exponents are coplanar on the face, that the
    remainder sits strictly below it, and that every monomial is invariant
    under the order-s root-of-unity action (x, y, z) -> (w^p x, w^q y,
    w^r z) once w^s is reduced to 1.  single_face is only decidable when
    all normal entries are positive; otherwise it is None.
    """
    w = weight if isinstance(weight, Weight) else Weight(tuple(weight))
    f_set = compute_exponents(sys, "f")
    g_set = compute_exponents(sys, "g")
    witness = None

    coplanar = True
    for i, eq_vectors in enumerate(f_set.by_equation):
        for vec in eq_vectors:
            if w.value(vec) != w.s:
                coplanar = False
                if witness is None:
                    witness = (i, vec, serialize(f_set.source_of(i, vec) or Expr(0)))

    g_below = True
    for i, eq_vectors in enumerate(g_set.by_equation):
        for vec in eq_vectors:
            if w.value(vec) >= w.s:
                g_below = False
                if witness is None:
                    witness = (i, vec, serialize(g_set.source_of(i, vec) or Expr(0)))

    zs_invariant = True
    for part in (f_set, g_set):
        for eq_vectors in part.by_equation:
            for vec in eq_vectors:
                if (w.value(vec) - w.s) % w.s != 0:
                    zs_invariant = False

    positive = all(c > 0 for c in w.normal)
    single_face = (coplanar and g_below) if positive else None
    return AssumptionReport(
        coplanar=coplanar,
        single_face=single_face,
        g_below=g_below,
        zs_invariant=zs_invariant,
        sr_unit_gap=(w.s - w.r == 1),
        witness=witness,
    )
