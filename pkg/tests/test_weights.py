import math
import random

import pytest
import sympy as sp

from painleve_atlas.errors import NotCoplanar, Underdetermined
from painleve_atlas.expr import Expr
from painleve_atlas.systems import (
    BETA, Y, Z,
    PainleveSystem,
    catalog_get,
    catalog_info,
    catalog_names,
)
from painleve_atlas.weights import (
    AssumptionReport,
    ExponentSet,
    Weight,
    check_assumptions,
    compute_exponents,
    fit_weight,
)

y, z = Y.sym, Z.sym
b = BETA.sym


class TestWeightType:
    def test_entries_and_views(self):
        w = Weight((0, 1, 2, 1))
        assert (w.p, w.q, w.r, w.s) == (0, 1, 2, 1)
        assert w.normal == (0, 1, 2)
        assert tuple(w) == (0, 1, 2, 1)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            Weight((1, 1, 1, 0))

    def test_normal_must_be_primitive(self):
        with pytest.raises(ValueError):
            Weight((2, 4, 6, 3))

    def test_one_variable_weight(self):
        w = Weight((1, 2, 3))
        assert (w.p, w.r, w.s) == (1, 2, 3)
        with pytest.raises(ValueError):
            w.q


class TestExponents:
    def test_p3d8_union(self):
        exps = compute_exponents(catalog_get("P3D8"), "all")
        assert exps.vectors == ((-1, -2, 1), (-1, 0, 0), (1, 1, 0))

    def test_pvi_truncation_union(self):
        exps = compute_exponents(catalog_get("PVI"), "f")
        assert exps.vectors == ((1, 0, 1), (1, 1, 0), (1, 1, 1), (1, 2, 0))

    def test_p3d6_truncation_union(self):
        exps = compute_exponents(catalog_get("P3D6"), "f")
        assert exps.vectors == ((0, -1, 1), (0, 1, 0), (1, 1, 0))

    def test_dedup_within_equation(self):
        exps = compute_exponents(catalog_get("PIV"), "f")
        # 2xy and -x^2 and 2xz in equation one: three vectors, no repeats
        assert exps.by_equation[0] == ((0, 0, 2), (0, 1, 1), (1, 0, 1))

    def test_sources_recover_terms(self):
        sysm = catalog_get("P3D6")
        exps = compute_exponents(sysm, "f")
        total = Expr(0)
        for eq, vec, term in exps.sources:
            if eq == 0:
                total = total + term
        assert total == Expr(-2 * sysm.vars[0].sym ** 2 * y + 2 * sysm.vars[0].sym * y)

    def test_bad_part(self):
        with pytest.raises(ValueError):
            compute_exponents(catalog_get("PI"), "h")


class TestFitWeight:
    @pytest.mark.parametrize("name", [n for n in catalog_names()])
    def test_catalog_weights(self, name):
        sysm = catalog_get(name)
        w = fit_weight(compute_exponents(sysm, "f"))
        assert tuple(w) == catalog_info(name).weight

    def test_not_coplanar(self):
        with pytest.raises(NotCoplanar):
            fit_weight(compute_exponents(catalog_get("PII"), "all"))

    def test_underdetermined_single_point(self):
        lin = PainleveSystem(
            name="lin", vars=(Y,), time=Z, prefactor=Expr(1),
            scaled_rhs=(Expr(y),),
        )
        exps = compute_exponents(lin, "f")
        assert exps.vectors == ((0, 1),)
        with pytest.raises(Underdetermined):
            fit_weight(exps)

    def test_box_search_with_below_set(self):
        face = ExponentSet(((1, 0),), (((1, 0),),), ())
        below = ExponentSet(
            ((-1, 0), (0, 0), (0, 1)), (((-1, 0), (0, 0), (0, 1)),), ()
        )
        assert tuple(fit_weight(face, below=below)) == (1, 0, 1)

    def test_box_search_exhausted(self):
        face = ExponentSet(((1, 0),), (((1, 0),),), ())
        blocker = ExponentSet(((2, 0),), (((2, 0),),), ())
        with pytest.raises(Underdetermined):
            fit_weight(face, below=blocker)

    def test_sign_convention_prefers_positive_scale(self):
        # same plane as the third equation with D8 surface, flipped input order
        exps = ExponentSet(
            ((-1, -2, 1), (-1, 0, 0), (1, 1, 0)),
            (((-1, -2, 1), (-1, 0, 0), (1, 1, 0)),),
            (),
        )
        assert tuple(fit_weight(exps)) == (-1, 2, 4, 1)

    def test_riccati_models(self):
        bessel = PainleveSystem(
            name="bessel", vars=(Y,), time=Z, prefactor=Expr(z),
            scaled_rhs=(Expr(-y**2 + b * y + z),), params=(BETA,),
        )
        assert tuple(fit_weight(compute_exponents(bessel, "f"))) == (1, 2, 1)
        airy = PainleveSystem(
            name="airy", vars=(Y,), time=Z, prefactor=Expr(1),
            scaled_rhs=(Expr(y**2 + z),),
        )
        assert tuple(fit_weight(compute_exponents(airy, "f"))) == (1, 2, 3)

    def test_random_planes_recovered(self):
        rng = random.Random(7)
        recovered = 0
        for _ in range(80):
            normal = tuple(rng.randint(-4, 4) for _ in range(3))
            g = math.gcd(math.gcd(abs(normal[0]), abs(normal[1])), abs(normal[2]))
            if g == 0:
                continue
            normal = tuple(c // g for c in normal)
            s = rng.randint(1, 5)
            j0 = next(j for j in range(3) if normal[j] != 0)
            if s % normal[j0] != 0:
                continue
            v0 = [0, 0, 0]
            v0[j0] = s // normal[j0]
            basis = []
            for j in range(3):
                e = [0, 0, 0]
                e[j] = 1
                cr = (
                    normal[1] * e[2] - normal[2] * e[1],
                    normal[2] * e[0] - normal[0] * e[2],
                    normal[0] * e[1] - normal[1] * e[0],
                )
                if any(cr):
                    basis.append(cr)
            if sp.Matrix([basis[0], basis[1]]).rank() < 2:
                continue
            pts = set()
            for _ in range(6):
                k1, k2 = rng.randint(-3, 3), rng.randint(-3, 3)
                pts.add(tuple(
                    v0[i] + k1 * basis[0][i] + k2 * basis[1][i] for i in range(3)
                ))
            exps = ExponentSet(tuple(sorted(pts)), (tuple(sorted(pts)),), ())
            try:
                w = fit_weight(exps)
            except Underdetermined:
                continue
            assert all(w.value(v) == w.s for v in pts)
            recovered += 1
        assert recovered > 30


class TestAssumptions:
    @pytest.mark.parametrize("name", [n for n in catalog_names()])
    def test_catalog_systems_pass(self, name):
        rep = check_assumptions(catalog_get(name), catalog_info(name).weight)
        assert rep.coplanar
        assert rep.g_below
        assert rep.zs_invariant
        assert rep.ok()
        assert rep.witness is None

    @pytest.mark.parametrize(
        "name,expected",
        [("PI", True), ("PII", True), ("PIV", True),
         ("P3D8", None), ("P3D7", None), ("P3D6", None),
         ("PV", None), ("PVI", None)],
    )
    def test_single_face_decidability(self, name, expected):
        rep = check_assumptions(catalog_get(name), catalog_info(name).weight)
        assert rep.single_face is expected

    @pytest.mark.parametrize(
        "name,expected",
        [("PI", True), ("PII", True), ("PIV", True),
         ("P3D8", False), ("P3D7", False), ("P3D6", False),
         ("PV", False), ("PVI", True)],
    )
    def test_unit_gap_flag(self, name, expected):
        rep = check_assumptions(catalog_get(name), catalog_info(name).weight)
        assert rep.sr_unit_gap is expected

    def test_wrong_weight_reports_witness(self):
        rep = check_assumptions(catalog_get("PI"), (1, 1, 1, 2))
        assert not rep.coplanar
        assert rep.witness is not None
        assert not rep.ok()

    def test_report_is_plain_data(self):
        rep = check_assumptions(catalog_get("PII"), (2, 1, 2, 3))
        assert isinstance(rep, AssumptionReport)
        assert rep == AssumptionReport(
            coplanar=True, single_face=True, g_below=True,
            zs_invariant=True, sr_unit_gap=True, witness=None,
        )
