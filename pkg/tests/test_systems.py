import pytest
import sympy as sp

from painleve_atlas.errors import (
    ConstraintViolated,
    MonomialAboveFace,
    UnknownEquation,
    UnknownSymbol,
)
from painleve_atlas.expr import Expr
from painleve_atlas.systems import (
    A0, A1, A2, A3, A4, ALPHA, BETA, X, Y, Z,
    HamiltonianSpec,
    catalog_get,
    catalog_info,
    catalog_names,
    hamilton_to_ode,
    parameter_split,
    scaled_terms,
    split_truncation,
    weighted_degree,
)

x, y, z = X.sym, Y.sym, Z.sym
a, b = ALPHA.sym, BETA.sym
a0, a1, a2, a3, a4 = A0.sym, A1.sym, A2.sym, A3.sym, A4.sym

# the scaled first-order systems in their source form
SYSTEMS = {
    "PI": (Expr(6 * y**2 + z), Expr(x)),
    "PII": (Expr(2 * y**3 + z * y + a), Expr(x)),
    "PIV": (
        Expr(2 * x * y - x**2 + 2 * x * z - 2 * b),
        Expr(-(y**2) + 2 * x * y - 2 * y * z - 2 * a),
    ),
    "P3D8": (
        Expr(sp.Rational(1, 2) - 2 * x**2 * y - z / (2 * y**2)),
        Expr(2 * x * y**2),
    ),
    "P3D7": (
        Expr(-2 * x**2 * y - 1 - a * x),
        Expr(2 * x * y**2 + z + a * y),
    ),
    "P3D6": (
        Expr(-2 * x**2 * y + 2 * x * y - (a + b) * x + a),
        Expr(2 * x * y**2 - y**2 + z + (a + b) * y),
    ),
    "PV": (
        Expr(-2 * x**2 * y + x**2 + x * z - 2 * x * y * z + (a1 + a3) * x - a2 * z),
        Expr(2 * x * y**2 - 2 * x * y + y**2 * z - y * z - (a1 + a3) * y + a1),
    ),
    "PVI": (
        Expr(
            -3 * x**2 * y**2 + 2 * x**2 * y + 2 * x**2 * y * z - x**2 * z
            + (2 * a4 + 2 * a3 + 2 * a0) * x * y - (a4 + a0) * x
            - (a4 + a3) * x * z - a2 * (a1 + a2)
        ),
        Expr(
            2 * x * y**3 - 2 * x * y**2 - 2 * x * y**2 * z + 2 * x * y * z
            - (a4 + a3 + a0) * y**2 + (a4 + a4 * z + a3 * z + a0) * y - a4 * z
        ),
    ),
}


class TestCatalog:
    def test_names(self):
        assert catalog_names() == (
            "PI", "PII", "PIV", "P3D8", "P3D7", "P3D6", "PV", "PVI",
        )

    @pytest.mark.parametrize("name", SYSTEMS)
    def test_hamilton_to_ode_matches_stored_system(self, name):
        sysm = catalog_get(name)
        assert sysm.scaled_rhs == SYSTEMS[name]

    @pytest.mark.parametrize(
        "alias,key",
        [
            ("p1", "PI"), ("P2", "PII"), ("p4", "PIV"),
            ("P3(D8)", "P3D8"), ("piii(d7)", "P3D7"), ("p3d6", "P3D6"),
            ("pv", "PV"), ("P5", "PV"), ("p6", "PVI"), ("PVI", "PVI"),
        ],
    )
    def test_aliases(self, alias, key):
        assert catalog_get(alias).name == key

    def test_unknown_equation(self):
        with pytest.raises(UnknownEquation):
            catalog_get("P7")

    def test_prefactors(self):
        assert catalog_get("PI").prefactor == Expr(1)
        assert catalog_get("P3D6").prefactor == Expr(z)
        assert catalog_get("PVI").prefactor == Expr(z * (z - 1))

    def test_rhs_divides_out_prefactor(self):
        sysm = catalog_get("P3D6")
        r1, r2 = sysm.rhs
        assert r1 * Expr(z) == sysm.scaled_rhs[0]
        assert r2 * Expr(z) == sysm.scaled_rhs[1]


class TestCatalogInfo:
    # (p, q, r, s), deg, kappa, blow-up weight, balances, charts
    TABLE = {
        "PI": ((3, 2, 4, 5), 6, 6, (6, 4, 5), 1, 2),
        "PII": ((2, 1, 2, 3), 4, 4, (4, 2, 3), 2, 3),
        "PIV": ((1, 1, 1, 2), 3, 3, (3, 1, 2), 3, 4),
        "P3D8": ((-1, 2, 4, 1), 2, 2, (2, 4, 1), 2, 3),
        "P3D7": ((-1, 2, 3, 1), 2, 2, (2, 3, 1), 2, 3),
        "P3D6": ((0, 1, 2, 1), 2, 2, (2, 2, 1), 3, 4),
        "PV": ((1, 0, 1, 1), 2, 2, (2, 1, 1), 4, 5),
        "PVI": ((1, 0, 0, 1), 2, 2, (2, 0, 1), 5, 6),
    }

    @pytest.mark.parametrize("name", TABLE)
    def test_reference_row(self, name):
        info = catalog_info(name)
        w, deg, kappa, bw, l, c = self.TABLE[name]
        assert info.weight == w
        assert info.hamiltonian_degree == deg
        assert info.kovalevskaya_index == kappa
        assert info.blowup_weight == bw
        assert info.balance_count == l
        assert info.chart_count == c

    @pytest.mark.parametrize("name", TABLE)
    def test_degree_invariants(self, name):
        # deg(H) = kappa = leading blow-up eigenvalue, and the weighted
        # degree of the scaled Hamiltonian reproduces it
        info = catalog_info(name)
        assert info.hamiltonian_degree == info.kovalevskaya_index
        assert info.hamiltonian_degree == info.blowup_weight[0]
        assert info.chart_count == info.balance_count + 1
        p, q, r, _ = info.weight
        h = catalog_get(name).hamiltonian.h_scaled
        assert weighted_degree(h, {"x": p, "y": q, "z": r}) == info.hamiltonian_degree


class TestBinding:
    def test_bind_substitutes(self):
        sysm = catalog_get("P3D6", {"a": 0, "b": "1/5"})
        p1, p2 = sysm.scaled_rhs
        assert p1 == Expr(-2 * x**2 * y + 2 * x * y - x / 5)
        assert p2 == Expr(2 * x * y**2 - y**2 + z + y / 5)
        assert sysm.params == ()

    def test_partial_bind(self):
        sysm = catalog_get("PII", {})
        assert sysm.params == (ALPHA,)
        bound = catalog_get("PV", {"a1": 0})
        assert bound.params == (A2, A3)

    def test_unknown_parameter(self):
        with pytest.raises(UnknownSymbol):
            catalog_get("PII", {"c": 1})

    def test_float_rejected(self):
        with pytest.raises(TypeError):
            catalog_get("PII", {"a": 0.5})

    def test_pvi_constraint_enforced(self):
        with pytest.raises(ConstraintViolated):
            catalog_get("PVI", {"a0": 1, "a1": 1, "a2": 1, "a3": 1, "a4": 1})

    def test_pvi_constraint_satisfied(self):
        sysm = catalog_get("PVI", {"a0": -2, "a1": 0, "a2": 0, "a3": 1, "a4": 1})
        assert sysm.params == ()
        assert sysm.param_constraint is None

    def test_pvi_partial_constraint_stays(self):
        sysm = catalog_get("PVI", {"a1": 0, "a2": 0})
        assert sysm.param_constraint == Expr(a0 + a3 + a4)

    def test_vanishes_modulo_constraint(self):
        sysm = catalog_get("PVI")
        assert sysm.vanishes(Expr(a0 + a1 + 2 * a2 + a3 + a4) * Expr(x * y))
        assert not sysm.vanishes(Expr(a0))
        assert sysm.equal(Expr(a0), Expr(-a1 - 2 * a2 - a3 - a4))

    def test_hamiltonian_rebound(self):
        sysm = catalog_get("PII", {"a": 2})
        assert sysm.hamiltonian.h_scaled == Expr(
            x**2 / 2 - y**4 / 2 - z * y**2 / 2 - 2 * y
        )


class TestTruncation:
    def test_p3d6_split(self):
        f, g = parameter_split(catalog_get("P3D6"))
        assert f[0] == Expr(-2 * x**2 * y + 2 * x * y)
        assert f[1] == Expr(2 * x * y**2 - y**2 + z)
        assert g[0] == Expr(-(a + b) * x + a)
        assert g[1] == Expr((a + b) * y)

    def test_pv_split(self):
        f, g = parameter_split(catalog_get("PV"))
        assert f[0] == Expr(-2 * x**2 * y + x**2 + x * z - 2 * x * y * z)
        assert f[1] == Expr(2 * x * y**2 - 2 * x * y + y**2 * z - y * z)
        assert g[0] == Expr((a1 + a3) * x - a2 * z)
        assert g[1] == Expr(-(a1 + a3) * y + a1)

    def test_parameter_free_systems_have_zero_g(self):
        for name in ("PI", "P3D8"):
            f, g = parameter_split(catalog_get(name))
            assert f == catalog_get(name).scaled_rhs
            assert not any(map(bool, g))

    @pytest.mark.parametrize("name", SYSTEMS)
    def test_face_split_agrees_with_parameter_split(self, name):
        sysm = catalog_get(name)
        ts = split_truncation(sysm, catalog_info(name).weight)
        f, g = parameter_split(sysm)
        assert ts.f == f
        assert ts.g == g

    @pytest.mark.parametrize("name", SYSTEMS)
    def test_split_is_exact(self, name):
        sysm = catalog_get(name)
        ts = split_truncation(sysm, catalog_info(name).weight)
        for f_i, g_i, p_i in zip(ts.f, ts.g, sysm.scaled_rhs):
            assert f_i + g_i == p_i

    def test_monomial_above_face(self):
        sysm = catalog_get("PI")
        with pytest.raises(MonomialAboveFace):
            split_truncation(sysm, (3, 2, 4, 4))

    @pytest.mark.parametrize("name", SYSTEMS)
    def test_face_part_scaling_invariance(self, name):
        # f is strictly quasi-homogeneous: x -> w^-p x, y -> w^-q y,
        # z -> w^-r z multiplies the i-th component of the unscaled
        # right-hand side by w^-(s + p_i - r)
        sysm = catalog_get(name)
        p, q, r, s = catalog_info(name).weight
        w = sp.Symbol("w")
        ts = split_truncation(sysm, (p, q, r, s))
        pf = sysm.prefactor.as_sympy()
        sub = {x: w**-p * x, y: w**-q * y, z: w**-r * z}
        for i, f_i in enumerate(ts.f):
            if not f_i:
                continue
            scale = (p, q)[i]
            face = sp.cancel(f_i.as_sympy() / pf)
            lhs = sp.cancel(face.subs(sub, simultaneous=True))
            rhs = sp.cancel(w ** (-(s + scale - r)) * face)
            assert sp.simplify(lhs - rhs) == 0


class TestHamiltonToOde:
    def test_user_hamiltonian(self):
        spec = HamiltonianSpec(
            h_scaled=Expr(x**2 / 2 + y**2 / 2),
            prefactor=Expr(1),
            pair=(X, Y),
            time=Z,
        )
        sysm = hamilton_to_ode(spec, name="oscillator")
        assert sysm.scaled_rhs == (Expr(-y), Expr(x))
        assert sysm.name == "oscillator"

    def test_scaled_terms_sum(self):
        sysm = catalog_get("P3D8")
        for i in range(2):
            total = Expr(0)
            for term, _ in scaled_terms(sysm, i):
                total = total + term
            assert total == sysm.scaled_rhs[i]
