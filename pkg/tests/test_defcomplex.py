import json

import pytest
import sympy

from holobf.common import ConstructionError, DomainError
from holobf.defcomplex import (
    Cochain, FinDimLieAlgebra, ce_complex, chern_simons_class, cohomology_dims,
    complex_a, euler_characteristic, is_semisimple, killing_form,
    load_lie_algebra, render_j0, render_j1, shipped_lie_algebras,
    truncated_current_algebra, weight_one_triviality,
)


@pytest.fixture(scope="module")
def sl2():
    return load_lie_algebra("sl2")


@pytest.fixture(scope="module")
def abelian():
    return load_lie_algebra("abelian1")


class TestLieAlgebras:

    def test_shipped(self):
        assert shipped_lie_algebras() == ["abelian1", "sl2", "sl2_sl2"]

    def test_sl2(self, sl2):
        assert sl2.dimension == 3
        assert sl2.basis == ("e", "h", "f")
        # [h, e] = 2e
        assert list(sl2.bracket([0, 1, 0], [1, 0, 0])) == [2, 0, 0]

    def test_killing_form(self, sl2, abelian):
        # Killing form of sl2 is 4 times the trace form
        assert killing_form(sl2) == 4 * sl2.pairing
        assert is_semisimple(sl2)
        assert is_semisimple(load_lie_algebra("sl2_sl2"))
        assert not is_semisimple(abelian)

    def test_rational_entries(self):
        g = FinDimLieAlgebra.from_structure_constants(
            3, [[0, 1, 0, "-2"], [0, 2, 1, "1"], [1, 2, 2, -2]], [[0, 0, "1/2"], [0, 1, 0], ["1/2", 0, 0]])
        assert g.pairing[0, 2] == sympy.Rational(1, 2)

    def test_invalid_algebras(self):
        with pytest.raises(ConstructionError, match="Jacobi"):
            # [e0, e1] = e2, [e1, e2] = e1, [e0, e2] = 0 violates Jacobi
            FinDimLieAlgebra.from_structure_constants(
                3, [[0, 1, 2, 1], [1, 2, 1, 1]], sympy.eye(3).tolist())
        with pytest.raises(ConstructionError, match="invariant"):
            FinDimLieAlgebra.from_structure_constants(
                3, [[0, 1, 0, -2], [0, 2, 1, 1], [1, 2, 2, -2]], sympy.eye(3).tolist())
        with pytest.raises(ConstructionError, match="degenerate"):
            FinDimLieAlgebra.from_structure_constants(1, [], [[0]])
        with pytest.raises(ConstructionError, match="conflicting"):
            FinDimLieAlgebra.from_structure_constants(2, [[0, 1, 0, 1], [1, 0, 0, 1]], [[1, 0], [0, 1]])
        with pytest.raises(ConstructionError):
            FinDimLieAlgebra.from_structure_constants(2, [[0, 5, 0, 1]], [[1, 0], [0, 1]])

    def test_load_from_path(self, tmp_path):
        path = tmp_path / "heis.json"
        path.write_text(json.dumps({"dimension": 1, "structure_constants": [], "pairing": [[2]]}))
        g = load_lie_algebra(path)
        assert g.name == "heis" and g.dimension == 1
        with pytest.raises(DomainError):
            load_lie_algebra(tmp_path / "missing.json")
        path.write_text("{")
        with pytest.raises(ConstructionError):
            load_lie_algebra(path)

    def test_truncated_current_algebra(self, sl2):
        g = truncated_current_algebra(sl2, 2)
        assert g.dimension == 9
        # [e z, f z] = h z^2
        e1, f1 = [0]*9, [0]*9
        e1[3], f1[5] = 1, 1
        h2 = [0]*9
        h2[7] = 1
        assert list(g.bracket(e1, f1)) == h2
        assert not is_semisimple(g)
        assert truncated_current_algebra(sl2, 0).pairing == sl2.pairing


class TestCohomology:

    def test_sl2_trivial(self, sl2):
        assert list(cohomology_dims(ce_complex(sl2)).values()) == [1, 0, 0, 1]

    def test_sl2_reduced(self, sl2):
        assert cohomology_dims(ce_complex(sl2, reduced=True)) == {1: 0, 2: 0, 3: 1}

    def test_sl2_complex_a(self, sl2):
        dims = cohomology_dims(complex_a(sl2))
        assert sum(dims.values()) == 1
        assert dims[0] == 1

    @pytest.mark.parametrize("name", ["sl2", "sl2_sl2"])
    def test_complex_a_is_shifted_reduced_cohomology(self, name):
        g = load_lie_algebra(name)
        reduced = cohomology_dims(ce_complex(g, reduced=True))
        shifted = {k - 3: v for k, v in reduced.items() if v}
        total = {k: v for k, v in cohomology_dims(complex_a(g), workers=2).items() if v}
        assert total == shifted

    def test_abelian_weight_one(self, abelian):
        assert cohomology_dims(ce_complex(abelian, "adjoint")) == {0: 1, 1: 1}

    @pytest.mark.parametrize("name", ["sl2", "sl2_sl2"])
    def test_weight_one_triviality(self, name):
        assert weight_one_triviality(load_lie_algebra(name))

    def test_weight_one_needs_semisimple(self, abelian):
        with pytest.raises(DomainError, match="not semisimple"):
            weight_one_triviality(abelian)

    @pytest.mark.parametrize("name", ["abelian1", "sl2", "sl2_sl2"])
    def test_square_zero_and_euler(self, name):
        g = load_lie_algebra(name)
        complexes = [ce_complex(g, m) for m in ("trivial", "adjoint", "coadjoint")]
        complexes += [ce_complex(g, reduced=True), complex_a(g)]
        for C in complexes:
            chi = euler_characteristic(C, cohomology_dims(C))
            assert chi == sum((-1)**(n % 2) * d for n, d in C.dims.items())

    def test_euler_characteristic_values(self, sl2):
        # (1 - 1)^3 times the module dimension
        assert euler_characteristic(ce_complex(sl2, "adjoint")) == 0
        assert euler_characteristic(ce_complex(sl2, reduced=True)) == -1
        assert euler_characteristic(complex_a(sl2)) == 1

    def test_truncated_complex(self, sl2):
        g = truncated_current_algebra(sl2, 1)
        C = ce_complex(g, max_degree=3)
        assert C.degrees == [0, 1, 2, 3]
        dims = cohomology_dims(C)
        assert dims[0] == 1 and dims[1] == 0

    def test_invalid_modules(self, sl2):
        with pytest.raises(DomainError):
            ce_complex(sl2, "spinor")
        with pytest.raises(DomainError):
            ce_complex(sl2, "adjoint", reduced=True)


class TestRendering:

    def test_chern_simons_class(self, sl2):
        A = complex_a(sl2)
        vector = chern_simons_class(sl2, killing_form(sl2))
        assert A.differential(0).to_Matrix() * vector == sympy.zeros(A.dims[1], 1)
        # not a coboundary: the degree zero cohomology is spanned by it
        image = A.differential(-1).to_Matrix()
        assert image.row_join(vector).rank() == image.rank() + 1

    def test_non_invariant_form(self, sl2):
        with pytest.raises(ConstructionError):
            chern_simons_class(sl2, sympy.eye(3))

    def test_render_killing_form(self, sl2):
        f = render_j0(Cochain.from_bilinear(sl2, killing_form(sl2)))
        v = f.vertex
        assert (v.alpha_legs, v.beta_legs) == (2, 0)
        assert sorted(v.deriv_orders) == [0, 1]
        assert f.weight == 0

    def test_render_zero(self, sl2):
        f = render_j0(Cochain(sl2, "coadjoint", 2, (0,) * 9))
        assert f.is_zero and f.vertex is None

    def test_render_j1(self, sl2):
        xi = Cochain(sl2, "adjoint", 2, (1,) + (0,) * 8)
        f = render_j1(xi)
        assert (f.vertex.alpha_legs, f.vertex.beta_legs) == (2, 1)
        assert f.vertex.deriv_orders == (0, 0, 0)
        assert f.weight == 1
        assert render_j1(Cochain(sl2, "adjoint", 0, (1, 0, 0))).vertex is None

    def test_render_checks_module(self, sl2):
        with pytest.raises(DomainError):
            render_j0(Cochain(sl2, "adjoint", 1, (0,) * 9))
        with pytest.raises(DomainError):
            Cochain(sl2, "coadjoint", 1, (0,) * 4)
