"""Weighted sphere operators: exact relation identities, adjointness on all
basis pairs, projection masses against counting oracles, and the literal
composition model's normalization gap."""

from fractions import Fraction

import pytest

from monoboundary import (
    ChainOperator,
    IDENTITY,
    WeightedSphereSpace,
    adjoint_S,
    adjoint_T,
    beta_action,
    canonical_hom,
    iso_S,
    left_divides,
    op_T,
    operator_norm,
    range_projection,
    relation_defects,
    sphere_weights,
)
from monoboundary.operators import projection_mass

from oracles import all_free_words


def identity_defect(p, x, depth):
    s = iso_S(p, x, depth)
    return adjoint_S(p, x, depth).compose(s) - ChainOperator.identity(s.source)


class TestIsoAdjointExamples:
    def test_f2_depth_one_scaling(self, f2):
        s = iso_S(f2, 0, 1)
        (entry,) = s.entries.values()
        assert entry.sq == 2  # sqrt(2) in the indicator basis

    def test_n2_weight_ratio_one(self, n2):
        s = iso_S(n2, 0, 2)
        col = n2.element("y")
        si = s.source.index(col)
        ((ti, _), entry), = [(k, v) for k, v in s.entries.items() if k[1] == si]
        assert s.target.basis[ti] == n2.element("xy")
        assert entry.as_rational() == 1

    def test_zero_vector_maps_to_zero(self, f2):
        s = iso_S(f2, 0, 3)
        assert all(not v.is_zero for v in s.entries.values())
        # one entry per source basis element and nothing else
        assert s.nnz == s.source.dim

    def test_adjoint_halves_back(self, f2):
        st = adjoint_S(f2, 0, 1)
        (entry,) = st.entries.values()
        assert entry.sq == Fraction(1, 2)

    def test_adjoint_kills_other_cylinder(self, f2):
        st = adjoint_S(f2, 0, 1)
        yi = st.source.index(f2.element("y"))
        assert all(s != yi for (_, s) in st.entries)

    def test_n2_adjoint_unit_ratio(self, n2):
        st = adjoint_S(n2, 0, 2)
        si = st.source.index(n2.element("xy"))
        ((ti, _), entry), = [(k, v) for k, v in st.entries.items() if k[1] == si]
        assert st.target.basis[ti] == n2.element("y")
        assert entry.as_rational() == 1


class TestExactRelations:
    PRESENTATIONS = ["f2", "f3", "n2", "c4", "xz"]

    @pytest.mark.parametrize("name", PRESENTATIONS)
    def test_isometry_identity_exact(self, name, request):
        p = request.getfixturevalue(name)
        for depth in range(1, 7):
            for x in range(p.n):
                assert identity_defect(p, x, depth).nnz == 0

    @pytest.mark.parametrize("name", PRESENTATIONS)
    def test_gram_matrix_matches_source_weights(self, name, request):
        p = request.getfixturevalue(name)
        s = iso_S(p, 0, 3)
        for i in range(s.source.dim):
            for j in range(s.source.dim):
                expected = s.source.weights[i] if i == j else Fraction(0)
                assert s.gram(i, j).as_rational() == expected

    @pytest.mark.parametrize("name", PRESENTATIONS)
    def test_adjoint_pairing_on_all_basis_pairs(self, name, request):
        p = request.getfixturevalue(name)
        depth = 3
        for x in range(p.n):
            s = iso_S(p, x, depth)
            st = adjoint_S(p, x, depth)
            for wi in range(s.source.dim):
                for ti in range(s.target.dim):
                    lhs = s.pairing(wi, ti)  # <S e_w, e_tau>_K
                    rhs = st.pairing(ti, wi)  # <S* e_tau, e_w>_{K-1} = <e_w, S* e_tau>
                    assert lhs == rhs

    def test_orthogonality_non_commuting(self, xz, c4):
        # x,y do not commute in <x,y,z | xz=zx>; a,c do not commute in C4
        assert adjoint_S(xz, 0, 3).compose(iso_S(xz, 1, 3)).nnz == 0
        assert adjoint_S(c4, 0, 3).compose(iso_S(c4, 2, 3)).nnz == 0

    def test_commutation_exact(self, xz, c4):
        for p, (x, y) in ((xz, (0, 2)), (c4, (0, 1)), (c4, (2, 3))):
            d = iso_S(p, x, 3).compose(iso_S(p, y, 2)) - iso_S(p, y, 3).compose(
                iso_S(p, x, 2)
            )
            assert d.nnz == 0
            d2 = adjoint_S(p, x, 3).compose(iso_S(p, y, 3)) - iso_S(p, y, 2).compose(
                adjoint_S(p, x, 2)
            )
            assert d2.nnz == 0

    @pytest.mark.parametrize("name", ["f2", "f3"])
    def test_completeness_free(self, name, request):
        p = request.getfixturevalue(name)
        for depth in (1, 3):
            ops = [iso_S(p, x, depth).compose(adjoint_S(p, x, depth)) for x in range(p.n)]
            total = ops[0]
            for op in ops[1:]:
                total = total + op
            assert (total - ChainOperator.identity(total.source)).nnz == 0

    def test_completeness_fails_off_free(self, n2):
        ops = [iso_S(n2, x, 2).compose(adjoint_S(n2, x, 2)) for x in range(2)]
        defect = ops[0] + ops[1] - ChainOperator.identity(ops[0].source)
        assert defect.nnz > 0
        assert operator_norm(defect) == pytest.approx(1.0, abs=1e-9)


class TestRangeProjection:
    def test_free_full_generator_set_kills_everything(self, f2):
        assert range_projection(f2, (0, 1), 2).nnz == 0

    def test_c4_counts(self, c4):
        proj = range_projection(c4, (0, 2), 3)  # V1 = {a, c}
        mass = projection_mass(proj)
        assert mass == Fraction(1, 8)
        support = {proj.target.basis[t] for (t, _) in proj.entries}
        assert all(set(el.word) <= {1, 3} for el in support)  # only b, d letters

    def test_n2_single_generator(self, n2):
        proj = range_projection(n2, (0,), 2)
        assert projection_mass(proj) == Fraction(1, 4)
        assert {proj.target.basis[t] for (t, _) in proj.entries} == {n2.element("yy")}

    @pytest.mark.parametrize("depth", range(4, 9))
    def test_c4_mass_equals_counting_oracle(self, c4, depth):
        proj = range_projection(c4, (0, 2), depth)
        mass = projection_mass(proj)
        # oracle: free words over {b, d} only, each its own fiber
        count = sum(
            1
            for w in all_free_words(4, depth)
            if set(w) <= {1, 3}
        )
        assert mass == Fraction(count, 4 ** depth)
        assert mass == Fraction(1, 2 ** depth)


class TestLiteralModel:
    def test_identity_element(self, f2):
        t = op_T(f2, IDENTITY, 3)
        assert (t - ChainOperator.identity(t.source)).nnz == 0

    def test_shift_pattern(self, f2):
        t = op_T(f2, f2.element("x"), 2)
        for (ti, si) in t.entries:
            w = t.target.basis[ti]
            assert t.source.basis[si] == canonical_hom(f2, (0,) + w.word)

    def test_missing_weight_factor(self, f2):
        """Squared norms scale UP by n on a cylinder indicator: the literal
        model drops the pushforward factor."""
        t = op_T(f2, f2.element("x"), 3)
        si = t.source.index(f2.element("xyy"))
        col = {ti: v for (ti, s), v in t.entries.items() if s == si}
        out_sq = sum(v.sq * t.target.weights[ti] for ti, v in col.items())
        assert out_sq / t.source.weights[si] == 2

    def test_delta_defect_norm(self, f2):
        t = op_T(f2, f2.element("x"), 3)
        tstar = adjoint_T(f2, f2.element("x"), 3)
        defect = tstar.compose(t) - ChainOperator.identity(t.source)
        norm = operator_norm(defect)
        assert norm >= 0.4
        assert norm == pytest.approx(1.0, abs=1e-9)

    def test_adjoint_is_adjoint(self, f2):
        t = op_T(f2, f2.element("x"), 2)
        tstar = adjoint_T(f2, f2.element("x"), 2)
        for si in range(t.source.dim):
            for ti in range(t.target.dim):
                assert t.pairing(si, ti) == tstar.pairing(ti, si)


class TestBetaAction:
    def test_identity(self, f2):
        ba = beta_action(f2, IDENTITY, 3)
        assert (ba.operator - ChainOperator.identity(ba.operator.source)).nnz == 0
        assert ba.norm_bound_sq == 1

    def test_matches_op_T(self, f2):
        x = f2.element("x")
        assert beta_action(f2, x, 2).operator.entries == op_T(f2, x, 2).entries

    def test_n2_constant_exceeds_one(self, n2):
        ba = beta_action(n2, n2.element("x"), 6)
        assert ba.norm_bound_sq == 2  # frozen regression: sqrt(2) at depth 6
        assert ba.measured_norm == pytest.approx(2 ** 0.5, abs=1e-8)

    def test_free_monoid_is_isometric_in_bound(self, f2):
        ba = beta_action(f2, f2.element("x"), 4)
        assert ba.norm_bound_sq == 2  # uniform weights: ratio n on the x-cylinder


class TestDefectReports:
    def test_f2_depth6_all_s_rows_zero(self, f2):
        rows = {r.label: r for r in relation_defects(f2, 6)}
        for label, row in rows.items():
            if label.startswith("S:") and "range-projection" not in label:
                assert row.norm_defect <= 1e-12
                assert row.hs_defect_sq == 0
        assert rows["T:delta:x|x"].norm_defect >= 0.4

    def test_label_order_stable(self, f2):
        labels = [r.label for r in relation_defects(f2, 2)]
        assert labels == [
            "S:isometry:x",
            "S:isometry:y",
            "S:orthogonality:x|y",
            "S:completeness",
            "S:range-projection:xy",
            "T:delta:x|x",
            "T:delta:x|y",
            "T:delta:y|y",
        ]

    def test_c4_component_rows_carry_mass(self, c4):
        rows = {r.label: r for r in relation_defects(c4, 4)}
        assert rows["S:range-projection:ac"].exceptional_mass == Fraction(1, 16)
        assert rows["S:range-projection:bd"].exceptional_mass == Fraction(1, 16)
        for label, row in rows.items():
            if label.startswith(("S:isometry", "S:commutation", "S:adjoint", "S:orthogonality")):
                assert row.norm_defect <= 1e-12
                assert row.hs_defect_sq == 0

    def test_weighted_space_inner_product(self, xz):
        space = WeightedSphereSpace.build(xz, 2)
        ones = {i: Fraction(1) for i in range(space.dim)}
        assert space.inner(ones, ones) == 1
        assert sum(space.weights) == 1
        assert space.dim == 8
