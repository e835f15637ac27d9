import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plumbric.plumbing import (EtaLedger, MilnorPairInput, NonUnimodularFormError,
                               PlumbingTree, PlumbingVertex, TreeStructureError,
                               arf_invariant, arf_of_refinement, bareiss_det,
                               boundary_sphere_test, clutching_word, eta_ledger,
                               eta_local_contribution, eta_rp, fixed_point_count,
                               intersection_matrix, milnor_ahat_difference,
                               render_word, tangent_chain)

RNG = np.random.default_rng(99)


class TestTreeValidation:
    def test_not_a_tree(self):
        verts = tuple(PlumbingVertex(3, 3, 0) for _ in range(3))
        with pytest.raises(TreeStructureError):
            PlumbingTree(vertices=verts, edges=((0, 1, 1), (1, 2, 1), (2, 0, 1)))

    def test_dimension_mismatch(self):
        verts = (PlumbingVertex(3, 4, 0), PlumbingVertex(3, 4, 0))
        with pytest.raises(TreeStructureError):
            PlumbingTree(vertices=verts, edges=((0, 1, 1),))

    def test_equivariant_needs_path(self):
        verts = tuple(PlumbingVertex(3, 3, 0) for _ in range(4))
        star = ((0, 1, 1), (0, 2, 1), (0, 3, 1))
        with pytest.raises(TreeStructureError):
            PlumbingTree(vertices=verts, edges=star, equivariant=True)
        PlumbingTree(vertices=verts, edges=star)  # fine without the flag

    def test_json_round_trip(self):
        tree = tangent_chain(4, 3, equivariant=True)
        back = PlumbingTree.from_json(tree.to_json())
        assert back == tree


class TestIntersectionForm:
    def test_single_tangent_vertex(self):
        M, sym = intersection_matrix(tangent_chain(1, 3))
        assert M == [[0]]
        assert sym == "skew"
        sphere, det = boundary_sphere_test(tangent_chain(1, 3))
        assert det == 0 and not sphere

    def test_two_chain(self):
        M, _ = intersection_matrix(tangent_chain(2, 3))
        assert M == [[0, 1], [-1, 0]]
        assert bareiss_det(M) == 1

    def test_three_chain_singular(self):
        sphere, det = boundary_sphere_test(tangent_chain(3, 3))
        assert det == 0 and not sphere

    def test_det_pattern_to_length_20(self):
        for m in range(2, 21):
            sphere, det = boundary_sphere_test(tangent_chain(m, 3))
            if m % 2 == 0:
                assert abs(det) == 1 and sphere
            else:
                assert det == 0 and not sphere

    def test_even_middle_is_symmetric(self):
        verts = (PlumbingVertex(4, 4, 2), PlumbingVertex(4, 4, 2))
        tree = PlumbingTree(vertices=verts, edges=((0, 1, 1),))
        M, sym = intersection_matrix(tree)
        assert sym == "symmetric"
        assert M == [[2, 1], [1, 2]]
        assert bareiss_det(M) == 3

    def test_e8_shape(self):
        verts = tuple(PlumbingVertex(4, 4, 2) for _ in range(8))
        edges = ((0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1),
                 (5, 6, 1), (4, 7, 1))
        tree = PlumbingTree(vertices=verts, edges=edges)
        M, sym = intersection_matrix(tree)
        assert sym == "symmetric"
        assert bareiss_det(M) == 1

    def test_odd_total_dim_rejected(self):
        verts = (PlumbingVertex(3, 4, 0), PlumbingVertex(4, 3, 0))
        tree = PlumbingTree(vertices=verts, edges=((0, 1, 1),))
        with pytest.raises(TreeStructureError):
            intersection_matrix(tree)


class TestArf:
    def test_kervaire_two_chain(self):
        assert arf_invariant(tangent_chain(2, 3)) == 1

    @pytest.mark.parametrize("l", [1, 2, 3, 4])
    def test_eight_l_chain_vanishes(self, l):
        assert arf_invariant(tangent_chain(8 * l, 3)) == 0

    def test_zero_refinement(self):
        verts = tuple(PlumbingVertex(3, 3, 0, framing_q=0) for _ in range(4))
        tree = PlumbingTree(vertices=verts, edges=tuple((i, i + 1, 1) for i in range(3)))
        assert arf_invariant(tree) == 0

    def test_degenerate_form_raises(self):
        with pytest.raises(NonUnimodularFormError):
            arf_invariant(tangent_chain(3, 3))

    def test_basis_independence(self):
        # change basis by random mod-2 symplectic transvections; the invariant
        # of the transported refinement must not move
        for m in (2, 4, 8, 16):
            tree = tangent_chain(m, 3)
            M, _ = intersection_matrix(tree)
            B = [[abs(x) % 2 for x in row] for row in M]
            q = [v.framing_q for v in tree.vertices]
            base = arf_of_refinement(B, q)
            n = len(B)

            def pair_vec(x, y):
                return sum(x[i] * B[i][j] * y[j] for i in range(n) for j in range(n)) % 2

            def q_vec(x):
                idx = [i for i in range(n) if x[i]]
                total = sum(q[i] for i in idx)
                total += sum(B[idx[a]][idx[b]] for a in range(len(idx))
                             for b in range(a + 1, len(idx)))
                return total % 2

            for _ in range(25):
                v = RNG.integers(0, 2, n)
                if not v.any():
                    continue
                basis = []
                for i in range(n):
                    e = np.zeros(n, dtype=int)
                    e[i] = 1
                    basis.append((e + pair_vec(e, v) * v) % 2)
                B2 = [[pair_vec(basis[i], basis[j]) for j in range(n)] for i in range(n)]
                q2 = [q_vec(basis[i]) for i in range(n)]
                assert arf_of_refinement(B2, q2) == base


class TestClutching:
    def test_single_trivial_reduces_to_cross_swap(self):
        v = PlumbingVertex(3, 3, 0, char_label="Phi_1", trivial=True)
        tree = PlumbingTree(vertices=(v,), edges=())
        assert clutching_word(tree) == ["I"]

    def test_two_chain(self):
        word = clutching_word(tangent_chain(2, 3))
        assert word == ["tau_2", "I", "tau_1"]

    def test_trivial_middles_drop(self):
        def v(i, triv):
            return PlumbingVertex(3, 3, 0, char_label=f"Phi_{i}", trivial=triv)

        tree = PlumbingTree(vertices=(v(1, False), v(2, True), v(3, True), v(4, False)),
                            edges=((0, 1, 1), (1, 2, 1), (2, 3, 1)))
        assert clutching_word(tree) == ["Phi_4", "I", "I", "I", "Phi_1"]
        assert render_word(clutching_word(tree)) == "Phi_4 . I . I . I . Phi_1"

    def test_non_path_rejected(self):
        verts = tuple(PlumbingVertex(3, 3, 0) for _ in range(4))
        star = PlumbingTree(vertices=verts, edges=((0, 1, 1), (0, 2, 1), (0, 3, 1)))
        with pytest.raises(TreeStructureError):
            clutching_word(star)


class TestMilnor:
    def test_examples(self):
        mk = lambda *v: milnor_ahat_difference(MilnorPairInput(1, 1, *v))
        assert mk(3, 5, 3, 5) == 0
        assert mk(1, 2, 2, 1) == 0
        assert mk(1, 1, 0, 0) == 1

    def test_range_gate(self):
        with pytest.raises(ValueError):
            MilnorPairInput(s=1, t=2, ps1=0, pt1=0, ps2=0, pt2=0)
        with pytest.raises(ValueError):
            MilnorPairInput(s=2, t=1, ps1=0, pt1=0, ps2=0, pt2=0)
        MilnorPairInput(s=2, t=3, ps1=0, pt1=0, ps2=0, pt2=0)

    @given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50),
           st.integers(-50, 50), st.integers(-50, 50))
    @settings(max_examples=200)
    def test_bilinearity(self, a, a2, b, c, d):
        f = lambda x, y, z, w: milnor_ahat_difference(MilnorPairInput(2, 3, x, y, z, w))
        # additivity in each slot of each product
        assert f(a + a2, b, 0, 0) == f(a, b, 0, 0) + f(a2, b, 0, 0)
        assert f(a, b + c, 0, 0) == f(a, b, 0, 0) + f(a, c, 0, 0)
        assert f(0, 0, a + a2, b) == f(0, 0, a, b) + f(0, 0, a2, b)
        # zero iff the two products agree
        assert (f(a, b, c, d) == 0) == (a * b == c * d)


class TestEta:
    @pytest.mark.parametrize("n", range(2, 11))
    def test_closed_forms(self, n):
        assert eta_local_contribution(n) == Fraction(1, 2 ** n)
        assert eta_rp(n) == Fraction(-2, 2 ** n)

    def test_fixed_point_conventions(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert fixed_point_count(8, "reported") == 3
            assert [fixed_point_count(8 * l, "reported") for l in (1, 2, 3)] == [3, 5, 7]
        assert fixed_point_count(8, "chain") == 9
        chain_counts = [fixed_point_count(m, "chain") for m in range(1, 30)]
        assert all(c2 > c1 for c1, c2 in zip(chain_counts, chain_counts[1:]))

    def test_ledger_distinctness(self):
        lengths = tuple(range(1, 101))
        led = EtaLedger(k=1, lengths=lengths,
                        fixed_point_counts={l: 2 * l + 1 for l in lengths})
        res = eta_ledger(led)
        assert res.distinct
        assert res.etas[1] - res.etas[2] == Fraction(1, 2)
        assert res.cv_coefficient == -2

    def test_degenerate_ledger_detected(self):
        with pytest.raises(ValueError):
            EtaLedger(k=1, lengths=(1, 2), fixed_point_counts={1: 3, 2: 3})

    def test_result_serialization(self):
        led = EtaLedger(k=2, lengths=(1, 2), fixed_point_counts={1: 3, 2: 5})
        res = eta_ledger(led)
        import json
        doc = json.loads(res.to_json())
        assert doc["n"] == 5
        assert doc["etas"]["1"] == [-3, 16]
