import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import as_relation, exact_adjoint_generators, exact_mul, to_subspace
from relkit import relation as rl
from relkit import subspace as sp
from relkit import suites
from relkit.exceptions import DimensionError, NotAnOperator
from relkit.subspace import DEFAULT_TOL, Subspace

GAP = 1e-8
R3_GENS = [[1, 0, 0, 1], [0, 0, 1, 0]]


def line(*v):
    return sp.span([np.asarray(v, dtype=float)])


@st.composite
def relations(draw, max_dim=6, kind=None):
    seed = draw(st.integers(0, 2**32 - 1))
    return suites.random_relation(np.random.default_rng(seed), max_dim, kind=kind)


@st.composite
def rel_and_projection(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    t = suites.random_relation(rng, 6)
    q = suites.random_subspace(rng, t.dim_k, int(rng.integers(0, t.dim_k + 1)))
    return t, q


class TestConstructors:
    def test_identity_graph(self):
        t = rl.from_operator(np.eye(2))
        expected = sp.span([(1, 0, 1, 0), (0, 1, 0, 1)])
        assert sp.equal(t.graph, expected)
        assert t.graph.dim == 2

    def test_purely_multivalued(self):
        t = rl.product_space(Subspace.zero(2), Subspace.full(2))
        assert rl.dom(t).is_zero() and rl.mul(t).is_full()

    def test_product_space_parts(self, rng):
        x = suites.random_subspace(rng, 4, 2)
        y = suites.random_subspace(rng, 3, 1)
        t = rl.product_space(x, y)
        assert sp.equal(rl.dom(t), x) and sp.equal(rl.ker(t), x)
        assert sp.equal(rl.mul(t), y) and sp.equal(rl.ran(t), y)

    def test_r3_parts(self, r3):
        assert sp.equal(rl.dom(r3), line(1, 0))
        assert sp.equal(rl.mul(r3), line(1, 0))
        assert rl.ran(r3).is_full()
        assert rl.ker(r3).is_zero()

    def test_r3_mul_matches_rational_elimination(self, r3):
        assert sp.equal(rl.mul(r3), to_subspace(exact_mul(R3_GENS, 2, 2), 2))

    def test_tuple_pairs(self):
        t = rl.from_graph_span([((1, 0), (0, 1)), ((0, 0), (1, 0))], 2, 2)
        assert rl.equal(t, as_relation(R3_GENS, 2, 2))

    def test_dimension_errors(self):
        with pytest.raises(DimensionError):
            rl.from_graph_span([(1, 0, 0)], 2, 2)
        with pytest.raises(DimensionError):
            rl.from_graph_span([((1, 0), (0,))], 2, 2)

    def test_empty_span_is_zero_relation(self):
        t = rl.from_graph_span([], 2, 3)
        assert t.graph.dim == 0 and rl.dom(t).is_zero()


class TestParts:
    def test_operator_has_no_mul(self, rng):
        assert rl.mul(rl.from_operator(rng.standard_normal((3, 4)))).is_zero()

    def test_inverse_of_product(self, rng):
        x = suites.random_subspace(rng, 3, 2)
        y = suites.random_subspace(rng, 2, 1)
        assert rl.equal(rl.inverse(rl.product_space(x, y)), rl.product_space(y, x))

    def test_closure_is_identity(self, r3):
        assert rl.equal(rl.closure(r3), r3)

    def test_operator_matrix(self, rng):
        m = rng.standard_normal((3, 2))
        assert np.allclose(rl.operator_matrix(rl.from_operator(m)), m, atol=1e-12)

    def test_operator_matrix_rejects_multivalued(self, r3):
        with pytest.raises(NotAnOperator):
            rl.operator_matrix(r3)

    def test_partial_operator_matrix_vanishes_off_domain(self):
        t = rl.from_graph_span([(1, 0, 2, 3)], 2, 2)
        m = rl.operator_matrix(t)
        assert np.allclose(m, [[2, 0], [3, 0]])


class TestAdjoint:
    def test_operator(self, rng):
        m = rng.standard_normal((3, 2))
        assert rl.equal(rl.adjoint(rl.from_operator(m)), rl.from_operator(m.T))

    def test_r3(self, r3):
        expected = rl.from_graph_span([(0, 1, 1, 0), (0, 0, 0, 1)], 2, 2)
        assert rl.equal(rl.adjoint(r3), expected)

    def test_r3_against_rational_oracle(self, r3):
        gens = exact_adjoint_generators(R3_GENS, 2, 2)
        assert rl.equal(rl.adjoint(r3), as_relation(gens, 2, 2))

    def test_pairing(self, r3):
        ta = rl.adjoint(r3)
        # <k, g'> = <h, f> for (f, g') in T and (k, h) in T*
        pairing = ta.h_block.T @ r3.k_block - ta.k_block.T @ r3.h_block
        assert np.abs(pairing).max() < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(relations())
    def test_involution(self, t):
        assert rl.graph_gap(rl.adjoint(rl.adjoint(t)), t) <= GAP

    @settings(max_examples=60, deadline=None)
    @given(relations())
    def test_duality(self, t):
        ta = rl.adjoint(t)
        assert sp.gap(sp.complement(rl.dom(t)), rl.mul(ta)) <= GAP
        assert sp.gap(sp.complement(rl.ran(t)), rl.ker(ta)) <= GAP
        assert sp.gap(sp.complement(rl.dom(ta)), rl.mul(t)) <= GAP
        assert sp.gap(sp.complement(rl.ran(ta)), rl.ker(t)) <= GAP

    @settings(max_examples=60, deadline=None)
    @given(relations())
    def test_space_decompositions(self, t):
        ta = rl.adjoint(t)
        assert sp.sum(rl.dom(t), rl.ran(ta)).is_full()
        assert sp.sum(rl.dom(ta), rl.ran(t)).is_full()


class TestSum:
    def test_operators(self, rng):
        m, n = rng.standard_normal((2, 3)), rng.standard_normal((2, 3))
        assert rl.equal(rl.rel_sum(rl.from_operator(m), rl.from_operator(n)), rl.from_operator(m + n))

    @settings(max_examples=40, deadline=None)
    @given(relations())
    def test_additive_zero(self, t):
        z = rl.zero_on(rl.dom(t), t.dim_k)
        assert rl.graph_gap(rl.rel_sum(t, z), t) <= GAP

    @settings(max_examples=40, deadline=None)
    @given(relations(), st.integers(0, 2**32 - 1))
    def test_dom_and_mul(self, t1, seed):
        rng = np.random.default_rng(seed)
        # random partial operator plus one multivalued direction
        gens = list(np.vstack([rng.standard_normal((t1.dim_h, 2)), rng.standard_normal((t1.dim_k, 2))]).T)
        gens.append(np.concatenate([np.zeros(t1.dim_h), rng.standard_normal(t1.dim_k)]))
        t2 = rl.from_graph_span(gens, t1.dim_h, t1.dim_k)
        s = rl.rel_sum(t1, t2)
        assert sp.gap(rl.dom(s), sp.intersect(rl.dom(t1), rl.dom(t2))) <= GAP
        assert sp.gap(rl.mul(s), sp.sum(rl.mul(t1), rl.mul(t2))) <= GAP

    def test_shape_mismatch(self, r3):
        with pytest.raises(DimensionError):
            rl.rel_sum(r3, rl.identity(3))


class TestProduct:
    def test_operators(self, rng):
        a, b = rng.standard_normal((2, 3)), rng.standard_normal((3, 4))
        assert rl.equal(rl.rel_product(rl.from_operator(a), rl.from_operator(b)), rl.from_operator(a @ b))

    @settings(max_examples=40, deadline=None)
    @given(rel_and_projection())
    def test_projector_product_is_left_projection(self, tq):
        t, q = tq
        assert rl.graph_gap(rl.rel_product(rl.projector_as_operator(q), t), rl.apply_left_projection(t, q)) <= GAP

    def test_gram_of_nilpotent(self):
        r1 = rl.from_operator([[0, 0], [1, 0]])
        assert rl.equal(rl.gram(r1), rl.from_operator(np.diag([1.0, 0.0])))
        assert rl.equal(rl.gram(r1), rl.rel_product(rl.adjoint(r1), r1))

    def test_inner_dimension_mismatch(self, r3):
        with pytest.raises(DimensionError):
            rl.rel_product(r3, rl.identity(3))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_product_adjoint_inclusion(self, seed):
        rng = np.random.default_rng(seed)
        h, m, k = (int(v) for v in rng.integers(1, 5, size=3))
        t2 = suites.random_relation(rng, 4)
        t2 = rl.transform(t2, h_map=rng.standard_normal((h, t2.dim_h)), k_map=rng.standard_normal((m, t2.dim_k)))
        t1 = suites.random_relation(rng, 4)
        t1 = rl.transform(t1, h_map=rng.standard_normal((m, t1.dim_h)), k_map=rng.standard_normal((k, t1.dim_k)))
        left = rl.rel_product(rl.adjoint(t2), rl.adjoint(t1))
        right = rl.adjoint(rl.rel_product(t1, t2))
        assert rl.included(left, right)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_product_adjoint_equality_for_bounded_left(self, seed):
        rng = np.random.default_rng(seed)
        t2 = suites.random_relation(rng, 5)
        t1 = rl.from_operator(rng.standard_normal((int(rng.integers(1, 5)), t2.dim_k)))
        left = rl.rel_product(rl.adjoint(t2), rl.adjoint(t1))
        right = rl.adjoint(rl.rel_product(t1, t2))
        assert rl.graph_gap(left, right) <= GAP


class TestLeftProjection:
    def test_full(self, r3):
        assert rl.equal(rl.apply_left_projection(r3, Subspace.full(2)), r3)

    def test_r3_onto_k1(self, r3):
        expected = rl.product_space(line(1, 0), line(1, 0))
        assert rl.equal(rl.apply_left_projection(r3, line(1, 0)), expected)

    @settings(max_examples=60, deadline=None)
    @given(rel_and_projection())
    def test_adjoint_formula(self, tq):
        t, q = tq
        lhs = rl.adjoint(rl.apply_left_projection(t, q))
        rhs = rl.rel_product(rl.adjoint(t), rl.projector_as_operator(q))
        assert rl.graph_gap(lhs, rhs) <= GAP

    @settings(max_examples=60, deadline=None)
    @given(rel_and_projection())
    def test_domain_of_adjoint_times_projection(self, tq):
        t, q = tq
        d = rl.dom(rl.rel_product(rl.adjoint(t), rl.projector_as_operator(q)))
        expected = sp.sum(sp.complement(q), sp.intersect(rl.dom(rl.adjoint(t)), q))
        assert sp.gap(d, expected) <= GAP

    @settings(max_examples=60, deadline=None)
    @given(rel_and_projection())
    def test_split_reconstructs_iff_mul_invariant(self, tq):
        t, q = tq
        m = rl.mul(t)
        invariant = m.is_zero() or sp.contains(m, sp.projector(q) @ m.frame)
        recon = rl.rel_sum(rl.apply_left_projection(t, sp.complement(q)), rl.apply_left_projection(t, q))
        assert (rl.graph_gap(recon, t) <= GAP) == invariant

    def test_split_overshoots_when_mul_not_invariant(self, r3):
        q = line(1, 1)
        recon = rl.rel_sum(rl.apply_left_projection(r3, sp.complement(q)), rl.apply_left_projection(r3, q))
        assert rl.included(r3, recon)
        assert not rl.equal(recon, r3)

    def test_dimension_mismatch(self, r3):
        with pytest.raises(DimensionError):
            rl.apply_left_projection(r3, Subspace.full(3))


class TestClassification:
    def test_product_is_singular(self, rng):
        x, y = suites.random_subspace(rng, 3, 2), suites.random_subspace(rng, 4, 2)
        assert rl.is_singular(rl.product_space(x, y))

    def test_r3(self, r3):
        assert not rl.is_operator(r3)
        assert not rl.is_regular(r3)
        assert not rl.is_singular(r3)

    def test_zero_operator_regular_and_singular(self):
        z = rl.from_operator(np.zeros((2, 3)))
        assert rl.is_singular(z) and rl.is_regular(z)

    def test_nonzero_operator_not_singular(self):
        assert not rl.is_singular(rl.from_operator(np.diag([1.0, 0.0])))

    def test_selfadjoint(self, rng):
        a = rng.standard_normal((3, 3))
        assert rl.is_selfadjoint(rl.from_operator(a + a.T))
        assert not rl.is_selfadjoint(rl.from_operator(np.array([[0.0, 1.0], [0.0, 0.0]])))

    def test_nonnegative(self):
        assert rl.is_nonnegative(rl.from_operator(np.diag([1.0, 0.0])))
        assert not rl.is_nonnegative(rl.from_operator(np.diag([1.0, -1.0])))

    def test_square_only(self, rng):
        t = rl.from_operator(rng.standard_normal((2, 3)))
        with pytest.raises(DimensionError):
            rl.is_selfadjoint(t)
        with pytest.raises(DimensionError):
            rl.is_nonnegative(t)


class TestGram:
    def test_operator(self, rng):
        m = rng.standard_normal((4, 3))
        assert rl.equal(rl.gram(rl.from_operator(m)), rl.from_operator(m.T @ m))

    def test_r3_mul(self, r3):
        g = rl.gram(r3)
        assert sp.equal(rl.mul(g), line(0, 1))
        assert sp.equal(rl.mul(g), rl.mul(rl.adjoint(r3)))

    @settings(max_examples=60, deadline=None)
    @given(relations())
    def test_nonnegative_selfadjoint(self, t):
        g = rl.gram(t)
        assert rl.is_nonnegative(g)
        assert rl.is_selfadjoint(g)
        assert sp.gap(rl.mul(g), rl.mul(rl.adjoint(t))) <= GAP
        shifted = rl.rel_sum(g, rl.identity(t.dim_h))
        assert rl.ran(shifted).is_full()


def test_memoized_parts_are_stable(r3):
    assert rl.mul(r3) is rl.mul(r3)
    assert rl.adjoint(r3) is rl.adjoint(r3)
    loose = DEFAULT_TOL.replace(rank_rtol=1e-6)
    assert sp.equal(rl.mul(r3, loose), rl.mul(r3))
