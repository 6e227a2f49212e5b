import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relkit import decompose as dc
from relkit import dominate as dm
from relkit import relation as rl
from relkit import subspace as sp
from relkit import suites
from relkit.exceptions import DimensionError, NotAnOperator, NotDominated, StaleWitness

GAP = 1e-8


def op(m):
    return rl.from_operator(np.asarray(m, dtype=float))


@st.composite
def relations(draw, max_dim=6):
    seed = draw(st.integers(0, 2**32 - 1))
    return suites.random_relation(np.random.default_rng(seed), max_dim)


def brute_min_constant(m1, m2, dom_frame, samples=20000, seed=0):
    """Lower bound for sup |m1 f| / |m2 f| by sampling the domain."""
    rng = np.random.default_rng(seed)
    y = dom_frame @ rng.standard_normal((dom_frame.shape[1], samples))
    den = np.linalg.norm(m2 @ y, axis=0)
    keep = den > 1e-9
    return float((np.linalg.norm(m1 @ y, axis=0)[keep] / den[keep]).max())


class TestDominates:
    def test_reflexive(self, r3):
        w = dm.dominates(r3, r3)
        assert w.residual <= GAP

    def test_reflexive_operator(self, rng):
        t = op(rng.standard_normal((3, 3)))
        w = dm.dominates(t, t)
        assert w.c_min <= 1 + GAP
        assert w.is_contractive()

    def test_scaled_diagonal(self):
        w = dm.dominates(op(np.diag([1.0, 0.0])), op(np.diag([2.0, 0.0])))
        assert w.c_min == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(w.canonical, np.diag([0.5, 0.0]), atol=1e-12)
        assert w.residual <= GAP

    def test_kernel_violation(self):
        with pytest.raises(NotDominated):
            dm.dominates(op(np.eye(2)), op(np.diag([1.0, 0.0])))

    def test_domain_violation(self):
        s1 = rl.from_graph_span([(1, 0, 1)], 2, 1)
        with pytest.raises(NotDominated):
            dm.dominates(s1, op([[1.0, 1.0]]))

    def test_dimension_mismatch(self, r3):
        with pytest.raises(DimensionError):
            dm.dominates(r3, rl.identity(3))

    def test_witness_fields(self, rng):
        t = op(rng.standard_normal((2, 3)))
        w = dm.dominates(t, t)
        assert w.frobenius_norm == pytest.approx(np.linalg.norm(w.c))
        assert w.spectral_norm == pytest.approx(np.linalg.norm(w.c, 2))
        assert w.c_min <= w.spectral_norm + GAP


class TestMinConstant:
    def test_reflexive(self, rng):
        t = op(rng.standard_normal((3, 3)))
        assert dm.min_constant(t, t) == pytest.approx(1.0, abs=1e-10)

    def test_scaled_diagonal(self):
        assert dm.min_constant(op(np.diag([1.0, 0.0])), op(np.diag([2.0, 0.0]))) == pytest.approx(0.5)

    def test_precondition(self):
        with pytest.raises(NotDominated):
            dm.min_constant(op(np.eye(2)), op(np.diag([1.0, 0.0])))

    def test_needs_operator_on_the_left(self, r3):
        with pytest.raises(NotAnOperator):
            dm.min_constant(r3, r3)

    @settings(max_examples=60, deadline=None)
    @given(relations())
    def test_regular_part_contractive(self, t):
        assert dm.min_constant(dc.lebesgue(t).t1, t) <= 1 + GAP

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_against_sampling(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 5))
        m2 = suites.random_orthogonal(rng, n) * rng.uniform(0.5, 2.0, n)
        m1 = rng.standard_normal((2, n))
        c = dm.min_constant(op(m1), op(m2))
        # exact value: largest singular value of m1 m2^{-1}
        assert c == pytest.approx(np.linalg.norm(m1 @ np.linalg.inv(m2), 2), rel=1e-8)
        assert brute_min_constant(m1, m2, np.eye(n), seed=seed) <= c * (1 + 1e-9)


@st.composite
def operator_pairs(draw):
    """Operator pairs where domination holds or fails by construction."""
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    r = int(rng.integers(0, n + 1))
    m2 = rng.standard_normal((int(rng.integers(1, 6)), r)) @ rng.standard_normal((r, n))
    mode = int(rng.integers(0, 3))
    if mode == 0:  # factors through m2: dominated
        m1 = rng.standard_normal((int(rng.integers(1, 6)), m2.shape[0])) @ m2
    elif mode == 1:  # nonzero on ker m2: not dominated
        ker = sp.kernel(m2)
        m1 = rng.standard_normal((2, n))
        if ker.dim == 0:
            mode = 2
        else:
            m1 = m1 + np.outer(rng.standard_normal(2), ker.frame[:, 0])
    if mode == 2:  # generic
        m1 = rng.standard_normal((int(rng.integers(1, 6)), n))
    return m1, m2


class TestDominationCriterion:
    @settings(max_examples=120, deadline=None)
    @given(operator_pairs())
    def test_dominates_iff_finite_constant(self, pair):
        m1, m2 = pair
        s1, s2 = op(m1), op(m2)
        try:
            c = dm.min_constant(s1, s2)
        except NotDominated:
            c = None
        try:
            w = dm.dominates(s1, s2)
        except NotDominated:
            w = None
        assert (c is None) == (w is None)
        if w is not None:
            assert w.c_min == pytest.approx(c, rel=1e-8, abs=1e-10)
            # |S1 f| <= c |S2 f| on the whole domain
            y = np.random.default_rng(1).standard_normal((m2.shape[1], 200))
            assert np.all(np.linalg.norm(m1 @ y, axis=0) <= c * np.linalg.norm(m2 @ y, axis=0) * (1 + 1e-8) + 1e-9)


class TestPreorder:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_transitive_chain(self, seed):
        rng = np.random.default_rng(seed)
        s3 = suites.random_relation(rng, 5)
        s2 = rl.transform(s3, k_map=rng.standard_normal((3, s3.dim_k)))
        s1 = rl.transform(s2, k_map=rng.standard_normal((2, 3)))
        w12, w23 = dm.dominates(s1, s2), dm.dominates(s2, s3)
        c13 = dm.compose(w12, w23)
        assert dm.verify_witness(s1, s3, c13) <= GAP

    def test_stale_witness(self, r3):
        with pytest.raises(StaleWitness):
            dm.verify_witness(rl.identity(2), rl.from_operator(np.diag([1.0, 2.0])), np.eye(2))

    def test_stale_is_not_dominated(self):
        assert issubclass(StaleWitness, NotDominated)

    def test_verify_shape(self, r3):
        with pytest.raises(DimensionError):
            dm.verify_witness(r3, r3, np.eye(3))


class TestTransport:
    def test_same_relation(self, r3):
        w = dm.transport_to_regular_parts(r3, r3, np.eye(2))
        t_reg = dc.lebesgue(r3).t1
        assert dm.verify_witness(t_reg, t_reg, w.c) <= GAP

    def test_r3_identity_witness(self, r3):
        w = dm.transport_to_regular_parts(r3, r3, np.eye(2))
        assert np.allclose(w.c, np.diag([0.0, 1.0]), atol=1e-12)
        assert w.spectral_norm <= 1 + GAP

    def test_operator_parts_of_operator(self, rng):
        t = op(rng.standard_normal((3, 3)))
        c = rng.standard_normal((3, 3))
        s = rl.transform(t, k_map=c)
        w = dm.transport_to_operator_parts(s, t, c)
        assert np.allclose(w.c, c)

    def test_operator_parts_agree_with_regular_parts(self, r3):
        a = dm.transport_to_regular_parts(r3, r3, np.eye(2))
        b = dm.transport_to_operator_parts(r3, r3, np.eye(2))
        assert np.allclose(a.c, b.c)

    def test_stale_input(self):
        with pytest.raises(StaleWitness):
            dm.transport_to_regular_parts(rl.identity(2), op(np.diag([1.0, 2.0])), np.eye(2))

    @settings(max_examples=40, deadline=None)
    @given(relations(), st.integers(0, 2**32 - 1))
    def test_projected_relation(self, t, seed):
        rng = np.random.default_rng(seed)
        q = suites.admissible_subspace(rng, t)
        s = rl.apply_left_projection(t, sp.complement(q))
        c = sp.projector(sp.complement(q))
        w = dm.transport_to_regular_parts(s, t, c)
        assert w.residual <= GAP
        assert w.spectral_norm <= np.linalg.norm(c, 2) + GAP


class TestMaximality:
    @settings(max_examples=40, deadline=None)
    @given(relations(), st.integers(0, 2**32 - 1))
    def test_lebesgue_type_parts_below_regular_part(self, t, seed):
        rng = np.random.default_rng(seed)
        ref = dc.lebesgue(t).t1
        t1 = dc.lebesgue_type(t, suites.admissible_subspace(rng, t)).t1
        w = dm.dominates(t1, ref)
        assert w.c_min <= 1 + GAP

    @settings(max_examples=40, deadline=None)
    @given(relations(), st.integers(0, 2**32 - 1))
    def test_distinguished_splits_below_operator_part(self, t, seed):
        rng = np.random.default_rng(seed)
        t_op = dc.weak_lebesgue(t).t1
        t1 = dc.weak_lebesgue_type(t, suites.admissible_subspace(rng, t)).t1
        assert dm.dominates(t1, t_op).residual <= GAP
