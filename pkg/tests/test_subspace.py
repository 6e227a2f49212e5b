import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relkit import subspace as sp
from relkit.exceptions import DimensionError
from relkit.subspace import DEFAULT_TOL, Subspace, ToleranceConfig

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def line(v):
    return sp.span([np.asarray(v, dtype=float)])


@st.composite
def subspaces(draw, n=None):
    n = draw(st.integers(1, 10)) if n is None else n
    k = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    if k == 0:
        return Subspace.zero(n)
    return sp.span(list((rng.standard_normal((n, k))).T), ambient_dim=n)


@st.composite
def subspace_pairs(draw):
    n = draw(st.integers(1, 10))
    return draw(subspaces(n)), draw(subspaces(n))


class TestTolerance:
    def test_defaults_in_range(self):
        t = DEFAULT_TOL
        assert 0 < t.rank_rtol < 1 and 0 < t.eq < 1 and 0 < t.contain < 1 and 0 < t.orth < 1

    @pytest.mark.parametrize("bad", [0.0, -1e-3, 1.0, 2.0])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            ToleranceConfig(rank_rtol=bad)

    def test_replace_keeps_other_fields(self):
        t = DEFAULT_TOL.replace(rank_rtol=1e-6)
        assert t.rank_rtol == 1e-6 and t.eq == DEFAULT_TOL.eq


class TestSpan:
    def test_collinear(self):
        s = sp.span([(1, 0), (2, 0)])
        assert s.dim == 1
        assert np.allclose(np.abs(s.frame[:, 0]), [1, 0])

    def test_empty_needs_ambient(self):
        s = sp.span([], ambient_dim=3)
        assert s.dim == 0 and s.ambient_dim == 3

    def test_near_collinear_below_cutoff(self):
        # singular values of [[1,1],[1,1+1e-14]] are ~2 and ~5e-15
        s_vals = np.linalg.svd(np.array([[1, 1], [1, 1 + 1e-14]]), compute_uv=False)
        assert s_vals[1] < 1e-10 * s_vals[0]
        assert sp.span([(1, 1), (1, 1 + 1e-14)], ToleranceConfig(rank_rtol=1e-10)).dim == 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            sp.span([(1, 0), (1, 0, 0)])

    def test_frame_is_orthonormal(self, rng):
        s = sp.span(list(rng.standard_normal((4, 7))), ambient_dim=7)
        assert np.allclose(s.frame.T @ s.frame, np.eye(4), atol=1e-12)

    def test_kernel_of_full_rank(self):
        assert sp.kernel(np.eye(3)).dim == 0
        assert sp.kernel(np.zeros((2, 3))).dim == 3


class TestComplement:
    def test_line_in_plane(self):
        assert sp.equal(sp.complement(line(E1)), line(E2))

    def test_zero(self):
        c = sp.complement(Subspace.zero(3))
        assert c.dim == 3

    def test_diagonal(self):
        c = sp.complement(line((1, 1)))
        assert sp.equal(c, line((1, -1)))

    @settings(max_examples=100, deadline=None)
    @given(subspaces())
    def test_involution_and_projectors(self, s):
        c = sp.complement(s)
        assert c.dim == s.ambient_dim - s.dim
        assert sp.gap(sp.complement(c), s) <= DEFAULT_TOL.eq
        assert np.allclose(sp.projector(s) + sp.projector(c), np.eye(s.ambient_dim), atol=1e-12)


class TestSumIntersect:
    def test_trivial(self):
        assert sp.intersect(line(E1), line(E2)).is_zero()
        assert sp.sum(line(E1), line(E2)).is_full()

    def test_intersect_planes(self):
        a = sp.span([(1, 0, 0), (0, 1, 0)])
        b = sp.span([(1, 1, 0), (0, 0, 1)])
        assert sp.equal(sp.intersect(a, b), line((1, 1, 0)))

    def test_ambient_mismatch(self):
        with pytest.raises(DimensionError):
            sp.sum(line(E1), Subspace.full(3))
        with pytest.raises(DimensionError):
            sp.intersect(line(E1), Subspace.full(3))

    @settings(max_examples=200, deadline=None)
    @given(subspace_pairs())
    def test_dimension_formula(self, pair):
        a, b = pair
        assert a.dim + b.dim == sp.sum(a, b).dim + sp.intersect(a, b).dim

    @settings(max_examples=200, deadline=None)
    @given(subspace_pairs())
    def test_monotonicity(self, pair):
        a, b = pair
        assert sp.contains(sp.sum(a, b), a)
        assert sp.contains(a, sp.intersect(a, b))

    def test_zero_subspace_everywhere(self):
        z, f = Subspace.zero(4), Subspace.full(4)
        assert sp.sum(z, z).is_zero()
        assert sp.intersect(z, f).is_zero()
        assert sp.equal(sp.sum(z, f), f)
        assert sp.gap(z, z) == 0.0
        assert np.array_equal(sp.projector(z), np.zeros((4, 4)))


class TestProjector:
    def test_coordinate(self):
        assert np.allclose(sp.projector(line(E1)), np.diag([1.0, 0.0]))

    def test_zero_projection(self):
        assert np.array_equal(sp.project(Subspace.zero(3), np.ones(3)), np.zeros(3))

    def test_diagonal(self):
        assert np.allclose(sp.project(line((1, 1)), (1, 0)), [0.5, 0.5])

    def test_project_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            sp.project(line(E1), np.ones(3))

    @settings(max_examples=100, deadline=None)
    @given(subspaces())
    def test_idempotent_symmetric(self, s):
        p = sp.projector(s)
        bound = 10 * DEFAULT_TOL.orth
        assert np.abs(p @ p - p).max() <= bound
        assert np.abs(p - p.T).max() <= bound


class TestContainsGap:
    def test_contains(self):
        assert sp.contains(Subspace.full(2), line(E1))
        assert not sp.contains(line(E1), line(E2))
        assert sp.contains(line(E1), np.array([3.0, 0.0]))

    def test_gap_orthogonal_lines(self):
        assert sp.gap(line(E1), line(E2)) == pytest.approx(1.0, abs=1e-14)

    def test_gap_angle(self):
        # two lines at angle theta: projector gap is sin(theta)
        theta = 0.3
        g = sp.gap(line(E1), line((np.cos(theta), np.sin(theta))))
        assert g == pytest.approx(np.sin(theta), abs=1e-14)

    def test_gap_different_dims_is_one(self):
        assert sp.gap(line(E1), Subspace.full(2)) == pytest.approx(1.0)

    @settings(max_examples=50, deadline=None)
    @given(subspaces())
    def test_gap_reflexive(self, s):
        assert sp.gap(s, s) <= DEFAULT_TOL.eq

    @settings(max_examples=100, deadline=None)
    @given(subspace_pairs())
    def test_gap_matches_projector_difference(self, pair):
        a, b = pair
        direct = np.linalg.norm(sp.projector(a) - sp.projector(b), 2)
        assert sp.gap(a, b) == pytest.approx(direct, abs=1e-10)


def test_direct_sum_coords():
    s = sp.direct_sum_coords(line(E1), Subspace.full(1))
    assert s.ambient_dim == 3 and s.dim == 2
    assert sp.equal(s, sp.span([(1, 0, 0), (0, 0, 1)]))


def test_frame_check_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0], [1.0]]))
