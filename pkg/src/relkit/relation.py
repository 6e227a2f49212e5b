"""Linear relations between finite-dimensional real Hilbert spaces.

A relation ``T`` from ``H = R^dim_h`` to ``K = R^dim_k`` is stored as its
graph, a :class:`~relkit.subspace.Subspace` of ``H + K`` with the
H-component first.  Graphs are always closed in finite dimension, so the
closure ``T**`` coincides with ``T``; :func:`closure` exists so that code
written against ``T**`` reads literally.

Regular (closable), strongly regular and bounded-closure relations coincide
here, so only :func:`is_regular` is exposed.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import subspace as sp
from .exceptions import ConsistencyError, DimensionError, NotAnOperator
from .subspace import DEFAULT_TOL, Subspace, ToleranceConfig


@dataclass(frozen=True, eq=False)
class LinearRelation:
    dim_h: int
    dim_k: int
    graph: Subspace
    # memo for structural parts; relations are immutable
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim_h < 1 or self.dim_k < 1:
            raise DimensionError("both spaces must have positive dimension")
        if self.graph.ambient_dim != self.dim_h + self.dim_k:
            raise DimensionError(
                f"graph lives in R^{self.graph.ambient_dim}, "
                f"expected R^{self.dim_h + self.dim_k}"
            )

    @property
    def h_block(self) -> np.ndarray:
        """H-components of the graph frame (``dim_h x dim T``)."""
        return self.graph.frame[: self.dim_h]

    @property
    def k_block(self) -> np.ndarray:
        """K-components of the graph frame (``dim_k x dim T``)."""
        return self.graph.frame[self.dim_h:]

    def __repr__(self):
        return f"LinearRelation(dim_h={self.dim_h}, dim_k={self.dim_k}, dim_graph={self.graph.dim})"


def _graph_from_columns(cols, dim_h, dim_k, tol, scale=None):
    return LinearRelation(dim_h, dim_k, sp.span(cols, tol, ambient_dim=dim_h + dim_k, scale=scale))


# -- constructors -----------------------------------------------------------

def from_operator(m, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Graph ``{(f, M f)}`` of an everywhere defined operator ``M`` (``dim_k x dim_h``)."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    dim_k, dim_h = m.shape
    return _graph_from_columns(np.vstack([np.eye(dim_h), m]), dim_h, dim_k, tol)


def from_graph_span(pairs, dim_h: int, dim_k: int, tol: ToleranceConfig = DEFAULT_TOL, scale=None) -> LinearRelation:
    """Relation spanned by graph elements.

    Each entry of ``pairs`` is either a concatenated vector ``(f | f')`` of
    length ``dim_h + dim_k`` or a 2-tuple ``(f, f')``.  ``scale`` is passed
    to :func:`~relkit.subspace.span` as the rank reference.
    """
    cols = []
    for p in pairs:
        if isinstance(p, tuple) and len(p) == 2:
            f, fp = (np.asarray(x, dtype=float).ravel() for x in p)
            if f.size != dim_h or fp.size != dim_k:
                raise DimensionError("pair components do not match (dim_h, dim_k)")
            cols.append(np.concatenate([f, fp]))
        else:
            v = np.asarray(p, dtype=float).ravel()
            if v.size != dim_h + dim_k:
                raise DimensionError(f"graph vector of length {v.size}, expected {dim_h + dim_k}")
            cols.append(v)
    if not cols:
        return LinearRelation(dim_h, dim_k, Subspace.zero(dim_h + dim_k))
    return _graph_from_columns(np.column_stack(cols), dim_h, dim_k, tol, scale=scale)


def from_frame(frame, dim_h: int, dim_k: int, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Relation whose graph has the given orthonormal frame."""
    return LinearRelation(dim_h, dim_k, Subspace(frame, dim_h + dim_k, tol=tol))


def product_space(x: Subspace, y: Subspace) -> LinearRelation:
    """The relation ``X x Y``: every ``f`` in X is related to every ``g`` in Y."""
    return LinearRelation(x.ambient_dim, y.ambient_dim, sp.direct_sum_coords(x, y))


def zero_on(x: Subspace, dim_k: int) -> LinearRelation:
    """Zero operator on ``x``, i.e. ``X x {0}``."""
    return product_space(x, Subspace.zero(dim_k))


def identity(n: int) -> LinearRelation:
    return from_operator(np.eye(n))


def projector_as_operator(q: Subspace) -> LinearRelation:
    return from_operator(sp.projector(q))


# -- structural parts -------------------------------------------------------

def _memo(fn):
    @functools.wraps(fn)
    def wrapper(t, tol: ToleranceConfig = DEFAULT_TOL):
        key = (fn.__name__, tol)
        if key not in t._cache:
            t._cache[key] = fn(t, tol)
        return t._cache[key]

    return wrapper


@_memo
def dom(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    return sp.span(t.h_block, tol, ambient_dim=t.dim_h, scale=1.0)


@_memo
def ran(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    return sp.span(t.k_block, tol, ambient_dim=t.dim_k, scale=1.0)


@_memo
def mul(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Multivalued part ``{g : (0, g) in T}``.

    This is the intersection of the graph with ``{0} x K``.  With the graph
    frame ``[F; G]`` orthonormal it equals ``G ker F``, which needs a single
    rank decision on ``F``.
    """
    if t.graph.dim == 0:
        return Subspace.zero(t.dim_k)
    null = sp.kernel(t.h_block, tol, scale=1.0)
    return sp.span(t.k_block @ null.frame, tol, ambient_dim=t.dim_k, scale=1.0)


@_memo
def ker(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Kernel ``{f : (f, 0) in T}``, computed as the multivalued part of the inverse."""
    return mul(inverse(t), tol)


def inverse(t: LinearRelation) -> LinearRelation:
    frame = np.vstack([t.k_block, t.h_block])
    return LinearRelation(t.dim_k, t.dim_h, Subspace(frame, check=False))


def closure(t: LinearRelation) -> LinearRelation:
    """``T**``; graphs are closed in finite dimension so this returns ``t``."""
    return t


def flip(dim_h: int, dim_k: int) -> np.ndarray:
    """Matrix of ``J(f, f') = (f', -f)`` from ``H + K`` to ``K + H``."""
    j = np.zeros((dim_k + dim_h, dim_h + dim_k))
    j[:dim_k, dim_h:] = np.eye(dim_k)
    j[dim_k:, :dim_h] = -np.eye(dim_h)
    return j


def adjoint(t: LinearRelation) -> LinearRelation:
    """``T* = J(T^perp)``, a relation from K to H."""
    if "adjoint" not in t._cache:
        perp = sp.complement(t.graph)
        frame = flip(t.dim_h, t.dim_k) @ perp.frame
        t._cache["adjoint"] = LinearRelation(t.dim_k, t.dim_h, Subspace(frame, t.dim_h + t.dim_k, check=False))
    return t._cache["adjoint"]


# -- algebra ----------------------------------------------------------------

def _check_shape(t1, t2):
    if (t1.dim_h, t1.dim_k) != (t2.dim_h, t2.dim_k):
        raise DimensionError(
            f"relations act between different spaces: "
            f"({t1.dim_h}->{t1.dim_k}) vs ({t2.dim_h}->{t2.dim_k})"
        )


def rel_sum(t1: LinearRelation, t2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Sum ``{(f, h + k) : (f, h) in T1, (f, k) in T2}`` on the joint domain."""
    _check_shape(t1, t2)
    h, k = t1.dim_h, t1.dim_k
    # in H + K + K: {(f, h, k) : (f, h) in T1} meets {(f, h, k) : (f, k) in T2}
    a = sp.direct_sum_coords(t1.graph, Subspace.full(k))
    b_frame = np.zeros((h + 2 * k, t2.graph.dim + k))
    b_frame[:h, : t2.graph.dim] = t2.h_block
    b_frame[h + k:, : t2.graph.dim] = t2.k_block
    b_frame[h:h + k, t2.graph.dim:] = np.eye(k)
    b = Subspace(b_frame, check=False)
    w = sp.intersect(a, b, tol).frame
    cols = np.vstack([w[:h], w[h:h + k] + w[h + k:]])
    return _graph_from_columns(cols, h, k, tol, scale=1.0)


def rel_product(t1: LinearRelation, t2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Product ``T1 T2``: first ``T2`` (H -> M), then ``T1`` (M -> K)."""
    if t2.dim_k != t1.dim_h:
        raise DimensionError(f"inner dimensions differ: {t2.dim_k} vs {t1.dim_h}")
    h, m, k = t2.dim_h, t2.dim_k, t1.dim_k
    a = sp.direct_sum_coords(t2.graph, Subspace.full(k))
    b = sp.direct_sum_coords(Subspace.full(h), t1.graph)
    w = sp.intersect(a, b, tol).frame
    cols = np.vstack([w[:h], w[h + m:]])
    return _graph_from_columns(cols, h, k, tol, scale=1.0)


def apply_left_projection(t: LinearRelation, q: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """The relation ``Q T = {(f, P_Q g) : (f, g) in T}``."""
    if q.ambient_dim != t.dim_k:
        raise DimensionError(f"projector acts on R^{q.ambient_dim}, relation maps into R^{t.dim_k}")
    cols = np.vstack([t.h_block, sp.projector(q) @ t.k_block])
    return _graph_from_columns(cols, t.dim_h, t.dim_k, tol, scale=1.0)


def transform(t: LinearRelation, h_map=None, k_map=None, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """Image of the graph under ``(f, g) -> (h_map f, k_map g)``."""
    fh = t.h_block if h_map is None else np.asarray(h_map, dtype=float) @ t.h_block
    gk = t.k_block if k_map is None else np.asarray(k_map, dtype=float) @ t.k_block
    return _graph_from_columns(np.vstack([fh, gk]), fh.shape[0], gk.shape[0], tol, scale=1.0)


def gram(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """``T* T``, a nonnegative selfadjoint relation in H."""
    return rel_product(adjoint(t), t, tol)


# -- comparison -------------------------------------------------------------

def graph_gap(t1: LinearRelation, t2: LinearRelation) -> float:
    _check_shape(t1, t2)
    return sp.gap(t1.graph, t2.graph)


def equal(t1: LinearRelation, t2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return graph_gap(t1, t2) <= tol.eq


def included(t1: LinearRelation, t2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Graph inclusion ``T1 subset T2``."""
    _check_shape(t1, t2)
    return sp.contains(t2.graph, t1.graph, tol)


def operator_matrix(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Matrix ``M`` with ``M f = T f`` on ``dom T`` and ``M = 0`` on its complement."""
    if not is_operator(t, tol):
        raise NotAnOperator("relation has a nontrivial multivalued part")
    return _operator_matrix(t, tol).copy()


@_memo
def _operator_matrix(t, tol):
    f, g = t.h_block, t.k_block
    if f.shape[1] == 0:
        return np.zeros((t.dim_k, t.dim_h))
    return g @ np.linalg.pinv(f, rcond=tol.rank_rtol)


# -- classification ---------------------------------------------------------

def is_operator(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return mul(t, tol).is_zero()


def is_regular(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """``T**`` is an operator; identical to :func:`is_operator` here."""
    return is_operator(closure(t), tol)


def singular_residuals(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> dict:
    """Projector gaps for ``dom T* = ker T*`` and ``dom T = ker T``."""
    ta = adjoint(t)
    return {
        "dom_adjoint_eq_ker_adjoint": sp.gap(dom(ta, tol), ker(ta, tol)),
        "dom_eq_ker": sp.gap(dom(t, tol), ker(t, tol)),
    }


def is_singular(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Decided by ``dom T* = ker T*`` and cross-checked against ``dom T = ker T``."""
    res = singular_residuals(t, tol)
    via_adjoint = res["dom_adjoint_eq_ker_adjoint"] <= tol.eq
    via_t = res["dom_eq_ker"] <= tol.eq
    if via_adjoint != via_t:
        raise ConsistencyError(f"singularity characterizations disagree: {res}")
    return via_adjoint


def is_selfadjoint(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    if t.dim_h != t.dim_k:
        raise DimensionError("selfadjointness needs dim_h == dim_k")
    return sp.equal(t.graph, adjoint(t).graph, tol)


def is_nonnegative(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """``(f', f) >= 0`` on the graph, via the symmetric part of ``G^T F``."""
    if t.dim_h != t.dim_k:
        raise DimensionError("nonnegativity needs dim_h == dim_k")
    if t.graph.dim == 0:
        return True
    form = t.k_block.T @ t.h_block
    form = 0.5 * (form + form.T)
    return float(np.linalg.eigvalsh(form).min()) >= -tol.contain
