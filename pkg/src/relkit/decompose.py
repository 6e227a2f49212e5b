"""Orthogonal range decompositions ``T = T1 + T2`` and their Lebesgue variants.

Every split here has the form ``T1 = (I - Q) T``, ``T2 = Q T`` for an
orthogonal projector ``Q`` in K.  Constructors validate their input first:
a subspace that does not generate the requested kind of split is an error,
never a silent best-effort.

Finite-dimensional facts used throughout: ``mul T = mul T**`` is closed and
``dom T* = (mul T)^perp`` is closed.  Hence the weak Lebesgue decomposition
coincides with the Lebesgue decomposition, and every admissible subspace
produces that same split.  Non-unique Lebesgue type decompositions need a
non-closed ``dom T*`` and cannot be represented with matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import relation as rl
from . import subspace as sp
from .exceptions import (
    ConditionViolation,
    ConsistencyError,
    DimensionError,
    InvalidProjector,
    NotOrthogonal,
    NotSingular,
)
from .relation import LinearRelation
from .subspace import DEFAULT_TOL, Subspace, ToleranceConfig


@dataclass(frozen=True, eq=False)
class LebesgueSplit:
    """A validated orthogonal range decomposition ``source = t1 + t2``.

    ``q`` is the range of the projector that produced the split and
    ``canonical_m`` is ``clos ran t2``; the two differ when ``q`` carries
    directions orthogonal to ``ran T``.  ``l_part`` is ``canonical_m``
    minus ``mul T``.
    """

    source: LinearRelation
    t1: LinearRelation
    t2: LinearRelation
    q: Subspace
    canonical_m: Subspace
    l_part: Subspace
    t1_is_operator: bool
    t1_is_regular: bool
    t2_is_singular: bool

    @property
    def flags(self) -> dict:
        return {
            "t1_is_operator": self.t1_is_operator,
            "t1_is_regular": self.t1_is_regular,
            "t2_is_singular": self.t2_is_singular,
        }


def _ensure(cond, message):
    if not cond:
        raise ConsistencyError(message)


def mul_invariance_residual(t: LinearRelation, q: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """How far ``Q mul T`` sticks out of ``mul T``."""
    m = rl.mul(t, tol)
    if m.is_zero():
        return 0.0
    return sp.containment_residual(m, sp.projector(q) @ m.frame)


def split_residuals(split: LebesgueSplit, tol: ToleranceConfig = DEFAULT_TOL) -> dict:
    """Numerical residuals of the three defining invariants of a split."""
    t = split.source
    recon = rl.graph_gap(rl.rel_sum(split.t1, split.t2, tol), t)
    r1, r2 = rl.ran(split.t1, tol).frame, rl.ran(split.t2, tol).frame
    ortho = float(np.abs(r1.T @ r2).max()) if r1.size and r2.size else 0.0
    d = rl.dom(t, tol)
    dom_gap = max(sp.gap(rl.dom(split.t1, tol), d), sp.gap(rl.dom(split.t2, tol), d))
    return {"reconstruction": recon, "range_orthogonality": ortho, "domain": dom_gap}


def orthogonal_range_split(t: LinearRelation, q: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> LebesgueSplit:
    """Split ``T = (I - Q) T + Q T``.

    Raises
    ------
    InvalidProjector
        If ``Q mul T`` is not contained in ``mul T``; the sum of the two
        pieces would then be strictly larger than ``T``.
    """
    if q.ambient_dim != t.dim_k:
        raise DimensionError(f"Q acts on R^{q.ambient_dim}, relation maps into R^{t.dim_k}")
    resid = mul_invariance_residual(t, q, tol)
    if resid > tol.contain:
        raise InvalidProjector(f"Q mul T is not contained in mul T (residual {resid:.3e})")
    t1 = rl.apply_left_projection(t, sp.complement(q), tol)
    t2 = rl.apply_left_projection(t, q, tol)
    m = rl.ran(t2, tol)
    split = LebesgueSplit(
        source=t,
        t1=t1,
        t2=t2,
        q=q,
        canonical_m=m,
        l_part=sp.intersect(m, sp.complement(rl.mul(t, tol)), tol),
        t1_is_operator=rl.is_operator(t1, tol),
        t1_is_regular=rl.is_regular(t1, tol),
        t2_is_singular=rl.is_singular(t2, tol),
    )
    res = split_residuals(split, tol)
    _ensure(res["reconstruction"] <= tol.eq, f"t1 + t2 != T: {res}")
    _ensure(res["range_orthogonality"] <= tol.contain, f"ranges not orthogonal: {res}")
    _ensure(res["domain"] <= tol.eq, f"domains differ: {res}")
    return split


def lebesgue(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LebesgueSplit:
    """Regular part ``(I - P) T`` plus singular part ``P T``, ``P`` onto ``mul T**``."""
    p = rl.mul(rl.closure(t), tol)
    split = orthogonal_range_split(t, p, tol)
    _ensure(split.t1_is_regular, "regular part is not an operator")
    _ensure(split.t2_is_singular, "singular part is not singular")
    expected = rl.product_space(rl.dom(rl.closure(t), tol), p)
    _ensure(rl.equal(rl.closure(split.t2), expected, tol), "closure of singular part is not dom T** x mul T**")
    _ensure(rl.included(split.t1, rl.closure(t), tol), "regular part is not contained in T**")
    return split


def weak_lebesgue(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> LebesgueSplit:
    """Operator part ``(I - P_m) T`` plus multivalued part ``P_m T``, ``P_m`` onto ``clos mul T``."""
    pm = rl.mul(t, tol)
    split = orthogonal_range_split(t, pm, tol)
    _ensure(split.t1_is_operator, "operator part has a multivalued part")
    expected = rl.product_space(rl.dom(rl.closure(t), tol), pm)
    _ensure(rl.equal(rl.closure(split.t2), expected, tol), "closure of T_mul is not dom T** x clos mul T")
    # T_reg = (I - P) T_op
    p = rl.mul(rl.closure(t), tol)
    t_reg = rl.apply_left_projection(t, sp.complement(p), tol)
    _ensure(
        rl.equal(rl.apply_left_projection(split.t1, sp.complement(p), tol), t_reg, tol),
        "(I - P) T_op differs from T_reg",
    )
    _ensure(sp.equal(pm, p, tol), "clos mul T differs from mul T**")
    _ensure(rl.equal(split.t1, t_reg, tol), "weak and strong decompositions differ")
    return split


def check_lebesgue_type(t: LinearRelation, m: Subspace, tol: ToleranceConfig = DEFAULT_TOL, weak=False):
    """Raise :class:`ConditionViolation` if ``m`` does not generate a (weak) Lebesgue type split.

    Clauses (finite-dimensional reading, closures are identities):

    ``"closure"``
        ``M^perp`` contained in ``dom T*`` (strong), or ``mul T`` contained
        in ``M`` (weak, reported as ``"mul_inclusion"``).
    ``"kernel"``
        ``M cap dom T*`` contained in ``ker T*``.
    """
    if m.ambient_dim != t.dim_k:
        raise DimensionError(f"M lives in R^{m.ambient_dim}, relation maps into R^{t.dim_k}")
    ta = rl.adjoint(t)
    dom_a, ker_a = rl.dom(ta, tol), rl.ker(ta, tol)
    if weak:
        resid = sp.containment_residual(m, rl.mul(t, tol))
        if resid > tol.contain:
            raise ConditionViolation("mul_inclusion", "clos mul T is not contained in M", resid)
    else:
        resid = sp.containment_residual(dom_a, sp.complement(m))
        if resid > tol.contain:
            raise ConditionViolation("closure", "M^perp is not contained in dom T*", resid)
    meet = sp.intersect(m, dom_a, tol)
    resid = sp.containment_residual(ker_a, meet)
    if resid > tol.contain:
        raise ConditionViolation("kernel", "M cap dom T* is not contained in ker T*", resid)
    return dom_a, meet


def lebesgue_type(t: LinearRelation, m: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> LebesgueSplit:
    """Lebesgue type split ``T = (I - P_M) T + P_M T`` generated by an admissible ``M``."""
    _, meet = check_lebesgue_type(t, m, tol)
    split = orthogonal_range_split(t, m, tol)
    _ensure(split.t1_is_regular, "(I - P_M) T is not regular")
    _ensure(split.t2_is_singular, "P_M T is not singular")
    expected_mul = sp.intersect(m, sp.complement(meet), tol)
    expected = rl.product_space(rl.dom(rl.closure(t), tol), expected_mul)
    _ensure(rl.equal(rl.closure(split.t2), expected, tol), "closure of P_M T has the wrong product form")
    return split


def weak_lebesgue_type(t: LinearRelation, m: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> LebesgueSplit:
    """Weak Lebesgue type split generated by ``M`` containing ``clos mul T``.

    ``t1`` is only required to be an operator; in finite dimension it is
    automatically regular.
    """
    check_lebesgue_type(t, m, tol, weak=True)
    split = orthogonal_range_split(t, m, tol)
    _ensure(split.t1_is_operator, "(I - P_M) T is not an operator")
    _ensure(split.t2_is_singular, "P_M T is not singular")
    canon = sp.sum(rl.mul(t, tol), split.l_part, tol)
    expected = rl.product_space(rl.dom(rl.closure(t), tol), canon)
    _ensure(rl.equal(rl.closure(split.t2), expected, tol), "closure of T2 is not dom T** x (clos mul T + L)")
    return split


def canonical_subspace(split: LebesgueSplit, tol: ToleranceConfig = DEFAULT_TOL):
    """Return ``(clos ran T2, L)`` with ``clos ran T2 = mul T** (+) L``.

    In finite dimension ``L`` is always ``{0}``; this is asserted.
    """
    if not split.t2_is_singular:
        raise NotSingular("the split's second component is not singular")
    t = split.source
    m = rl.ran(split.t2, tol)
    mul_cl = rl.mul(rl.closure(t), tol)
    l_part = sp.intersect(m, sp.complement(mul_cl), tol)
    _ensure(l_part.is_zero(), f"nontrivial L of dimension {l_part.dim} in finite dimension")
    expected = rl.product_space(rl.dom(rl.closure(t), tol), sp.sum(mul_cl, l_part, tol))
    _ensure(rl.equal(rl.closure(split.t2), expected, tol), "closure of T2 is not dom T** x (mul T** + L)")
    return m, l_part


def _check_orthogonal(u, name, tol):
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NotOrthogonal(f"{name} is not square")
    err = np.abs(u.T @ u - np.eye(u.shape[0])).max()
    if err > max(tol.orth, 1e3 * u.shape[0] * np.finfo(float).eps):
        raise NotOrthogonal(f"{name} is not orthogonal (deviation {err:.3e})")
    return u


def unitary_transform(t: LinearRelation, u, v, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
    """``U T V = {(V^T f, U g) : (f, g) in T}`` for orthogonal ``U`` on K and ``V`` on H."""
    u = _check_orthogonal(u, "U", tol)
    v = _check_orthogonal(v, "V", tol)
    if u.shape[0] != t.dim_k or v.shape[0] != t.dim_h:
        raise DimensionError("U must act on K and V on H")
    return rl.transform(t, h_map=v.T, k_map=u, tol=tol)


def range_split_equivalences(split: LebesgueSplit, tol: ToleranceConfig = DEFAULT_TOL) -> dict:
    """Evaluate ``ran T1 in ran T``, ``ran T2 in ran T`` and ``ran T = ran T1 (+) ran T2``.

    The three statements are equivalent for any orthogonal range split, so a
    disagreement raises :class:`ConsistencyError`.
    """
    r = rl.ran(split.source, tol)
    r1, r2 = rl.ran(split.t1, tol), rl.ran(split.t2, tol)
    res = {
        "ran_t1_in_ran_t": sp.containment_residual(r, r1),
        "ran_t2_in_ran_t": sp.containment_residual(r, r2),
        "ran_t_is_direct_sum": sp.gap(r, sp.sum(r1, r2, tol)),
    }
    flags = {
        "ran_t1_in_ran_t": res["ran_t1_in_ran_t"] <= tol.contain,
        "ran_t2_in_ran_t": res["ran_t2_in_ran_t"] <= tol.contain,
        "ran_t_is_direct_sum": res["ran_t_is_direct_sum"] <= tol.eq,
    }
    if len(set(flags.values())) != 1:
        raise ConsistencyError(f"range characterizations disagree: {res}")
    return {"flags": flags, "residuals": res, "holds": flags["ran_t1_in_ran_t"]}
