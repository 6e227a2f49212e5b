"""Domination of relations: ``S1 < S2`` when ``C S2 subset S1`` for a bounded ``C``.

Two witnesses are produced.  For arbitrary relation pairs the feasibility
system for ``C`` is solved in the minimum-Frobenius-norm sense; for pairs of
operators the canonical witness (``S2 f -> S1 f`` on ``ran S2``, zero on its
complement) is also built and its spectral norm is the minimal constant.
The Frobenius witness's spectral norm is only an upper bound for the best
constant over all witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import relation as rl
from . import subspace as sp
from .exceptions import DimensionError, NotAnOperator, NotDominated, StaleWitness
from .relation import LinearRelation
from .subspace import DEFAULT_TOL, ToleranceConfig


@dataclass(frozen=True, eq=False)
class DominationWitness:
    c: np.ndarray
    frobenius_norm: float
    spectral_norm: float
    c_min: Optional[float]
    residual: float
    canonical: Optional[np.ndarray] = None

    def is_contractive(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        norm = self.spectral_norm
        if self.canonical is not None:
            norm = float(np.linalg.norm(self.canonical, 2))
        return norm <= 1.0 + tol.contain


def witness_residual(s1: LinearRelation, s2: LinearRelation, c) -> float:
    """Largest distance from ``(f, C g)`` to ``graph(S1)`` over the graph frame of ``S2``."""
    c = np.asarray(c, dtype=float)
    if s2.graph.dim == 0:
        return 0.0
    cols = np.vstack([s2.h_block, c @ s2.k_block])
    resid = cols - s1.graph.frame @ (s1.graph.frame.T @ cols)
    return float(np.linalg.norm(resid, axis=0).max())


def _accept_threshold(c, tol):
    return tol.contain * max(1.0, float(np.linalg.norm(c, 2)) if c.size else 1.0)


def _check_pair(s1, s2):
    if s1.dim_h != s2.dim_h:
        raise DimensionError(f"relations start in different spaces: R^{s1.dim_h} vs R^{s2.dim_h}")


def _make_witness(c, s1, s2, tol, canonical=None, c_min=None):
    c = np.asarray(c, dtype=float)
    return DominationWitness(
        c=c,
        frobenius_norm=float(np.linalg.norm(c)),
        spectral_norm=float(np.linalg.norm(c, 2)) if c.size else 0.0,
        c_min=c_min,
        residual=witness_residual(s1, s2, c),
        canonical=canonical,
    )


def min_frobenius_witness(s1: LinearRelation, s2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL):
    """Least-squares solution of ``(I - P_S1) [f; C g] = 0`` over the frame of ``S2``.

    Returns ``(C, residual)``; ``C`` has minimum Frobenius norm among the
    least-squares solutions.
    """
    _check_pair(s1, s2)
    h, k1, k2 = s1.dim_h, s1.dim_k, s2.dim_k
    comp = np.eye(h + k1) - sp.projector(s1.graph)
    comp_h, comp_k = comp[:, :h], comp[:, h:]
    f, g = s2.h_block, s2.k_block
    # vec(comp_k C g) = kron(g^T, comp_k) vec(C), column-major vec
    a = np.kron(g.T, comp_k)
    b = -(comp_h @ f).reshape(-1, order="F")
    if a.size == 0:
        c = np.zeros((k1, k2))
    else:
        x, *_ = np.linalg.lstsq(a, b, rcond=tol.rank_rtol)
        c = x.reshape((k1, k2), order="F")
    return c, witness_residual(s1, s2, c)


def _domain_coords(s2, tol):
    return rl.dom(s2, tol).frame


def _kernel_precondition(s1, s2, tol):
    """Residuals of ``dom S2 in dom S1`` and ``ker S2 in ker S1``."""
    dom_res = sp.containment_residual(rl.dom(s1, tol), rl.dom(s2, tol))
    ker_res = sp.containment_residual(rl.ker(s1, tol), rl.ker(s2, tol))
    return dom_res, ker_res


def canonical_witness(s1: LinearRelation, s2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``C0`` with ``C0 S2 f = S1 f`` on ``ran S2`` and ``C0 = 0`` on ``(ran S2)^perp``.

    Both relations must be operators.  The kernel inclusion is checked
    explicitly because the pseudo-inverse would silently zero-fill it.
    """
    _check_pair(s1, s2)
    m1, m2 = rl.operator_matrix(s1, tol), rl.operator_matrix(s2, tol)
    dom_res, ker_res = _kernel_precondition(s1, s2, tol)
    if dom_res > tol.contain:
        raise NotDominated(f"dom S2 is not contained in dom S1 (residual {dom_res:.3e})", dom_res)
    if ker_res > tol.contain:
        raise NotDominated(f"ker S2 is not contained in ker S1 (residual {ker_res:.3e})", ker_res)
    x = _domain_coords(s2, tol)
    if x.shape[1] == 0:
        return np.zeros((s1.dim_k, s2.dim_k))
    a, b = m1 @ x, m2 @ x
    return a @ np.linalg.pinv(b, rcond=tol.rank_rtol)


def min_constant(s1: LinearRelation, s2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Smallest ``c`` with ``|S1 f| <= c |S2 f|`` on ``dom S2``.

    For two operators this is the largest generalized singular value of the
    pair of matrices restricted to ``dom S2``.  When only ``S1`` is an
    operator every witness is fixed on ``ran S2``, so the minimal norm is
    that of the least-squares witness, which vanishes on ``(ran S2)^perp``.
    """
    _check_pair(s1, s2)
    if not rl.is_operator(s1, tol):
        raise NotAnOperator("minimal constant needs S1 to be an operator")
    if not rl.is_operator(s2, tol):
        c, resid = min_frobenius_witness(s1, s2, tol)
        if resid > _accept_threshold(c, tol):
            raise NotDominated(f"no bounded C maps S2 into S1 (residual {resid:.3e})", resid)
        return float(np.linalg.norm(c, 2)) if c.size else 0.0
    m1, m2 = rl.operator_matrix(s1, tol), rl.operator_matrix(s2, tol)
    dom_res, ker_res = _kernel_precondition(s1, s2, tol)
    if dom_res > tol.contain or ker_res > tol.contain:
        raise NotDominated("domain or kernel inclusion fails", max(dom_res, ker_res))
    x = _domain_coords(s2, tol)
    if x.shape[1] == 0:
        return 0.0
    a, b = m1 @ x, m2 @ x
    # sup |a y| / |b y| over y orthogonal to ker b (ker b is inside ker a)
    _, sb, vbt = np.linalg.svd(b, full_matrices=False)
    r = int(np.count_nonzero(sb >= tol.rank_rtol * max(sb[0], 1.0))) if sb.size else 0
    if r == 0:
        return 0.0
    v = vbt[:r].T
    ratio = (a @ v) / sb[:r]
    return float(np.linalg.norm(ratio, 2))


def dominates(s1: LinearRelation, s2: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> DominationWitness:
    """Find ``C`` with ``C S2 subset S1``.

    Raises
    ------
    NotDominated
        When the feasibility residual exceeds tolerance.
    """
    c, resid = min_frobenius_witness(s1, s2, tol)
    if resid > _accept_threshold(c, tol):
        raise NotDominated(f"no bounded C maps S2 into S1 (residual {resid:.3e})", resid)
    canonical = c_min = None
    if rl.is_operator(s1, tol):
        if rl.is_operator(s2, tol):
            canonical = canonical_witness(s1, s2, tol)
        else:
            # the witness is unique on ran S2 and the least-squares one is zero elsewhere
            canonical = c
        c_min = float(np.linalg.norm(canonical, 2)) if canonical.size else 0.0
    return _make_witness(c, s1, s2, tol, canonical=canonical, c_min=c_min)


def verify_witness(s1: LinearRelation, s2: LinearRelation, c, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Residual of ``C S2 subset S1``; raises :class:`StaleWitness` if it is too large."""
    c = np.asarray(c, dtype=float)
    if c.shape != (s1.dim_k, s2.dim_k):
        raise DimensionError(f"witness has shape {c.shape}, expected {(s1.dim_k, s2.dim_k)}")
    resid = witness_residual(s1, s2, c)
    if resid > _accept_threshold(c, tol):
        raise StaleWitness(f"witness does not certify domination (residual {resid:.3e})", resid)
    return resid


def compose(outer: DominationWitness, inner: DominationWitness) -> np.ndarray:
    """``C1 C2`` certifies ``S3 -> S1`` when ``C1 S2 in S1`` and ``C2 S3 in S2``."""
    return outer.c @ inner.c


def _transport(s, t, witness, part, tol):
    c = witness.c if isinstance(witness, DominationWitness) else np.asarray(witness, dtype=float)
    verify_witness(s, t, c, tol)
    r = rl.mul(rl.closure(s), tol) if part == "reg" else rl.mul(s, tol)
    p = rl.mul(rl.closure(t), tol) if part == "reg" else rl.mul(t, tol)
    c_new = (np.eye(s.dim_k) - sp.projector(r)) @ c
    s_part = rl.apply_left_projection(s, sp.complement(r), tol)
    t_part = rl.apply_left_projection(t, sp.complement(p), tol)
    verify_witness(s_part, t_part, c_new, tol)
    c_min = None
    try:
        c_min = min_constant(s_part, t_part, tol)
    except (NotDominated, NotAnOperator):
        pass
    return _make_witness(c_new, s_part, t_part, tol, c_min=c_min)


def transport_to_regular_parts(s: LinearRelation, t: LinearRelation, witness, tol: ToleranceConfig = DEFAULT_TOL) -> DominationWitness:
    """From ``C T subset S`` build ``(I - R) C`` certifying ``S_reg < T_reg``.

    ``R`` projects onto ``mul S**``.  The spectral norm cannot grow.
    """
    return _transport(s, t, witness, "reg", tol)


def transport_to_operator_parts(s: LinearRelation, t: LinearRelation, witness, tol: ToleranceConfig = DEFAULT_TOL) -> DominationWitness:
    """As :func:`transport_to_regular_parts` with ``R`` onto ``clos mul S``."""
    return _transport(s, t, witness, "op", tol)
