"""Closability criteria: monotone truncation sequences and the metric formula.

Truncations ``T_n`` are spectral cut-offs of the square root of the operator
part of ``T*T`` on ``clos dom T``: ``|T_n f|`` increases in ``n`` towards
``|T f|``.

The metric route evaluates, for ``(f, f')`` in ``T``,

    sup_{h in dom T} [ inf_{(g, g') in T} (|g'|^2 + |h - g|^2) - |f - h|^2 ]

which equals ``|(I - P) f'|^2`` with ``P`` onto ``mul T**``.  It never forms
``P``; it only uses least squares over graph coordinates, so it is an
independent check on :func:`projection_defect`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import relation as rl
from . import subspace as sp
from .exceptions import MonotonicityViolation, NonConcaveAscent, NotInGraph, NotRegular, ConsistencyError
from .relation import LinearRelation
from .subspace import DEFAULT_TOL, ToleranceConfig


@dataclass(frozen=True, eq=False)
class TruncationSequence:
    levels: tuple
    operators: tuple
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt_operator: np.ndarray = field(repr=False)
    kept: tuple = field(default=(), repr=False)

    def norms(self, f) -> np.ndarray:
        """``|T_n f|`` for every level."""
        f = np.asarray(f, dtype=float)
        return np.array([np.linalg.norm(op @ f) for op in self.operators])

    def spectral_norms(self, f) -> np.ndarray:
        """``|T_n f|`` in eigen-coordinates of the construction.

        Each level zeroes a superset of the coordinates zeroed by the next,
        and the squares are summed in one fixed order, so the values are
        nondecreasing in floating point as well.
        """
        coords = self.eigenvalues * (self.eigenvectors.T @ np.asarray(f, dtype=float))
        sq = coords * coords
        return np.array([np.sqrt(np.sum(np.where(k, sq, 0.0))) for k in self.kept])


def gram_operator_part(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL):
    """Matrix of the orthogonal operator part of ``T*T`` and the frame of ``clos dom T``.

    The operator part is ``(I - P) T*T`` with ``P`` onto ``mul T*T = mul T*``.
    """
    g = rl.gram(rl.closure(t), tol)
    g_op = rl.apply_left_projection(g, sp.complement(rl.mul(g, tol)), tol)
    return rl.operator_matrix(g_op, tol), rl.dom(rl.closure(t), tol).frame


def truncation_sequence(t: LinearRelation, levels, tol: ToleranceConfig = DEFAULT_TOL, rng=None) -> TruncationSequence:
    """Spectral truncations ``T_n = sum_{s_i <= level_n} s_i E_i`` of ``(T*T)_s^(1/2)``.

    Raises
    ------
    NotRegular
        If ``T`` has a nontrivial multivalued part.
    """
    if not rl.is_regular(t, tol):
        raise NotRegular("truncation sequences exist only for regular relations")
    levels = tuple(float(x) for x in levels)
    if not levels or any(x <= 0 for x in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing and positive")
    n = t.dim_h
    m = rl.operator_matrix(t, tol)
    x = rl.dom(t, tol).frame
    if x.shape[1] == 0:
        zero = np.zeros((n, n))
        return TruncationSequence(levels, tuple(zero for _ in levels), np.zeros(0), x, zero, tuple(np.zeros(0, bool) for _ in levels))
    # right singular vectors of T on dom T diagonalize (T*T)_s; an SVD keeps
    # small singular values that the squared Gram spectrum would lose
    _, s, wt = np.linalg.svd(m @ x, full_matrices=True)
    s = np.concatenate([s, np.zeros(x.shape[1] - s.size)])
    s = np.where(s >= tol.rank_rtol * max(1.0, float(s.max())), s, 0.0)
    vecs = x @ wt.T
    a, _ = gram_operator_part(t, tol)
    dev = float(np.abs(a - (vecs * s**2) @ vecs.T).max())
    if dev > tol.eq * max(1.0, float(s.max()) ** 2):
        raise ConsistencyError(f"spectral data disagree with the operator part of T*T ({dev:.3e})")
    cut = tol.rank_rtol * max(1.0, float(s.max()))
    ops, kept = [], []
    for level in levels:
        keep = s <= level + cut
        kept.append(keep)
        ops.append((vecs[:, keep] * s[keep]) @ vecs[:, keep].T)
    root = (vecs * s) @ vecs.T
    seq = TruncationSequence(levels, tuple(ops), s, vecs, root, tuple(kept))
    _check_sequence(t, seq, tol, rng)
    return seq


def _check_sequence(t, seq, tol, rng):
    mono = monotonicity_violation(seq, seq.eigenvectors.T)
    if mono > tol.contain:
        raise ConsistencyError(f"truncations are not monotone ({mono:.3e})")
    m = rl.operator_matrix(t, tol)
    rng = np.random.default_rng(0) if rng is None else rng
    x = rl.dom(t, tol).frame
    for _ in range(4):
        f = x @ rng.standard_normal(x.shape[1])
        norms = seq.norms(f)
        target = np.linalg.norm(m @ f)
        if norms.max() > target * (1 + tol.contain) + tol.contain:
            raise ConsistencyError("a truncation exceeds |T f|")
        if seq.levels[-1] >= seq.eigenvalues.max() and abs(norms[-1] - target) > 1e-10 * max(1.0, target):
            raise ConsistencyError("terminal truncation does not reproduce |T f|")


def monotonicity_violation(seq: TruncationSequence, vectors, spectral: bool = False) -> float:
    """Largest ``|T_m f| - |T_n f|`` over ``m <= n`` and the given vectors (rows).

    ``spectral`` evaluates the norms through :meth:`TruncationSequence.spectral_norms`.
    """
    worst = 0.0
    for f in np.atleast_2d(vectors):
        norms = seq.spectral_norms(f) if spectral else seq.norms(f)
        running = np.maximum.accumulate(norms)
        worst = max(worst, float((running - norms).max()))
    return worst


def closability_from_sequence(t: LinearRelation, seq: TruncationSequence, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff ``sup_n |T_n f| = |T f|`` on a frame of ``dom T``.

    Raises
    ------
    MonotonicityViolation
        If ``|T_m f| <= |T_n f|`` (m <= n) fails on the eigenbasis or the
        domain frame.
    """
    x = rl.dom(t, tol).frame
    probes = np.hstack([seq.eigenvectors, x]).T if seq.eigenvectors.size else x.T
    if probes.size:
        worst = monotonicity_violation(seq, probes)
        if worst > tol.contain:
            raise MonotonicityViolation(f"truncation norms decrease by {worst:.3e}")
    if not rl.is_operator(t, tol):
        return False
    m = rl.operator_matrix(t, tol)
    for f in probes:
        target = np.linalg.norm(m @ f)
        if abs(seq.norms(f).max() - target) > tol.contain * max(1.0, target):
            return False
    return True


def _check_in_graph(t, f, fp, tol):
    f = np.asarray(f, dtype=float).ravel()
    fp = np.asarray(fp, dtype=float).ravel()
    if f.size != t.dim_h or fp.size != t.dim_k:
        raise NotInGraph("pair has the wrong dimensions")
    v = np.concatenate([f, fp])
    if sp.containment_residual(t.graph, v) > tol.contain:
        raise NotInGraph("pair is not in the graph of T")
    return f, fp


def projection_defect(t: LinearRelation, f, fp, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``|P f'|^2`` with ``P`` the projector onto ``mul T**``."""
    _, fp = _check_in_graph(t, f, fp, tol)
    return float(np.linalg.norm(sp.project(rl.mul(rl.closure(t), tol), fp)) ** 2)


def inner_infimum_form(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Matrix ``Q`` with ``inf_{(g, g') in T} |g'|^2 + |h - g|^2 = h^T Q h``.

    The infimum is a least-squares problem in graph coordinates ``c``:
    minimize ``|[G; F] c - [0; h]|``.  Its residual map is linear in ``h``.
    """
    f, g = t.h_block, t.k_block
    n = t.dim_h
    stacked = np.vstack([g, f])
    rhs = np.vstack([np.zeros((t.dim_k, n)), np.eye(n)])
    if stacked.shape[1] == 0:
        return np.eye(n)
    coeff, *_ = np.linalg.lstsq(stacked, rhs, rcond=None)
    resid = stacked @ coeff - rhs
    return resid.T @ resid


def metric_defect(t: LinearRelation, f, fp, tol: ToleranceConfig = DEFAULT_TOL, rng=None, samples=64) -> float:
    """Evaluate the sup-inf expression for ``(f, f')`` in ``T``; equals ``|(I - P) f'|^2``.

    The outer objective over ``h = X y`` (``X`` a frame of ``clos dom T``) is
    the quadratic ``q(y) = y^T (X^T Q X - I) y + 2 (X^T f)^T y - |f|^2``.
    It is maximized through its stationarity system; the Hessian is checked
    to be negative semidefinite and a random sampling pass confirms that no
    probe beats the stationary value.

    Raises
    ------
    NonConcaveAscent
        If the stationarity system is inconsistent or the Hessian has a
        positive direction.  ``best_bound`` holds the best sampled value.
    """
    f, _ = _check_in_graph(t, f, fp, tol)
    x = rl.dom(rl.closure(t), tol).frame
    if x.shape[1] == 0:
        return 0.0
    q = inner_infimum_form(t, tol)
    hess = x.T @ q @ x - np.eye(x.shape[1])
    hess = 0.5 * (hess + hess.T)
    lin = x.T @ f
    const = -float(f @ f)

    def objective(y):
        return float(y @ hess @ y + 2 * lin @ y + const)

    rng = np.random.default_rng(12345) if rng is None else rng
    scale = max(1.0, float(np.linalg.norm(f)))
    probes = [scale * 4 * rng.standard_normal(x.shape[1]) for _ in range(samples)]
    best = max(objective(y) for y in probes)

    top = float(np.linalg.eigvalsh(hess).max())
    if top > tol.metric:
        raise NonConcaveAscent(f"objective has a direction of positive curvature ({top:.3e})", best)
    y, *_ = np.linalg.lstsq(-hess, lin, rcond=tol.rank_rtol)
    stat = np.linalg.norm(-hess @ y - lin)
    if stat > tol.metric * max(1.0, float(np.linalg.norm(lin))):
        y = _ascent(objective, hess, lin, y)
        stat = np.linalg.norm(-hess @ y - lin)
        if stat > tol.metric * max(1.0, float(np.linalg.norm(lin))):
            raise NonConcaveAscent(f"stationarity system is inconsistent ({stat:.3e})", best)
    value = objective(y)
    if best > value + tol.metric * max(1.0, abs(value)):
        raise NonConcaveAscent("a sampled point exceeds the stationary value", best)
    return value


def _ascent(objective, hess, lin, y0, steps=2000):
    """Gradient ascent with a fixed step on the concave quadratic."""
    lam = float(np.abs(np.linalg.eigvalsh(hess)).max())
    step = 1.0 / (2 * lam) if lam > 0 else 1.0
    y = np.array(y0, dtype=float)
    for _ in range(steps):
        y = y + step * 2 * (hess @ y + lin)
    return y


def is_regular_metric(t: LinearRelation, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Regularity via ``|f'|^2 = metric value`` on every graph frame generator."""
    for col in t.graph.frame.T:
        f, fp = col[: t.dim_h], col[t.dim_h:]
        value = metric_defect(t, f, fp, tol)
        target = float(fp @ fp)
        if abs(value - target) > tol.metric * (1.0 + target):
            return False
    return True
