"""Range-space relations ``{(A h, B h)}`` and the induced split ``B = B1 + B2``.

For PSD pairs the split specializes to ``b = b_ac + b_s`` and is checked
against the monotone limit of parallel sums ``(n a) : b``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import decompose as dc
from . import relation as rl
from . import subspace as sp
from .exceptions import ConsistencyError, DimensionError, NoConvergence, NotPSD
from .relation import LinearRelation
from .subspace import DEFAULT_TOL, Subspace, ToleranceConfig


@dataclass(frozen=True, eq=False)
class OperatorPair:
    a: np.ndarray
    b: np.ndarray
    relation: LinearRelation


@dataclass(frozen=True, eq=False)
class PairSplit:
    b1: np.ndarray
    b2: np.ndarray
    p: Subspace


def _as_matrix(x, name):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.ndim != 2:
        raise DimensionError(f"{name} must be a matrix")
    return x


def pair_relation(a, b, tol: ToleranceConfig = DEFAULT_TOL, scale=None) -> OperatorPair:
    """Relation ``{(a h, b h)}``.

    ``scale`` sets the rank reference; pass the norm of the original pair
    when ``a`` or ``b`` are derived matrices that may be pure round-off.
    """
    a, b = _as_matrix(a, "a"), _as_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"a has {a.shape[1]} columns but b has {b.shape[1]}")
    rel = rl.from_graph_span(list(np.vstack([a, b]).T), a.shape[0], b.shape[0], tol, scale=scale)
    return OperatorPair(a, b, rel)


def _image_of_kernel(a, b, tol):
    ker_a = sp.kernel(a, tol)
    if ker_a.dim == 0:
        return Subspace.zero(b.shape[0])
    return sp.span(b @ ker_a.frame, tol, ambient_dim=b.shape[0])


def pair_lebesgue(pair: OperatorPair, tol: ToleranceConfig = DEFAULT_TOL, check: bool = True) -> PairSplit:
    """``p = span(b ker a)``, ``b2 = P_p b`` and ``b1 = b - b2``.

    With ``check`` the split is compared against the relation-level Lebesgue
    decomposition of ``pair.relation``.
    """
    p = _image_of_kernel(pair.a, pair.b, tol)
    b2 = sp.projector(p) @ pair.b
    b1 = pair.b - b2
    split = PairSplit(b1, b2, p)
    if check:
        leb = dc.lebesgue(pair.relation, tol)
        t1 = pair_relation(pair.a, b1, tol, scale=pair_scale(pair)).relation
        gap1 = rl.graph_gap(leb.t1, t1)
        gap2 = sp.gap(rl.ran(leb.t2, tol), p)
        if gap1 > tol.eq or gap2 > tol.eq:
            raise ConsistencyError(f"pair split disagrees with the relation split ({gap1:.3e}, {gap2:.3e})")
    return split


def pair_scale(pair: OperatorPair) -> float:
    """Spectral norm of ``[a; b]``, the rank reference for derived pairs."""
    c = np.vstack([pair.a, pair.b])
    return float(np.linalg.norm(c, 2)) if c.size else 0.0


def _check_psd(a, tol, name="matrix"):
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got {a.shape}")
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    if np.abs(a - a.T).max() > tol.contain * scale:
        raise NotPSD(f"{name} is not symmetric")
    a = 0.5 * (a + a.T)
    low = float(np.linalg.eigvalsh(a).min())
    if low < -tol.contain * scale:
        raise NotPSD(f"{name} has a negative eigenvalue {low:.3e}")
    return a


def matrix_sqrt(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    a = _check_psd(a, tol)
    w, v = np.linalg.eigh(a)
    # eigenvalues at round-off level would become visible after the square root
    floor = 64 * a.shape[0] * np.finfo(float).eps * max(float(np.abs(w).max()), 0.0)
    w = np.where(w > floor, w, 0.0)
    root = (v * np.sqrt(w)) @ v.T
    return 0.5 * (root + root.T)


def _psd_factor(a):
    """``R`` with ``a = R R^T`` and full column rank."""
    w, v = np.linalg.eigh(a)
    top = float(w.max()) if w.size else 0.0
    keep = w > 1e-14 * max(top, 0.0)
    return v[:, keep] * np.sqrt(w[keep])


def parallel_sum(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``a (a + b)^+ b``, symmetrized.

    Evaluated through factors ``a = Ra Ra^T``, ``b = Rb Rb^T``: with ``Pi``
    the projector onto the row space of ``[Ra, Rb]`` the sum equals
    ``Ra Pi_12 Rb^T``.  This avoids inverting ``a + b`` directly.
    """
    a, b = _check_psd(a, tol, "a"), _check_psd(b, tol, "b")
    if a.shape != b.shape:
        raise DimensionError("parallel sum needs matrices of the same size")
    ra, rb = _psd_factor(a), _psd_factor(b)
    if ra.shape[1] == 0 or rb.shape[1] == 0:
        return np.zeros_like(a)
    c = np.hstack([ra, rb])
    _, s, vt = np.linalg.svd(c, full_matrices=False)
    r = int(np.count_nonzero(s > 1e-13 * s[0]))
    v = vt[:r].T
    pi12 = v[: ra.shape[1]] @ v[ra.shape[1]:].T
    out = ra @ pi12 @ rb.T
    return 0.5 * (out + out.T)


def psd_pair_decomposition(a, b, tol: ToleranceConfig = DEFAULT_TOL):
    """Split ``b = b_ac + b_s`` using the pair ``(sqrt a, sqrt b)``.

    Returns ``(b_ac, b_s)`` with ``b_s = sqrt(b) P sqrt(b)`` and ``P`` the
    projector onto ``sqrt(b) ker sqrt(a)``.  This is the Lebesgue split of the
    range-space relation built from ``(sqrt a, sqrt b)``.
    """
    a, b = _check_psd(a, tol, "a"), _check_psd(b, tol, "b")
    if a.shape != b.shape:
        raise DimensionError("a and b must have the same size")
    rb = matrix_sqrt(b, tol)
    # ker sqrt(a) = ker a; taking it from a avoids square-rooted round-off
    p = _image_of_kernel(a, rb, tol)
    b_s = rb @ sp.projector(p) @ rb
    b_s = 0.5 * (b_s + b_s.T)
    b_ac = b - b_s
    return b_ac, b_s


def ando_ac_oracle(a, b, tol_conv: float = 1e-8, n_max: float = 2.0 ** 50, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Limit of ``(n a) : b`` along ``n = 1, 2, 4, ...``.

    The iterates are nondecreasing and bounded by ``b``; both facts are
    asserted on every step.

    Raises
    ------
    NoConvergence
        If successive iterates still differ by ``tol_conv`` once ``n``
        exceeds ``n_max``.
    """
    a, b = _check_psd(a, tol, "a"), _check_psd(b, tol, "b")
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0, float(np.abs(b).max()) if b.size else 1.0)
    n = 1.0
    prev = parallel_sum(n * a, b, tol)
    gap = np.inf
    while n < n_max:
        n *= 2.0
        cur = parallel_sum(n * a, b, tol)
        # round-off in (n a + b)^+ grows roughly like n * eps
        slack = (1e-9 + 1e3 * n * np.finfo(float).eps) * scale
        if np.linalg.eigvalsh(cur - prev).min() < -slack:
            raise ConsistencyError("parallel sums are not monotone in n")
        if np.linalg.eigvalsh(b - cur).min() < -slack:
            raise ConsistencyError("parallel sum exceeds b")
        gap = float(np.linalg.norm(cur - prev, 2))
        prev = cur
        if gap < tol_conv:
            return cur
    raise NoConvergence(f"no convergence up to n={n:.3g} (last gap {gap:.3e})", prev, gap)
