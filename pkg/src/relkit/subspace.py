"""Subspace arithmetic on orthonormal frames.

A :class:`Subspace` of R^n is stored as an ``n x k`` matrix with orthonormal
columns.  Every rank decision in the package goes through :func:`span` and
:func:`kernel`, so a single :class:`ToleranceConfig` governs all booleans
downstream (is this an operator? is this contained in that?).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "Subspace",
    "span",
    "kernel",
    "complement",
    "intersect",
    "sum",
    "projector",
    "project",
    "contains",
    "gap",
    "equal",
    "direct_sum_coords",
]

_sum = sum


@dataclass(frozen=True)
class ToleranceConfig:
    """Thresholds for every numerical decision.

    Parameters
    ----------
    rank_rtol
        Singular values below ``rank_rtol * sigma_max`` are treated as zero.
    orth
        Allowed deviation of ``F^T F`` from the identity for a frame ``F``.
    eq
        Two subspaces are equal when their projector gap is at most this.
    contain
        Slack for containment of vectors, relative to ``max(1, |x|)``.
    metric
        Tolerance for quantities obtained from nested optimization.
    """

    rank_rtol: float = 1e-10
    orth: float = 1e-10
    eq: float = 1e-8
    contain: float = 1e-8
    metric: float = 1e-6

    def __post_init__(self):
        for name in ("rank_rtol", "orth", "eq", "contain", "metric"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"tolerance {name}={value!r} must lie in (0, 1)")

    def replace(self, **changes) -> "ToleranceConfig":
        fields = dict(
            rank_rtol=self.rank_rtol,
            orth=self.orth,
            eq=self.eq,
            contain=self.contain,
            metric=self.metric,
        )
        fields.update(changes)
        return ToleranceConfig(**fields)


DEFAULT_TOL = ToleranceConfig()


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


class Subspace:
    """Immutable subspace of R^n given by an orthonormal frame.

    Use :func:`span` to build one from arbitrary vectors; the constructor
    trusts that ``frame`` is orthonormal up to ``tol.orth`` and checks it.
    """

    __slots__ = ("_frame", "_ambient")

    def __init__(self, frame, ambient_dim=None, tol: ToleranceConfig = DEFAULT_TOL, check=True):
        frame = np.asarray(frame, dtype=float)
        if frame.ndim == 1:
            frame = frame.reshape(-1, 1)
        if ambient_dim is None:
            ambient_dim = frame.shape[0]
        if frame.size == 0:
            frame = np.zeros((ambient_dim, 0))
        if frame.ndim != 2 or frame.shape[0] != ambient_dim:
            raise DimensionError(f"frame of shape {frame.shape} does not live in R^{ambient_dim}")
        if ambient_dim < 1:
            raise DimensionError("ambient dimension must be positive")
        k = frame.shape[1]
        if k > ambient_dim:
            raise DimensionError("more frame columns than ambient dimensions")
        if check and k:
            err = np.abs(frame.T @ frame - np.eye(k)).max()
            if err > max(tol.orth, 64 * k * np.finfo(float).eps):
                raise ValueError(f"frame is not orthonormal (max deviation {err:.3e})")
        self._frame = _frozen(frame)
        self._ambient = int(ambient_dim)

    @property
    def frame(self) -> np.ndarray:
        return self._frame

    @property
    def ambient_dim(self) -> int:
        return self._ambient

    @property
    def dim(self) -> int:
        return self._frame.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)), n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n), n)

    @classmethod
    def coordinate(cls, n: int, indices) -> "Subspace":
        """Span of the standard basis vectors with the given indices."""
        return cls(np.eye(n)[:, list(indices)], n)

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self._ambient

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _check_same(s1: Subspace, s2: Subspace):
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {s1.ambient_dim} vs {s2.ambient_dim}"
        )


def _svd_rank(s, tol: ToleranceConfig, scale):
    if s.size == 0:
        return 0
    ref = s[0] if scale is None else max(s[0], scale)
    if ref == 0.0:
        return 0
    return int(np.count_nonzero(s >= tol.rank_rtol * ref))


def span(vectors, tol: ToleranceConfig = DEFAULT_TOL, ambient_dim=None, scale=None) -> Subspace:
    """Orthonormal frame for the span of ``vectors``.

    Parameters
    ----------
    vectors
        Either a list of 1-d vectors or a 2-d array whose *columns* are the
        vectors.
    ambient_dim
        Needed only when ``vectors`` is empty.
    scale
        Reference magnitude for the rank cutoff.  By default the cutoff is
        ``rank_rtol * sigma_max``; internal callers working with
        orthonormal-frame data pass ``scale=1`` so that pure round-off is not
        promoted to a direction.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        a = np.asarray(vectors, dtype=float)
    else:
        vectors = [np.asarray(v, dtype=float).ravel() for v in vectors]
        if not vectors:
            if ambient_dim is None:
                raise DimensionError("ambient_dim is required for an empty span")
            return Subspace.zero(ambient_dim)
        sizes = {v.size for v in vectors}
        if len(sizes) != 1:
            raise DimensionError(f"vectors have mismatched dimensions {sorted(sizes)}")
        a = np.column_stack(vectors)
    n = a.shape[0]
    if ambient_dim is not None and ambient_dim != n:
        raise DimensionError(f"vectors live in R^{n}, expected R^{ambient_dim}")
    if a.shape[1] == 0 or n == 0:
        return Subspace.zero(n)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = _svd_rank(s, tol, scale)
    return Subspace(u[:, :r], n, tol=tol, check=False)


def kernel(matrix, tol: ToleranceConfig = DEFAULT_TOL, scale=None) -> Subspace:
    """Numerical null space of ``matrix`` as a subspace of its column space."""
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    m, n = a.shape
    if n == 0:
        raise DimensionError("matrix has no columns")
    if m == 0:
        return Subspace.full(n)
    # right singular vectors are complete without full U when m >= n
    _, s, vt = np.linalg.svd(a, full_matrices=m < n)
    r = _svd_rank(s, tol, scale)
    return Subspace(vt[r:].T, n, tol=tol, check=False)


def complement(s: Subspace) -> Subspace:
    """Orthogonal complement within the ambient space."""
    n, k = s.ambient_dim, s.dim
    if k == 0:
        return Subspace.full(n)
    if k == n:
        return Subspace.zero(n)
    # a complete QR of an orthonormal frame extends it to a basis
    q, _ = np.linalg.qr(s.frame, mode="complete")
    return Subspace(q[:, k:], n, check=False)


def sum(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:  # noqa: A001
    """Subspace sum ``s1 + s2``."""
    _check_same(s1, s2)
    return span(np.hstack([s1.frame, s2.frame]), tol, scale=1.0)


def intersect(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Intersection, computed as the complement of the sum of complements."""
    _check_same(s1, s2)
    return complement(sum(complement(s1), complement(s2), tol))


def projector(s: Subspace) -> np.ndarray:
    f = s.frame
    return f @ f.T


def project(s: Subspace, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != s.ambient_dim:
        raise DimensionError(f"vector of length {v.shape[0]} not in R^{s.ambient_dim}")
    return s.frame @ (s.frame.T @ v)


def containment_residual(s1: Subspace, x) -> float:
    """Largest relative distance from ``x`` (subspace or vectors) to ``s1``.

    Each candidate column ``c`` contributes ``|(I - P) c| / max(1, |c|)``.
    """
    if isinstance(x, Subspace):
        _check_same(s1, x)
        cols = x.frame
    else:
        cols = np.asarray(x, dtype=float)
        if cols.ndim == 1:
            cols = cols.reshape(-1, 1)
        if cols.shape[0] != s1.ambient_dim:
            raise DimensionError(f"vector of length {cols.shape[0]} not in R^{s1.ambient_dim}")
    if cols.shape[1] == 0:
        return 0.0
    resid = cols - s1.frame @ (s1.frame.T @ cols)
    norms = np.maximum(1.0, np.linalg.norm(cols, axis=0))
    return float(np.max(np.linalg.norm(resid, axis=0) / norms))


def contains(s1: Subspace, x, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True when ``x`` (a subspace, vector, or matrix of column vectors) lies in ``s1``."""
    return containment_residual(s1, x) <= tol.contain


def gap(s1: Subspace, s2: Subspace) -> float:
    """Spectral norm of the difference of the orthogonal projectors.

    Uses ``|P1 - P2| = max(|(I - P2) P1|, |(I - P1) P2|)``, evaluated on the
    frames so that no ambient-size matrix is formed.
    """
    _check_same(s1, s2)
    if s1.dim == 0 and s2.dim == 0:
        return 0.0
    return max(_residual_norm(s2, s1.frame), _residual_norm(s1, s2.frame))


def _residual_norm(s: Subspace, cols) -> float:
    """Spectral norm of ``(I - P_s) cols``."""
    if cols.shape[1] == 0:
        return 0.0
    r = cols - s.frame @ (s.frame.T @ cols)
    if r.shape[1] > r.shape[0]:
        return float(np.linalg.norm(r, 2))
    # the Gram matrix of a small residual carries no cancellation error
    return float(np.sqrt(max(np.linalg.eigvalsh(r.T @ r)[-1], 0.0)))


def equal(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return gap(s1, s2) <= tol.eq


def direct_sum_coords(*parts: Subspace) -> Subspace:
    """Product ``S1 x S2 x ...`` inside ``R^{n1} + R^{n2} + ...``."""
    n = _sum(p.ambient_dim for p in parts)
    k = _sum(p.dim for p in parts)
    frame = np.zeros((n, k))
    r = c = 0
    for p in parts:
        frame[r:r + p.ambient_dim, c:c + p.dim] = p.frame
        r += p.ambient_dim
        c += p.dim
    return Subspace(frame, n, check=False)
