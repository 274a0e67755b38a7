"""Dense linear-algebra helpers shared by the one- and two-variable code.

All frames are stored column-wise: an ``(n, k)`` array whose columns are
orthonormal in the standard inner product of ``C^n``.
"""
import numpy as np
import scipy.linalg

DROP_TOL = 1e-10


def gram_schmidt(vectors, reorth=True):
    """Orthonormalize columns in order (classical Gram-Schmidt, twice).

    Column order is preserved, so column ``j`` of the result spans the same
    flag as the first ``j + 1`` input columns. Dependent columns raise.
    """
    vectors = np.asarray(vectors, dtype=complex)
    n, k = vectors.shape
    out = np.zeros((n, k), dtype=complex)
    for j in range(k):
        v = vectors[:, j].copy()
        norm0 = np.linalg.norm(v)
        for _ in range(2 if reorth else 1):
            v -= out[:, :j] @ (out[:, :j].conj().T @ v)
        norm = np.linalg.norm(v)
        if norm <= DROP_TOL * max(norm0, 1.0):
            raise np.linalg.LinAlgError(f"column {j} is linearly dependent on its predecessors")
        out[:, j] = v / norm
    return out


def rank_revealing_basis(vectors, drop_tol=DROP_TOL):
    """Orthonormal basis of the column span, dropping directions below ``drop_tol``.

    Uses QR with column pivoting; a pivot is kept when its residual norm
    exceeds ``drop_tol`` times the largest column norm.
    """
    vectors = np.asarray(vectors, dtype=complex)
    n = vectors.shape[0]
    if vectors.ndim != 2 or vectors.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    scale = np.max(np.linalg.norm(vectors, axis=0))
    if scale == 0.0:
        return np.zeros((n, 0), dtype=complex)
    q, r, _ = scipy.linalg.qr(vectors, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > drop_tol * scale))
    return q[:, :rank]


def complement(sub, ambient=None, rank=None):
    """Orthonormal basis of ``span(ambient)`` minus ``span(sub)``.

    ``ambient`` defaults to the identity. ``sub`` need not be orthonormal; its
    rank is detected numerically unless given.
    """
    sub = np.asarray(sub, dtype=complex)
    n = sub.shape[0]
    if ambient is None:
        ambient = np.eye(n, dtype=complex)
    ambient = np.asarray(ambient, dtype=complex)
    if sub.shape[1] == 0:
        return ambient.copy()
    y = ambient.conj().T @ sub
    u, s, _ = np.linalg.svd(y, full_matrices=True)
    if rank is None:
        rank = int(np.count_nonzero(s > 1e-8 * max(s[0], 1e-300))) if s.size else 0
    return ambient @ u[:, rank:]


def coverage(span, target):
    """Largest distance of a (unit) target column from ``span(span)``.

    Both arguments are column frames; ``span`` must be orthonormal. Returns
    0.0 for an empty target.
    """
    target = np.asarray(target, dtype=complex)
    if target.shape[1] == 0:
        return 0.0
    span = np.asarray(span, dtype=complex)
    resid = target - span @ (span.conj().T @ target) if span.shape[1] else target
    return float(np.max(np.linalg.norm(resid, axis=0)))


def principal_angles(u, v):
    """Principal angles (radians, descending) between two column spans.

    Small angles are resolved through sines, so values near zero keep full
    relative accuracy instead of stalling at ``sqrt(eps)``.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape[1] == 0 or v.shape[1] == 0:
        return np.zeros(0)
    return scipy.linalg.subspace_angles(u, v)


def subspace_gap(u, v):
    """Largest principal angle, or pi/2 if the dimensions differ."""
    if np.shape(u)[1] != np.shape(v)[1]:
        return float(np.pi / 2)
    angles = principal_angles(u, v)
    return float(angles.max()) if angles.size else 0.0


def projector_distance(u, v):
    """Spectral-norm distance between orthogonal projectors onto two frames."""
    pu = u @ u.conj().T
    pv = v @ v.conj().T
    return float(np.linalg.norm(pu - pv, 2))


def frozen(array):
    """Return a read-only view, for values that are cached and shared."""
    array = np.asarray(array)
    array.setflags(write=False)
    return array
