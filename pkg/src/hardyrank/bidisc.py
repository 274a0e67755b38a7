"""Two-variable structure on the truncated Hardy space of the bidisc.

Coefficient matrices are indexed ``(p, q)`` for ``z^p w^q`` and flatten
row-major (z-degree major), which is what ``np.kron(u, v)`` produces for a
z-vector ``u`` and a w-vector ``v``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse

from .blaschke import BlaschkeProduct, multiplication_matrix
from .errors import CoverageError, DegenerateInnerError
from .linalg import complement, coverage, frozen, subspace_gap
from .model_space import beurling_frame, model_projector, model_window_frame, shift_matrix, tm_frame

LABELS = ("S", "E", "Etilde", "SphiSpsi", "custom")


@dataclass(frozen=True)
class BidiscVector:
    """Truncated element of H^2(D^2): ``coeffs[p, q]`` multiplies ``z^p w^q``."""

    coeffs: np.ndarray

    @classmethod
    def from_flat(cls, flat, N: int) -> "BidiscVector":
        return cls(np.asarray(flat, dtype=complex).reshape(N + 1, N + 1))

    @property
    def truncation(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "BidiscVector") -> complex:
        """``<self, other>``, linear in ``self``."""
        return complex(np.vdot(other.coeffs, self.coeffs))

    def shifted(self, p: int, q: int) -> "BidiscVector":
        """Multiply by ``z^p w^q`` and drop coefficients beyond the truncation."""
        out = np.zeros_like(self.coeffs)
        n = self.coeffs.shape[0]
        if p < n and q < n:
            out[p:, q:] = self.coeffs[: n - p, : n - q]
        return BidiscVector(out)


@dataclass(frozen=True)
class SubspaceFrame:
    """Orthonormal family of bidisc vectors, stored as columns of ``basis``."""

    basis: np.ndarray
    label: str
    truncation: int
    degrees: tuple = (0, 0)
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown frame label {self.label!r}")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def vectors(self) -> list:
        return [BidiscVector.from_flat(self.basis[:, j], self.truncation) for j in range(self.dim)]

    def project(self, v):
        return self.basis @ (self.basis.conj().T @ v)

    def orthonormality_defect(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.abs(self.basis.conj().T @ self.basis - np.eye(self.dim)).max())


@dataclass(frozen=True)
class TiltedCoefficients:
    """Coordinates of an element of E-tilde.

    ``A[k, l]`` multiplies ``phi f_k (x) g_l`` and ``B[k, l]`` multiplies
    ``f_k (x) psi g_l``, where ``f_k``, ``g_l`` are the TM frames.
    """

    A: np.ndarray
    B: np.ndarray = field(default=None)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        B = np.zeros_like(A) if self.B is None else np.atleast_2d(np.asarray(self.B, dtype=complex))
        if A.shape != B.shape:
            raise ValueError(f"A and B shapes differ: {A.shape} vs {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_flat(cls, coords, d1: int, d2: int) -> "TiltedCoefficients":
        coords = np.asarray(coords, dtype=complex)
        return cls(coords[: d1 * d2].reshape(d1, d2), coords[d1 * d2 :].reshape(d1, d2))

    @property
    def shape(self) -> tuple:
        return self.A.shape

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.A.reshape(-1), self.B.reshape(-1)])

    def norm(self) -> float:
        return float(np.sqrt(np.linalg.norm(self.A) ** 2 + np.linalg.norm(self.B) ** 2))


def shift_pair(N: int):
    """Sparse coordinate matrices of the truncated ``(M_z, M_w)``."""
    if N < 1:
        raise ValueError("shift_pair needs N >= 1")
    s = scipy.sparse.csr_matrix(shift_matrix(N))
    eye = scipy.sparse.identity(N + 1, format="csr")
    return scipy.sparse.kron(s, eye, format="csr"), scipy.sparse.kron(eye, s, format="csr")


def defect_projection(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int) -> np.ndarray:
    """Dense matrix of ``I - (I - M_phi M_phi* (x) I)(I - I (x) M_psi M_psi*)``.

    Truncation to degrees <= N gives exactly the compression of the
    infinite-dimensional operator, because ``M_phi*`` preserves polynomials
    of degree <= N.
    """
    qa = model_projector(phi, N)
    qb = model_projector(psi, N)
    eye = np.eye(N + 1)
    return np.eye((N + 1) ** 2) - np.kron(qa, eye) @ np.kron(eye, qb)


def defect_projection_sum_form(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int) -> np.ndarray:
    """The same operator written as ``(M_phi M_phi*) (x) (I - M_psi M_psi*) + I (x) M_psi M_psi*``."""
    eye = np.eye(N + 1)
    pa = eye - model_projector(phi, N)
    pb = eye - model_projector(psi, N)
    return np.kron(pa, eye - pb) + np.kron(eye, pb)


def apply_defect_complement(phi, psi, N, vectors):
    """Apply ``I - X = (I - M_phi M_phi*) (x) (I - M_psi M_psi*)`` to columns without forming it."""
    qa = model_projector(phi, N)
    qb = model_projector(psi, N)
    cube = np.asarray(vectors, dtype=complex).reshape(N + 1, N + 1, -1)
    out = np.einsum("ap,pqk->aqk", qa, cube, optimize=True)
    out = np.einsum("aqk,bq->abk", out, qb, optimize=True)
    return out.reshape((N + 1) ** 2, -1)


def _tail(phi, psi, N):
    return tm_frame(phi, N).tail_bound + tm_frame(psi, N).tail_bound


@lru_cache(maxsize=64)
def submodule_frame(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int, tol: float = 1e-8) -> SubspaceFrame:
    """Frame of ``S = (Q_phi (x) Q_psi)^perp`` within the degree-N box.

    Assembled from ``(S_phi (x) Q_psi) (+) (H^2 (x) S_psi)`` and cross-checked
    against the range of the defect projection.
    """
    f_psi = tm_frame(psi, N).columns
    s_phi = beurling_frame(phi, N)
    s_psi = beurling_frame(psi, N)
    basis = np.hstack([np.kron(s_phi, f_psi), np.kron(np.eye(N + 1), s_psi)])
    expected = (N + 1) ** 2 - phi.degree * psi.degree
    leak = np.abs(apply_defect_complement(phi, psi, N, basis)).max() if basis.size else 0.0
    if basis.shape[1] != expected or leak > tol:
        raise CoverageError(f"submodule frame disagrees with ran X: leak {leak:.3e}", leak)
    return SubspaceFrame(frozen(basis), "S", N, (phi.degree, psi.degree), _tail(phi, psi, N))


def submodule_window_frame(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int, window: int) -> SubspaceFrame:
    """Frame of ``S`` intersected with the box of bidegree <= (window, window).

    Equals ``(S_phi,w (x) Qhat_psi) (+) (H_w (x) S_psi,w)`` where ``Qhat`` is
    the window truncation of the model space; every vector lies in ``S``.
    """
    eye_w = np.zeros((N + 1, window + 1))
    eye_w[: window + 1] = np.eye(window + 1)
    basis = np.hstack(
        [
            np.kron(beurling_frame(phi, N, window), model_window_frame(psi, N, window)),
            np.kron(eye_w, beurling_frame(psi, N, window)),
        ]
    )
    return SubspaceFrame(frozen(basis), "S", N, (phi.degree, psi.degree), 0.0)


def product_frame(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int, window: int | None = None) -> SubspaceFrame:
    """Frame of ``S_phi (x) S_psi`` (optionally inside the window box)."""
    basis = np.kron(beurling_frame(phi, N, window), beurling_frame(psi, N, window))
    return SubspaceFrame(frozen(basis), "SphiSpsi", N, (phi.degree, psi.degree), 0.0)


def quotient_frame(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int) -> SubspaceFrame:
    """Frame of ``Q_phi (x) Q_psi = S^perp``."""
    basis = np.kron(tm_frame(phi, N).columns, tm_frame(psi, N).columns)
    return SubspaceFrame(frozen(basis), "custom", N, (phi.degree, psi.degree), _tail(phi, psi, N))


def _require_nontrivial(phi, psi):
    if phi.degree == 0 or psi.degree == 0:
        raise DegenerateInnerError("E and E-tilde need two nonconstant inner functions")


def _times(theta: BlaschkeProduct, columns: np.ndarray) -> np.ndarray:
    """``P_N(theta f)`` for each column ``f`` (exact through degree N)."""
    return multiplication_matrix(theta, columns.shape[0] - 1) @ columns


@lru_cache(maxsize=64)
def e_frames(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int):
    """Frames of ``E = (S_phi (x) Q_psi) (+) (Q_phi (x) S_psi)`` and of
    ``E-tilde = (phi Q_phi (x) Q_psi) (+) (Q_phi (x) psi Q_psi)``.

    The E-tilde frame is exactly ``{phi f_k (x) g_l} + {f_k (x) psi g_l}`` in the
    order used by :class:`TiltedCoefficients`.
    """
    _require_nontrivial(phi, psi)
    f = tm_frame(phi, N).columns
    g = tm_frame(psi, N).columns
    e_basis = np.hstack([np.kron(beurling_frame(phi, N), g), np.kron(f, beurling_frame(psi, N))])
    et_basis = np.hstack([np.kron(_times(phi, f), g), np.kron(f, _times(psi, g))])
    degrees = (phi.degree, psi.degree)
    # phi f_k has the poles of phi and f_k together, so its tail is that of a
    # TM function of the squared product.
    tail = tm_frame(phi.squared(), N).tail_bound + tm_frame(psi.squared(), N).tail_bound
    return (
        SubspaceFrame(frozen(e_basis), "E", N, degrees, _tail(phi, psi, N)),
        SubspaceFrame(frozen(et_basis), "Etilde", N, degrees, tail),
    )


def e_window_frame(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int, window: int) -> SubspaceFrame:
    """The part of E whose Beurling factor is confined to degrees <= window."""
    _require_nontrivial(phi, psi)
    f = tm_frame(phi, N).columns
    g = tm_frame(psi, N).columns
    basis = np.hstack([np.kron(beurling_frame(phi, N, window), g), np.kron(f, beurling_frame(psi, N, window))])
    return SubspaceFrame(frozen(basis), "E", N, (phi.degree, psi.degree), _tail(phi, psi, N))


def e_inner_frame(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int) -> SubspaceFrame:
    """Frame of ``(S_phi^2 (x) Q_psi) (+) (Q_phi (x) S_psi^2)``, the piece removed from E."""
    _require_nontrivial(phi, psi)
    f = tm_frame(phi, N).columns
    g = tm_frame(psi, N).columns
    basis = np.hstack(
        [np.kron(beurling_frame(phi.squared(), N), g), np.kron(f, beurling_frame(psi.squared(), N))]
    )
    return SubspaceFrame(frozen(basis), "custom", N, (phi.degree, psi.degree), _tail(phi, psi, N))


def e_tilde_by_complement(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int) -> SubspaceFrame:
    """E-tilde computed as ``E minus ((S_phi^2 (x) Q_psi) (+) (Q_phi (x) S_psi^2))``."""
    e, _ = e_frames(phi, psi, N)
    inner = e_inner_frame(phi, psi, N)
    basis = complement(inner.basis, e.basis, rank=inner.dim)
    return SubspaceFrame(basis, "Etilde", N, (phi.degree, psi.degree), e.tail_bound)


def compressed_pair(frame: SubspaceFrame, N: int | None = None):
    """Frame-coordinate matrices of ``P_F M_z|_F`` and ``P_F M_w|_F``."""
    N = frame.truncation if N is None else N
    mz, mw = shift_pair(N)
    b = frame.basis
    return b.conj().T @ (mz @ b), b.conj().T @ (mw @ b)


def block_formula_pair(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int):
    """Compressions of the shifts to E assembled from one-variable pieces.

    ``P_E M_z|_E = (M_z|S_phi (x) P_Q_psi) (+) (P_Q_phi M_z|Q_phi (x) P_S_psi)`` and
    the analogous formula for ``M_w``, in the basis of :func:`e_frames`.
    """
    _require_nontrivial(phi, psi)
    shift = shift_matrix(N)
    f = tm_frame(phi, N).columns
    g = tm_frame(psi, N).columns
    sa = beurling_frame(phi, N)
    sb = beurling_frame(psi, N)
    c_phi = f.conj().T @ shift @ f
    c_psi = g.conj().T @ shift @ g
    a_phi = sa.conj().T @ shift @ sa
    a_psi = sb.conj().T @ shift @ sb
    d1, d2 = phi.degree, psi.degree
    nz = np.kron(a_phi, np.eye(d2))
    nw = np.kron(np.eye(d1), a_psi)
    z = scipy.linalg.block_diag(nz, np.kron(c_phi, np.eye(sb.shape[1])))
    w = scipy.linalg.block_diag(np.kron(np.eye(sa.shape[1]), c_psi), nw)
    return z, w


def theta_square_identity(theta: BlaschkeProduct, N: int) -> float:
    """Largest principal angle between ``S_theta minus S_theta^2`` and ``theta Q_theta``."""
    if theta.degree == 0:
        raise DegenerateInnerError("theta must be nonconstant")
    s1 = beurling_frame(theta, N)
    s2 = beurling_frame(theta.squared(), N)
    diff = complement(s2, s1, rank=s2.shape[1])
    explicit = _times(theta, tm_frame(theta, N).columns)
    q, _ = np.linalg.qr(explicit)
    return subspace_gap(diff, q)


def invariance_defect(ops, frame_basis, complement_basis=None) -> float:
    """Largest ``||(I - P_F) T v||`` over frame vectors ``v`` and operators ``T``.

    When ``F`` is nearly the whole space, pass an orthonormal basis of its
    complement; the defect is then ``||P_{F^perp} T v||`` computed directly.
    """
    worst = 0.0
    for op in ops:
        image = np.asarray(op @ frame_basis)
        if not image.size:
            continue
        if complement_basis is None:
            worst = max(worst, coverage(frame_basis, image))
        elif complement_basis.shape[1]:
            leak = complement_basis.conj().T @ image
            worst = max(worst, float(np.linalg.norm(leak, axis=0).max()))
    return worst


# ---------------------------------------------------------------- text format


def _fmt(x: float) -> str:
    return repr(float(x) + 0.0)


def format_frame(frame: SubspaceFrame) -> str:
    """Serialize a frame: header ``N d1 d2 label``, then N+1 lines per vector."""
    N = frame.truncation
    d1, d2 = frame.degrees
    lines = [f"{N} {d1} {d2} {frame.label}"]
    for j in range(frame.dim):
        mat = frame.basis[:, j].reshape(N + 1, N + 1)
        for row in mat:
            lines.append(" ".join(f"{_fmt(c.real)},{_fmt(c.imag)}" for c in row))
    return "\n".join(lines) + "\n"


def parse_frame(text: str) -> SubspaceFrame:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty frame file")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError(f"bad frame header {lines[0]!r}")
    N, d1, d2 = (int(x) for x in head[:3])
    label = head[3]
    body = lines[1:]
    if len(body) % (N + 1):
        raise ValueError("frame body is not a whole number of vectors")
    cols = []
    for start in range(0, len(body), N + 1):
        rows = []
        for line in body[start : start + N + 1]:
            entries = line.split()
            if len(entries) != N + 1:
                raise ValueError(f"expected {N + 1} entries per row, got {len(entries)}")
            rows.append([complex(float(a), float(b)) for a, b in (e.split(",") for e in entries)])
        cols.append(np.array(rows, dtype=complex).reshape(-1))
    basis = np.array(cols).T if cols else np.zeros(((N + 1) ** 2, 0), dtype=complex)
    return SubspaceFrame(basis, label, N, (d1, d2))


def write_frame(frame: SubspaceFrame, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_frame(frame))


def read_frame(path) -> SubspaceFrame:
    with open(path, encoding="ascii") as fh:
        return parse_frame(fh.read())
