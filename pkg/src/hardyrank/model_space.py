"""One-variable machinery: model spaces Q_phi, Beurling subspaces S_phi, the
compressed shift and the C-symmetry conjugation, all on degree-N truncations."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .blaschke import (
    BlaschkeProduct,
    _majorant_tail,
    _taylor,
    factor_coefficients,
    multiplication_matrix,
    numerator_polynomial,
)
from .errors import CoverageError, DegenerateInnerError
from .linalg import complement, frozen, gram_schmidt, rank_revealing_basis


@dataclass(frozen=True)
class ModelSpaceFrame:
    """Orthonormal coefficient-space basis of the truncated model space."""

    columns: np.ndarray
    truncation: int
    tail_bound: float

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def project(self, v):
        return self.columns @ (self.columns.conj().T @ v)

    def coords(self, v):
        return self.columns.conj().T @ v


def tm_functions(phi: BlaschkeProduct, length: int) -> np.ndarray:
    """Truncated Takenaka-Malmquist functions for the zeros of ``phi``.

    Column j is ``sqrt(1-|a_j|^2)/(1 - conj(a_j) z) * prod_{i<j} (z-a_i)/(1-conj(a_i) z)``.
    """
    cols = np.zeros((length, phi.degree), dtype=complex)
    prefix = np.zeros(length, dtype=complex)
    prefix[0] = 1.0
    k = np.arange(length)
    for j, a in enumerate(phi.zeros):
        kernel = np.sqrt(1.0 - abs(a) ** 2) * np.conj(a) ** k
        cols[:, j] = np.convolve(prefix, kernel)[:length]
        prefix = np.convolve(prefix, factor_coefficients(a, length))[:length]
    return cols


def tm_tail_bound(phi: BlaschkeProduct, n: int) -> float:
    """Bound on the H^2 tail from degree ``n`` of every Takenaka-Malmquist function."""
    r = phi.radius
    if phi.degree == 0:
        return 0.0
    if r == 0.0:
        return 1.0 if n < phi.degree else 0.0
    return min(1.0, max(_majorant_tail(r, j + 1, r ** (-j), n, 2) for j in range(phi.degree)))


@lru_cache(maxsize=256)
def tm_frame(phi: BlaschkeProduct, N: int) -> ModelSpaceFrame:
    """Orthonormal frame of ``Q_phi`` truncated to degree ``N``.

    A constant ``phi`` has ``Q_phi = {0}`` and yields an empty frame.
    """
    if phi.degree == 0:
        return ModelSpaceFrame(frozen(np.zeros((N + 1, 0), dtype=complex)), N, 0.0)
    cols = gram_schmidt(tm_functions(phi, N + 1))
    return ModelSpaceFrame(frozen(cols), N, tm_tail_bound(phi, N + 1))


@lru_cache(maxsize=256)
def beurling_frame(phi: BlaschkeProduct, N: int, window: int | None = None) -> np.ndarray:
    """Orthonormal frame of ``S_phi`` intersected with polynomials of degree <= ``window``.

    The result is embedded in degree-N coordinates. A polynomial of degree
    ``<= window`` is orthogonal to ``Q_phi`` exactly when it is orthogonal to
    the degree-``window`` truncation of ``Q_phi``, so this frame lies inside
    ``S_phi`` with no truncation error.
    """
    M = N if window is None else window
    out = np.zeros((N + 1, M + 1 - phi.degree), dtype=complex)
    q = tm_functions(phi, M + 1)
    out[: M + 1] = complement(q, rank=phi.degree)
    return frozen(out)


@lru_cache(maxsize=256)
def model_window_frame(phi: BlaschkeProduct, N: int, window: int) -> np.ndarray:
    """Orthonormal frame of the degree-``window`` truncation of ``Q_phi``, in degree-N coordinates."""
    out = np.zeros((N + 1, phi.degree), dtype=complex)
    if phi.degree:
        out[: window + 1] = gram_schmidt(tm_functions(phi, window + 1))
    return frozen(out)


def model_projector(phi: BlaschkeProduct, N: int) -> np.ndarray:
    """Matrix of ``I - M_phi M_phi*`` compressed to degree <= N."""
    t = multiplication_matrix(phi, N)
    return np.eye(N + 1) - t @ t.conj().T


def shift_matrix(N: int) -> np.ndarray:
    """Truncated forward shift ``z^k -> z^(k+1)`` on degree <= N (top degree dropped)."""
    return np.eye(N + 1, k=-1)


def compressed_shift(phi: BlaschkeProduct, N: int) -> np.ndarray:
    """Frame-coordinate matrix of ``P_Q M_z |_Q`` for ``Q = Q_phi``."""
    if phi.degree == 0:
        raise DegenerateInnerError("compressed shift needs a nonconstant inner function")
    f = tm_frame(phi, N).columns
    return f.conj().T @ shift_matrix(N) @ f


def c_symmetry_matrix(phi: BlaschkeProduct, N: int) -> np.ndarray:
    """Hankel matrix ``H`` with ``M_z*(phi conj(f)) = H conj(f)`` for ``f`` of degree <= N.

    Entry ``(j, n)`` is the Taylor coefficient of ``phi`` at ``j + n + 1``.
    """
    c = _taylor(phi, 2 * N + 3)
    return scipy.linalg.hankel(c[1 : N + 2], c[N + 1 : 2 * N + 2])


def c_symmetry(phi: BlaschkeProduct, f, N: int) -> np.ndarray:
    """Coefficients of ``M_z*(phi conj(f))`` through degree N."""
    return c_symmetry_matrix(phi, N) @ np.conj(np.asarray(f, dtype=complex))


@dataclass(frozen=True)
class Conjugation:
    """Antilinear map on ``Q_phi``: coordinates ``c`` go to ``kernel @ conj(c)``."""

    kernel: np.ndarray
    frame: ModelSpaceFrame

    def apply_coords(self, coords):
        return self.kernel @ np.conj(coords)

    def apply(self, f):
        """Apply to a coefficient vector lying in the truncated model space."""
        return self.frame.columns @ self.apply_coords(self.frame.coords(f))

    def involution_defect(self) -> float:
        d = self.kernel.shape[0]
        return float(np.abs(self.kernel @ self.kernel.conj() - np.eye(d)).max())

    def unitarity_defect(self) -> float:
        d = self.kernel.shape[0]
        return float(np.abs(self.kernel.conj().T @ self.kernel - np.eye(d)).max())


@lru_cache(maxsize=256)
def conjugation(phi: BlaschkeProduct, N: int) -> Conjugation:
    """The C-symmetry ``f -> M_z*(phi conj(f))`` of ``Q_phi`` in TM-frame coordinates."""
    if phi.degree == 0:
        raise DegenerateInnerError("conjugation needs a nonconstant inner function")
    frame = tm_frame(phi, N)
    f = frame.columns
    kernel = f.conj().T @ c_symmetry_matrix(phi, N) @ f.conj()
    return Conjugation(frozen(kernel), frame)


@dataclass(frozen=True)
class BeurlingReport:
    residual: float
    worst_degree: int
    span_dim: int
    target_dim: int


def beurling_generator_check(phi: BlaschkeProduct, N: int, tol: float = 1e-10, buffer: int = 8) -> BeurlingReport:
    """Check that ``{z^k phi : k <= N - deg}`` spans the windowed part of ``S_phi``.

    The target is the basis ``z^i p(z)`` (``p`` the zero polynomial of phi) of
    ``S_phi`` inside degrees ``<= N - buffer``, indexed by its degree ``i + deg``.
    """
    d = phi.degree
    M = N - buffer
    span = rank_revealing_basis(multiplication_matrix(phi, N)[:, : N - d + 1])
    p = numerator_polynomial(phi)
    target = np.zeros((N + 1, max(M - d + 1, 0)), dtype=complex)
    for i in range(target.shape[1]):
        target[i : i + d + 1, i] = p / np.linalg.norm(p)
    resid = np.linalg.norm(target - span @ (span.conj().T @ target), axis=0) if target.size else np.zeros(1)
    worst = int(np.argmax(resid))
    report = BeurlingReport(float(resid[worst]), worst + d, span.shape[1], target.shape[1])
    if report.residual > tol:
        raise CoverageError(
            f"Beurling coverage failed at degree {report.worst_degree}: residual {report.residual:.3e}",
            report.residual,
            report.worst_degree,
        )
    return report
