"""Rank certification: Krylov orbit spans, the witness vector, the semi-invariant
compression step and assembly of the rank certificate."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bidisc import (
    BidiscVector,
    TiltedCoefficients,
    compressed_pair,
    e_frames,
    e_inner_frame,
    e_window_frame,
    product_frame,
    quotient_frame,
    shift_pair,
    submodule_frame,
    submodule_window_frame,
)
from .blaschke import BlaschkeProduct, _taylor
from .errors import PreconditionError, WindowOverflowError, ZeroInputError
from .linalg import DROP_TOL, complement, coverage, rank_revealing_basis
from .model_space import beurling_frame, conjugation, tm_frame

VERDICTS = ("rank_eq_2", "rank_eq_1", "inconclusive")


@dataclass(frozen=True)
class KrylovReport:
    generator_count: int
    spanned_dim: int
    target_dim: int
    coverage_residual: float
    max_word_degree: int


def _words(n_ops, max_total_degree, max_degrees):
    caps = max_degrees if max_degrees is not None else (max_total_degree,) * n_ops
    ranges = [range(min(c, max_total_degree) + 1) for c in caps]
    words = [w for w in itertools.product(*ranges) if sum(w) <= max_total_degree]
    return sorted(words, key=lambda w: (sum(w), w))


def krylov_vectors(ops, generators, max_total_degree, max_degrees=None):
    """All ``T_1^k_1 ... T_n^k_n g`` with ``sum k <= max_total_degree`` (and per-operator caps)."""
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim == 1:
        gens = gens[:, None]
    if gens.shape[1] == 0:
        return gens
    cache = {}
    for word in _words(len(ops), max_total_degree, max_degrees):
        if not any(word):
            cache[word] = gens
            continue
        j = max(i for i, k in enumerate(word) if k)
        parent = word[:j] + (word[j] - 1,) + word[j + 1 :]
        cache[word] = np.asarray(ops[j] @ cache[parent])
    return np.hstack(list(cache.values()))


def krylov_span(ops, generators, max_total_degree, *, max_degrees=None, target=None, drop_tol=DROP_TOL):
    """Orthonormal basis of the joint orbit span of ``generators`` and its report.

    ``target`` (a column frame) defaults to the whole ambient space.
    """
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim == 1:
        gens = gens[:, None]
    n = gens.shape[0]
    basis = rank_revealing_basis(krylov_vectors(ops, gens, max_total_degree, max_degrees), drop_tol)
    if target is None:
        target = np.eye(n, dtype=complex)
    report = KrylovReport(
        generator_count=gens.shape[1],
        spanned_dim=basis.shape[1],
        target_dim=np.shape(target)[1],
        coverage_residual=min(1.0, coverage(basis, target)),
        max_word_degree=max_total_degree,
    )
    return basis, report


# ------------------------------------------------------------------- witness


def tilde_vector(phi, psi, coeffs: TiltedCoefficients, N: int) -> BidiscVector:
    """The bidisc vector with E-tilde coordinates ``coeffs``."""
    _, et = e_frames(phi, psi, N)
    return BidiscVector.from_flat(et.basis @ coeffs.flat, N)


def _check_shape(phi, psi, xi: TiltedCoefficients):
    if xi.shape != (phi.degree, psi.degree):
        raise ValueError(f"coefficient shape {xi.shape} does not match (d1, d2) = {(phi.degree, psi.degree)}")


def witness_coefficients(phi, psi, xi: TiltedCoefficients, N: int, s_sign: int = -1) -> TiltedCoefficients:
    """E-tilde coordinates of the witness for ``xi``.

    The phi-block carries ``(C_phi (x) C_psi) B`` and the psi-block carries
    ``-(C_phi (x) C_psi) A``. ``s_sign`` exists only for negative controls.
    """
    _check_shape(phi, psi, xi)
    if xi.norm() == 0.0:
        raise ZeroInputError("xi must be nonzero")
    k1 = conjugation(phi, N).kernel
    k2 = conjugation(psi, N).kernel
    t = k1 @ np.conj(xi.B) @ k2.T
    s = s_sign * (k1 @ np.conj(xi.A) @ k2.T)
    return TiltedCoefficients(t, s)


def witness(phi, psi, xi: TiltedCoefficients, N: int, s_sign: int = -1) -> BidiscVector:
    """The vector ``eta_xi`` in E-tilde orthogonal to the whole module orbit of ``xi``."""
    return tilde_vector(phi, psi, witness_coefficients(phi, psi, xi, N, s_sign), N)


def max_pairing_shift(phi, psi, N: int, buffer: int) -> tuple:
    """Largest (P, Q) for which pairings stay inside the safe window.

    Vectors of E-tilde are not polynomials; their coefficients decay
    geometrically, so one buffer is reserved for that decay and one for the
    truncation edge.
    """
    top = max(N - 2 * buffer, 0)
    return top, top


def _check_window(phi, psi, N, P, Q, buffer):
    pmax, qmax = max_pairing_shift(phi, psi, N, buffer)
    if P < 0 or Q < 0 or P > pmax or Q > qmax:
        raise WindowOverflowError(f"shifts (P, Q) = {(P, Q)} exceed the safe window {(pmax, qmax)}")


def _shifted_inner(x, y, p, q):
    """``<z^p w^q x, y>`` for coefficient matrices (leading axes broadcast)."""
    n = x.shape[-1]
    return np.einsum("...ab,...ab->...", x[..., : n - p, : n - q], np.conj(y[..., p:, q:]))


def pairing_check(phi, psi, xi: BidiscVector, eta: BidiscVector, P: int, Q: int, buffer: int = 8) -> float:
    """``max |<(z^p w^q) xi, eta>|`` over ``0 <= p <= P``, ``0 <= q <= Q``."""
    N = xi.truncation
    _check_window(phi, psi, N, P, Q, buffer)
    x, y = xi.coeffs, eta.coeffs
    return max(abs(_shifted_inner(x, y, p, q)) for p in range(P + 1) for q in range(Q + 1))


def pairing_matrices(phi, psi, N: int, P: int, Q: int, s_sign: int = -1):
    """``G[p, q, i, j] = <(z^p w^q) e_i, eta(e_j)>`` over the E-tilde basis ``e_i``."""
    _, et = e_frames(phi, psi, N)
    m = et.dim
    d1, d2 = phi.degree, psi.degree
    basis = et.basis.T.reshape(m, N + 1, N + 1)
    etas = np.stack(
        [
            witness(phi, psi, TiltedCoefficients.from_flat(np.eye(m)[j], d1, d2), N, s_sign).coeffs
            for j in range(m)
        ]
    )
    out = np.empty((P + 1, Q + 1, m, m), dtype=complex)
    n = N + 1
    for p in range(P + 1):
        for q in range(Q + 1):
            x = basis[:, : n - p, : n - q].reshape(m, -1)
            y = etas[:, p:, q:].reshape(m, -1)
            out[p, q] = x @ y.conj().T
    return out


def bilinear_vanishing(phi, psi, N: int, P: int, Q: int, buffer: int = 8, s_sign: int = -1) -> float:
    """Certify ``<(z^p w^q) xi, eta_xi> = 0`` for every ``xi`` at once.

    Because ``xi -> eta_xi`` is antilinear, ``(xi, xi') -> <(z^p w^q) xi, eta_xi'>``
    is bilinear, and its quadratic form vanishes identically exactly when the
    symmetric part of its matrix on the E-tilde basis does. Returns the
    largest entry of that symmetric part over the window.
    """
    _check_window(phi, psi, N, P, Q, buffer)
    g = pairing_matrices(phi, psi, N, P, Q, s_sign)
    sym = 0.5 * (g + np.swapaxes(g, -1, -2))
    return float(np.abs(sym).max())


def _vector_angle(basis, v) -> float:
    """Angle (radians) between ``v`` and ``span(basis)``, accurate near 0 and pi/2."""
    inside = basis @ (basis.conj().T @ v) if basis.shape[1] else np.zeros_like(v)
    return math.atan2(float(np.linalg.norm(v - inside)), float(np.linalg.norm(inside)))


def tilde_orbit(phi, psi, xi: TiltedCoefficients, N: int):
    """Orthonormal E-tilde coordinates of the orbit of ``xi`` under the compressed shifts."""
    _, et = e_frames(phi, psi, N)
    zt, wt = compressed_pair(et)
    degree = phi.degree + psi.degree
    basis, _ = krylov_span((zt, wt), xi.flat, degree)
    return basis


def single_generator_deficiency(phi, psi, xi: TiltedCoefficients, N: int) -> float:
    """Angle in degrees between ``eta_xi`` and the compressed-module orbit of ``xi``.

    A positive angle shows ``{xi}`` does not generate E-tilde.
    """
    _check_shape(phi, psi, xi)
    if xi.norm() == 0.0:
        raise ZeroInputError("xi must be nonzero")
    basis = tilde_orbit(phi, psi, xi, N)
    eta = witness_coefficients(phi, psi, xi, N).flat
    return math.degrees(_vector_angle(basis, eta))


def random_tilted(d1: int, d2: int, seed: int, trial: int) -> TiltedCoefficients:
    """Standard complex Gaussian coefficients for trial ``trial``; the stream key is ``seed ^ trial``."""
    rng = np.random.Generator(np.random.Philox(key=seed ^ trial))
    parts = rng.standard_normal((4, d1, d2))
    return TiltedCoefficients((parts[0] + 1j * parts[1]) / math.sqrt(2), (parts[2] + 1j * parts[3]) / math.sqrt(2))


# -------------------------------------------------- semi-invariant compression


@dataclass(frozen=True)
class LemmaLink:
    """Result of compressing a generating set to ``S1 minus S2``."""

    basis: np.ndarray  # frame of S1 minus S2 in ambient coordinates
    ops: tuple  # compressed operators in that frame
    generators: np.ndarray  # projected generators in that frame
    report: KrylovReport
    hypotheses: dict = field(default_factory=dict)


def compress_semi_invariant(
    ops,
    s1,
    s2,
    generators,
    tol,
    *,
    max_total_degree,
    max_degrees=None,
    s1_target=None,
    s_target=None,
    s1_test=None,
    s2_test=None,
    s1_perp=None,
    s2_perp=None,
) -> LemmaLink:
    """Check the semi-invariant compression step constructively.

    Hypotheses: ``S2 <= S1``, both invariant under ``ops``, and the generators
    generate ``S1`` (the ``s1_target`` part of it). Then the projections of
    the generators onto ``S = S1 minus S2`` must generate ``S`` (the
    ``s_target`` part) under the compressed operators.

    ``s1_test``/``s2_test`` restrict invariance checks to window vectors;
    ``s1_perp``/``s2_perp`` are optional complements used when a frame is
    nearly the whole space.
    """
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim == 1:
        gens = gens[:, None]

    def outside(frame, perp, vectors):
        if vectors.shape[1] == 0:
            return 0.0
        if perp is not None:
            if perp.shape[1] == 0:
                return 0.0
            return float(np.linalg.norm(perp.conj().T @ vectors, axis=0).max())
        return coverage(frame, vectors)

    hyp = {"containment": outside(s1, s1_perp, s2)}
    inv = 0.0
    for frame, perp, test in ((s1, s1_perp, s1_test), (s2, s2_perp, s2_test)):
        test = frame if test is None else test
        for op in ops:
            inv = max(inv, outside(frame, perp, np.asarray(op @ test)))
    hyp["invariance"] = inv
    hyp["generators_in_s1"] = outside(s1, s1_perp, gens)
    _, gen_report = krylov_span(
        ops, gens, max_total_degree, max_degrees=max_degrees, target=s1 if s1_target is None else s1_target
    )
    hyp["generation"] = gen_report.coverage_residual
    for name, value in hyp.items():
        if not value < tol:
            raise PreconditionError(name, value)

    s = complement(s2, s1, rank=s2.shape[1])
    cops = tuple(s.conj().T @ np.asarray(op @ s) for op in ops)
    pgens = s.conj().T @ gens
    target = np.eye(s.shape[1], dtype=complex) if s_target is None else s.conj().T @ s_target
    _, report = krylov_span(cops, pgens, max_total_degree, max_degrees=max_degrees, target=target)
    return LemmaLink(s, cops, pgens, report, hyp)


def semi_invariant_compression(ops, s1, s2, generators, tol, **kwargs) -> KrylovReport:
    """Coverage report for the compressed generators; see :func:`compress_semi_invariant`."""
    return compress_semi_invariant(ops, s1, s2, generators, tol, **kwargs).report


def module_generators(phi: BlaschkeProduct, psi: BlaschkeProduct, N: int) -> np.ndarray:
    """Columns ``phi(z) (x) 1`` and ``1 (x) psi(w)`` truncated to degree N."""
    c_phi = _taylor(phi, N + 1)
    c_psi = _taylor(psi, N + 1)
    e0 = np.zeros(N + 1)
    e0[0] = 1.0
    return np.stack([np.kron(c_phi, e0), np.kron(e0, c_psi)], axis=1)


def lemma_links(phi, psi, N: int, buffer: int, tol: float):
    """The two compression steps S -> E and E -> E-tilde, with their coverage reports."""
    M = N - buffer
    ops = shift_pair(N)
    gens = module_generators(phi, psi, N)
    s_frame = submodule_frame(phi, psi, N)
    sphispsi = product_frame(phi, psi, N)
    # (S_phi (x) S_psi)^perp = (Q_phi (x) H^2) + (S_phi (x) Q_psi)
    f, g = tm_frame(phi, N).columns, tm_frame(psi, N).columns
    sphispsi_perp = np.hstack([np.kron(f, np.eye(N + 1)), np.kron(beurling_frame(phi, N), g)])
    e_win = e_window_frame(phi, psi, N, M)
    first = compress_semi_invariant(
        ops,
        s_frame.basis,
        sphispsi.basis,
        gens,
        tol,
        max_total_degree=2 * M,
        max_degrees=(M, M),
        s1_target=submodule_window_frame(phi, psi, N, M).basis,
        s_target=e_win.basis,
        s1_test=submodule_window_frame(phi, psi, N, M).basis,
        s2_test=product_frame(phi, psi, N, M).basis,
        s1_perp=quotient_frame(phi, psi, N).basis,
        s2_perp=sphispsi_perp,
    )
    e_basis = first.basis
    inner = e_inner_frame(phi, psi, N)
    inner_window = np.hstack(
        [
            np.kron(beurling_frame(phi.squared(), N, M), g),
            np.kron(f, beurling_frame(psi.squared(), N, M)),
        ]
    )
    to_e = e_basis.conj().T
    second = compress_semi_invariant(
        first.ops,
        np.eye(e_basis.shape[1], dtype=complex),
        to_e @ inner.basis,
        first.generators,
        tol,
        max_total_degree=2 * M,
        max_degrees=(M, M),
        s1_target=to_e @ e_win.basis,
        s2_test=to_e @ inner_window,
    )
    return first, second


# -------------------------------------------------------------- certificate


@dataclass(frozen=True)
class RankCertificate:
    phi: BlaschkeProduct
    psi: BlaschkeProduct
    n: int
    buffer: int
    tol: float
    seed: int
    upper: KrylovReport
    upper_generators: tuple
    bilinear_max: float | None
    trials: int
    deficiency_angles: tuple
    lemma_links: tuple
    verdict: str

    @property
    def min_deficiency_angle_deg(self):
        return min(self.deficiency_angles) if self.deficiency_angles else None

    @property
    def claim(self) -> str:
        rank = {"rank_eq_2": "rank S = 2", "rank_eq_1": "rank S = 1"}.get(self.verdict, "no rank claim")
        return f"{rank} verified at truncation N={self.n}, buffer={self.buffer}, tol={_num(self.tol)}"

    def to_dict(self) -> dict:
        return {
            "phi": self.phi.describe(),
            "psi": self.psi.describe(),
            "n": self.n,
            "buffer": self.buffer,
            "tol": self.tol,
            "upper": {
                "generators": list(self.upper_generators),
                "spanned_dim": self.upper.spanned_dim,
                "target_dim": self.upper.target_dim,
                "residual": self.upper.coverage_residual,
            },
            "lower": {
                "bilinear_max": self.bilinear_max,
                "trials": self.trials,
                "min_deficiency_angle_deg": self.min_deficiency_angle_deg,
                "lemma_links": list(self.lemma_links),
            },
            "verdict": self.verdict,
            "seed": self.seed,
            "claim": self.claim,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"


def _num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("non-finite number in certificate")
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats written to 17 significant digits (stable byte output)."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return _num(float(obj))


def certify_rank(
    phi: BlaschkeProduct,
    psi: BlaschkeProduct,
    N: int,
    buffer: int = 8,
    tol: float = 1e-8,
    trials: int = 100,
    seed: int = 0,
) -> RankCertificate:
    """Build the rank certificate for ``S = (Q_phi (x) Q_psi)^perp`` at truncation N.

    Upper bound: the orbit of ``{phi (x) 1, 1 (x) psi}`` (or of the single
    constant generator when one side is trivial) covers the windowed part of
    S. Lower bound: the witness identity, per-trial deficiency angles and the
    two compression links.
    """
    if N < phi.degree + psi.degree + buffer:
        raise ValueError(f"N = {N} is below degree(phi) + degree(psi) + buffer = {phi.degree + psi.degree + buffer}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = N - buffer
    ops = shift_pair(N)
    target = submodule_window_frame(phi, psi, N, M).basis
    gens = module_generators(phi, psi, N)
    common = dict(phi=phi, psi=psi, n=N, buffer=buffer, tol=tol, seed=seed)

    if phi.degree == 0 or psi.degree == 0:
        # S = Theta H^2(D^2) with Theta the trivial factor; Theta alone generates.
        col, name = (0, "phi(z)*1") if phi.degree == 0 else (1, "1*psi(w)")
        _, upper = krylov_span(ops, gens[:, col], 2 * M, max_degrees=(M, M), target=target)
        verdict = "rank_eq_1" if upper.coverage_residual < tol else "inconclusive"
        return RankCertificate(
            **common, upper=upper, upper_generators=(name,), bilinear_max=None, trials=0,
            deficiency_angles=(), lemma_links=(), verdict=verdict,
        )

    _, upper = krylov_span(ops, gens, 2 * M, max_degrees=(M, M), target=target)
    P, Q = max_pairing_shift(phi, psi, N, buffer)
    bil = bilinear_vanishing(phi, psi, N, P, Q, buffer)
    angles = tuple(
        single_generator_deficiency(phi, psi, random_tilted(phi.degree, psi.degree, seed, i), N)
        for i in range(trials)
    )
    try:
        links = tuple(link.report.coverage_residual for link in lemma_links(phi, psi, N, buffer, tol))
    except PreconditionError as exc:
        links = (exc.value,)
    passed = (
        upper.coverage_residual < tol
        and bil < tol
        and len(links) == 2
        and all(r < tol for r in links)
        and all(math.radians(a) > 10 * tol for a in angles)
    )
    return RankCertificate(
        **common, upper=upper, upper_generators=("phi(z)*1", "1*psi(w)"), bilinear_max=bil,
        trials=trials, deficiency_angles=angles, lemma_links=links,
        verdict="rank_eq_2" if passed else "inconclusive",
    )
