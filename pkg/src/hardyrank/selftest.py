"""Invariant suite run by ``hardyrank selftest`` over a roster of (phi, psi) pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bidisc, model_space
from .blaschke import BlaschkeProduct, evaluate, taylor_coefficients
from .linalg import subspace_gap
from .rank_engine import (
    bilinear_vanishing,
    certify_rank,
    max_pairing_shift,
    pairing_check,
    random_tilted,
    tilde_vector,
    witness,
)


def default_roster():
    z = BlaschkeProduct.monomial
    return [
        (z(1), z(1)),
        (z(2), z(1)),
        (z(1), z(2)),
        (BlaschkeProduct((0.5,)), z(1)),
        (BlaschkeProduct((0.5, -0.3)), BlaschkeProduct((0.2j,))),
    ]


@dataclass(frozen=True)
class CheckResult:
    name: str
    pair: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(self.value < self.limit)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<28} {self.pair:<32} value={self.value:.3e} limit={self.limit:.1e}"


def _label(phi, psi):
    fmt = lambda b: ";".join(b.describe()["zeros"]) or "-"  # noqa: E731
    return f"phi=[{fmt(phi)}] psi=[{fmt(psi)}]"


def _one_variable_checks(theta, N, rng):
    d = theta.degree
    pts = np.exp(2j * np.pi * rng.random(100))
    yield "evaluate_unimodular", float(np.abs(np.abs(evaluate(theta, pts)) - 1).max()), 1e-12
    conv = np.array([1.0 + 0j])
    for a in theta.zeros:
        conv = np.convolve(conv, taylor_coefficients(BlaschkeProduct((a,), margin=theta.margin), N).coeffs)[: N + 1]
    yield "taylor_convolution", float(np.abs(conv * theta.constant - taylor_coefficients(theta, N).coeffs).max()), 1e-13
    if d == 0:
        return
    frame = model_space.tm_frame(theta, N)
    yield "tm_frame_orthonormal", float(np.abs(frame.columns.conj().T @ frame.columns - np.eye(d)).max()), 1e-12
    # characteristic polynomial instead of eigenvalues: stable for repeated zeros
    charpoly = np.poly(model_space.compressed_shift(theta, N))
    yield "compressed_shift_spectrum", float(np.abs(charpoly - np.poly(theta.zeros)).max()), 1e-8
    conj = model_space.conjugation(theta, N)
    yield "conjugation", max(conj.involution_defect(), conj.unitarity_defect()), 1e-10
    yield "beurling_generator_check", model_space.beurling_generator_check(theta, N, tol=1.0).residual, 1e-10
    yield "theta_square_identity", bidisc.theta_square_identity(theta, N), 1e-9


def run_checks(roster, N=32, buffer=8, tol=1e-8, trials=100, seed=0, s_sign=-1):
    """Yield :class:`CheckResult` objects in a fixed order."""
    rng = np.random.default_rng(seed)
    for phi, psi in roster:
        label = _label(phi, psi)
        for theta in (phi, psi):
            for name, value, limit in _one_variable_checks(theta, N, rng):
                yield CheckResult(name, label, value, limit)
        s = bidisc.submodule_frame(phi, psi, N, tol=1.0)
        x = bidisc.defect_projection(phi, psi, N)
        vals, vecs = np.linalg.eigh(x)
        yield CheckResult("defect_projection", label, subspace_gap(vecs[:, vals > 0.5], s.basis), 1e-8)
        if phi.degree == 0 or psi.degree == 0:
            cert = certify_rank(phi, psi, N, buffer, tol, trials, seed)
            yield CheckResult("certify_rank", label, 0.0 if cert.verdict == "rank_eq_1" else math.inf, 1.0)
            continue
        e, et = bidisc.e_frames(phi, psi, N)
        yield CheckResult("e_frames", label, subspace_gap(et.basis, bidisc.e_tilde_by_complement(phi, psi, N).basis), 1e-8)
        z, w = bidisc.compressed_pair(e)
        zb, wb = bidisc.block_formula_pair(phi, psi, N)
        yield CheckResult("compressed_pair", label, float(max(np.abs(z - zb).max(), np.abs(w - wb).max())), 1e-8)
        cz, cw = bidisc.compressed_pair(bidisc.quotient_frame(phi, psi, N))
        yield CheckResult("doubly_commuting", label, float(np.abs(cz @ cw.conj().T - cw.conj().T @ cz).max()), 1e-8)
        iso, pair = 0.0, 0.0
        P, Q = max_pairing_shift(phi, psi, N, buffer)
        for i in range(trials):
            xi = random_tilted(phi.degree, psi.degree, seed, i)
            eta = witness(phi, psi, xi, N, s_sign)
            iso = max(iso, abs(eta.norm() - xi.norm()))
            pair = max(pair, pairing_check(phi, psi, tilde_vector(phi, psi, xi, N), eta, P, Q, buffer))
        yield CheckResult("witness_isometry", label, iso, 1e-10)
        yield CheckResult("bilinear_vanishing", label, bilinear_vanishing(phi, psi, N, P, Q, buffer, s_sign), tol)
        yield CheckResult("pairing_check", label, pair, 1e-10)
        cert = certify_rank(phi, psi, N, buffer, tol, trials, seed)
        links = cert.lemma_links if len(cert.lemma_links) == 2 else (math.inf,)
        yield CheckResult("lemma_links", label, max(links), tol)
        yield CheckResult("certify_rank", label, 0.0 if cert.verdict == "rank_eq_2" else math.inf, 1.0)
