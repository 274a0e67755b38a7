import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyrank import bidisc
from hardyrank.bidisc import TiltedCoefficients
from hardyrank.blaschke import BlaschkeProduct
from hardyrank.errors import PreconditionError, WindowOverflowError, ZeroInputError
from hardyrank.linalg import coverage
from hardyrank.rank_engine import (
    bilinear_vanishing,
    certify_rank,
    compress_semi_invariant,
    krylov_span,
    max_pairing_shift,
    module_generators,
    pairing_check,
    random_tilted,
    semi_invariant_compression,
    single_generator_deficiency,
    tilde_vector,
    witness,
    witness_coefficients,
)

z = BlaschkeProduct.monomial
N = 32
DEG2 = (BlaschkeProduct((0.5, -0.3)), BlaschkeProduct((0.2j, 0.4)))


def monomial_set(n, basis):
    """Indices of the coordinate vectors spanned by a coordinate-subspace basis."""
    d = np.real(np.diag(basis @ basis.conj().T))
    assert np.all((np.abs(d) < 1e-12) | (np.abs(d - 1) < 1e-12))
    return {divmod(k, n + 1) for k in np.flatnonzero(d > 0.5)}


# ---- krylov / coverage


def test_krylov_from_constant():
    n, w = 6, 4
    basis, rep = krylov_span(bidisc.shift_pair(n), np.eye((n + 1) ** 2)[:, 0], w)
    assert monomial_set(n, basis) == {(i, j) for i in range(n + 1) for j in range(n + 1) if i + j <= w}
    assert rep.spanned_dim == 15


def test_krylov_z_w_generators():
    n, m = 16, 12
    basis, rep = krylov_span(
        bidisc.shift_pair(n), module_generators(z(1), z(1), n), 2 * m, max_degrees=(m, m),
        target=bidisc.submodule_window_frame(z(1), z(1), n, m).basis,
    )
    window = {(i, j) for i in range(m + 1) for j in range(m + 1)} - {(0, 0)}
    assert window <= monomial_set(n, basis)
    assert rep.coverage_residual < 1e-10


def test_krylov_empty_generators():
    basis, rep = krylov_span(bidisc.shift_pair(4), np.zeros((25, 0)), 3)
    assert basis.shape[1] == 0 and rep.spanned_dim == 0


def test_krylov_monotone_in_generators():
    n = 10
    ops = bidisc.shift_pair(n)
    gens = module_generators(*DEG2, n)
    _, one = krylov_span(ops, gens[:, :1], 6)
    _, two = krylov_span(ops, gens, 6)
    assert two.spanned_dim >= one.spanned_dim


def test_coverage_extremes():
    e = np.eye(6)
    assert coverage(e[:, :3], e[:, :2]) < 1e-12
    assert coverage(e[:, :3], e[:, 3:]) == pytest.approx(1.0)


# ---- witness


def test_witness_hand_example():
    xi = TiltedCoefficients(np.array([[1.0]]), np.array([[2j]]))
    eta = witness_coefficients(z(1), z(1), xi, 16)
    np.testing.assert_allclose(eta.A, [[-2j]], atol=1e-15)
    np.testing.assert_allclose(eta.B, [[-1]], atol=1e-15)
    x, e = tilde_vector(z(1), z(1), xi, 16), witness(z(1), z(1), xi, 16)
    assert abs(x.inner(e)) < 1e-15
    assert pairing_check(z(1), z(1), x, e, 4, 4, buffer=4) < 1e-12


def test_witness_rejects_bad_input():
    with pytest.raises(ZeroInputError):
        witness(z(1), z(1), TiltedCoefficients(np.zeros((1, 1)), np.zeros((1, 1))), 16)
    with pytest.raises(ValueError, match=r"\(2, 1\)"):
        witness(z(2), z(1), TiltedCoefficients(np.ones((1, 1)), np.ones((1, 1))), 16)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_witness_isometric_and_antilinear(seed, alpha, beta):
    phi, psi = DEG2
    x1, x2 = random_tilted(2, 2, seed, 0), random_tilted(2, 2, seed, 1)
    e1 = witness_coefficients(phi, psi, x1, N).flat
    e2 = witness_coefficients(phi, psi, x2, N).flat
    assert abs(np.linalg.norm(e1) - x1.norm()) < 1e-10
    combo = TiltedCoefficients.from_flat(alpha * x1.flat + beta * x2.flat, 2, 2)
    if combo.norm() > 0:
        got = witness_coefficients(phi, psi, combo, N).flat
        np.testing.assert_allclose(got, np.conj(alpha) * e1 + np.conj(beta) * e2, atol=1e-12)


def test_pairing_checks_degree_two():
    phi, psi = DEG2
    P, Q = max_pairing_shift(phi, psi, N, 8)
    basis_xi = TiltedCoefficients.from_flat(np.eye(8)[0], 2, 2)
    x = tilde_vector(phi, psi, basis_xi, N)
    assert pairing_check(phi, psi, x, witness(phi, psi, basis_xi, N), P, Q) < 1e-10
    # negative control: pairing xi with itself
    assert pairing_check(phi, psi, x, x, P, Q) >= x.norm() ** 2 - 1e-12
    with pytest.raises(WindowOverflowError):
        pairing_check(phi, psi, x, x, P + 1, Q)


def test_bilinear_vanishing_examples():
    assert bilinear_vanishing(z(1), z(1), 16, 4, 4, buffer=4) < 1e-12
    assert bilinear_vanishing(z(2), z(1), N, *max_pairing_shift(z(2), z(1), N, 8)) < 1e-10
    phi, psi = DEG2
    P, Q = max_pairing_shift(phi, psi, N, 8)
    assert bilinear_vanishing(phi, psi, N, P, Q) < 1e-8
    assert bilinear_vanishing(phi, psi, N, P, Q, s_sign=1) >= 0.5


def test_bilinear_implies_sampled():
    phi, psi = DEG2
    P, Q = max_pairing_shift(phi, psi, N, 8)
    assert bilinear_vanishing(phi, psi, N, P, Q) < 1e-8
    for trial in range(10):
        xi = random_tilted(2, 2, 7, trial)
        # |<z^p w^q xi, eta_xi>| <= sum |xi_i||xi_j| |sym G_ij| <= ||xi||_1^2 * max
        bound = 1e-8 * np.abs(xi.flat).sum() ** 2
        assert pairing_check(phi, psi, tilde_vector(phi, psi, xi, N), witness(phi, psi, xi, N), P, Q) < bound


# ---- deficiency


def test_deficiency_z_w_is_right_angle():
    xi = TiltedCoefficients(np.array([[0.3 - 1j]]), np.array([[2.0]]))
    assert single_generator_deficiency(z(1), z(1), xi, 16) == pytest.approx(90.0)


@pytest.mark.parametrize("scale", [1e-3, -2.0, 1j, 7 + 3j])
def test_deficiency_scale_invariant(scale):
    phi, psi = DEG2
    xi = random_tilted(2, 2, 0, 3)
    scaled = TiltedCoefficients(scale * xi.A, scale * xi.B)
    a = single_generator_deficiency(phi, psi, xi, N)
    assert single_generator_deficiency(phi, psi, scaled, N) == pytest.approx(a, abs=1e-9)
    assert a > 45


def test_random_tilted_is_order_independent():
    a = random_tilted(2, 3, 5, 9)
    b = random_tilted(2, 3, 5, 9)
    np.testing.assert_array_equal(a.flat, b.flat)
    assert not np.allclose(a.flat, random_tilted(2, 3, 5, 8).flat)


# ---- semi-invariant compression


def test_compression_trivial_case_reduces_to_coverage():
    n = 8
    ops = bidisc.shift_pair(n)
    full = np.eye((n + 1) ** 2, dtype=complex)
    rep = semi_invariant_compression(
        ops, full, np.zeros(((n + 1) ** 2, 0)), full[:, :1], 1e-8, max_total_degree=2 * n
    )
    assert rep.coverage_residual < 1e-12
    assert rep.spanned_dim == (n + 1) ** 2


def test_compression_rejects_non_invariant_pair():
    n = 6
    ops = bidisc.shift_pair(n)
    full = np.eye((n + 1) ** 2, dtype=complex)
    not_invariant = full[:, 1:2]  # span{w} is not invariant
    with pytest.raises(PreconditionError, match="invariance"):
        compress_semi_invariant(ops, full, not_invariant, full[:, :1], 1e-8, max_total_degree=4)


# ---- certificate


def test_certify_small_examples():
    cert = certify_rank(z(1), z(1), 16, trials=10)
    assert cert.verdict == "rank_eq_2"
    trivial = certify_rank(BlaschkeProduct(()), z(1), 16, trials=10)
    assert trivial.verdict == "rank_eq_1"
    assert trivial.upper.coverage_residual == 0
    assert len(trivial.upper_generators) == 1
    with pytest.raises(ValueError):
        certify_rank(z(2), z(1), 10)


def test_certify_json_schema():
    cert = certify_rank(z(1), BlaschkeProduct((0.5,)), 24, trials=5)
    doc = json.loads(cert.to_json())
    assert set(doc) == {"phi", "psi", "n", "buffer", "tol", "upper", "lower", "verdict", "seed", "claim"}
    assert set(doc["upper"]) == {"generators", "spanned_dim", "target_dim", "residual"}
    assert set(doc["lower"]) == {"bilinear_max", "trials", "min_deficiency_angle_deg", "lemma_links"}
    assert doc["verdict"] == "rank_eq_2" and "N=24" in doc["claim"]


def test_certify_rank_eq_2_with_mixed_degrees():
    cert = certify_rank(BlaschkeProduct((0.5,)), z(2), N, trials=10)
    assert cert.verdict == "rank_eq_2"


def test_certify_symmetric_and_phase_invariant():
    phi, psi = BlaschkeProduct((0.5,)), BlaschkeProduct((0.2j, -0.4))
    base = certify_rank(phi, psi, 24, trials=10)
    swapped = certify_rank(psi, phi, 24, trials=10)
    rotated = certify_rank(BlaschkeProduct(phi.zeros, 1j), BlaschkeProduct(psi.zeros, -1), 24, trials=10)
    for other in (swapped, rotated):
        assert other.verdict == base.verdict == "rank_eq_2"
        for a, b in ((base.upper.coverage_residual, other.upper.coverage_residual), (base.bilinear_max, other.bilinear_max)):
            assert max(a, b) < 1e-8


def test_inconclusive_when_tolerance_unreachable():
    cert = certify_rank(BlaschkeProduct((0.5,)), z(1), 24, tol=1e-30, trials=5)
    assert cert.verdict == "inconclusive"
    assert "no rank claim" in cert.claim
