import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import support
from starcert.linalg import (
    check_density,
    check_state_vector,
    hermitian,
    hs_inner,
    is_psd,
    kron,
    maximally_entangled,
    min_eigpair,
    partial_trace,
    schmidt_decompose,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_kron_matches_index_formula():
    got = kron(SIGMA_X, SIGMA_Z)
    assert np.allclose(got, support.brute_kron(SIGMA_X, SIGMA_Z), atol=1e-15)


def test_kron_random_against_oracle(rng):
    for _ in range(100):
        a = support.random_hermitian(rng, int(rng.integers(1, 4)))
        b = support.random_hermitian(rng, int(rng.integers(1, 4)))
        assert np.allclose(kron(a, b), support.brute_kron(a, b), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.floats(-3, 3, allow_nan=False),
    beta=st.floats(-3, 3, allow_nan=False),
    seed=st.integers(0, 10_000),
)
def test_kron_bilinearity(alpha, beta, seed):
    r = np.random.default_rng(seed)
    a = support.random_hermitian(r, 2)
    b = support.random_hermitian(r, 2)
    c = support.random_hermitian(r, 3)
    lhs = kron(alpha * a + beta * b, c)
    rhs = alpha * kron(a, c) + beta * kron(b, c)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_partial_trace_product_state(rng):
    rho_a = support.random_density(rng, 2)
    rho_b = support.random_density(rng, 3)
    joint = kron(rho_a, rho_b)
    assert np.allclose(partial_trace(joint, 2, 3, keep="B"), rho_b, atol=1e-12)
    assert np.allclose(partial_trace(joint, 2, 3, keep="A"), rho_a, atol=1e-12)


def test_partial_trace_maximally_entangled():
    psi = maximally_entangled(2)
    rho = np.outer(psi, psi.conj())
    assert np.allclose(partial_trace(rho, 2, 2, keep="B"), np.eye(2) / 2, atol=1e-12)


def test_partial_trace_random_against_oracle(rng):
    for _ in range(100):
        da = int(rng.integers(2, 4))
        db = int(rng.integers(2, 4))
        m = support.random_hermitian(rng, da * db)
        for keep in ("A", "B"):
            got = partial_trace(m, da, db, keep=keep)
            want = support.brute_partial_trace(m, da, db, keep)
            assert np.allclose(got, want, atol=1e-12)
        assert abs(np.trace(partial_trace(m, da, db, keep="A")) - np.trace(m)) < 1e-12


def test_partial_trace_kron_identity(rng):
    for _ in range(100):
        a = support.random_hermitian(rng, 2)
        b = support.random_hermitian(rng, 3)
        got = partial_trace(kron(a, b), 2, 3, keep="B")
        assert np.allclose(got, np.trace(a) * b, atol=1e-12)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace(np.eye(5), 2, 2, keep="A")


def test_schmidt_product_state():
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0  # |0>|1>
    dec = schmidt_decompose(psi, 2, 2)
    assert dec.rank == 1
    assert np.allclose(dec.coefficients[:1], [1.0], atol=1e-12)


def test_schmidt_maximally_entangled():
    dec = schmidt_decompose(maximally_entangled(2), 2, 2)
    assert dec.rank == 2
    assert np.allclose(dec.coefficients, [1 / np.sqrt(2)] * 2, atol=1e-12)


def test_schmidt_reconstruction(rng):
    for da in (2, 3):
        for db in (2, 3):
            for _ in range(100):
                psi = rng.normal(size=da * db) + 1j * rng.normal(size=da * db)
                psi = psi / np.linalg.norm(psi)
                dec = schmidt_decompose(psi, da, db)
                rebuilt = dec.state()
                # equality up to a global phase
                phase = np.vdot(rebuilt, psi)
                assert abs(abs(phase) - 1) < 1e-10
                assert np.linalg.norm(rebuilt * phase / abs(phase) - psi) < 1e-10
                # coefficients against an independent SVD
                sv = np.linalg.svd(psi.reshape(da, db), compute_uv=False)
                assert np.allclose(sv, dec.coefficients, atol=1e-10)


def test_schmidt_rank_of_maximally_entangled():
    for d in (2, 3, 4, 5):
        assert schmidt_decompose(maximally_entangled(d), d, d).rank == d


def test_min_eigpair_identity_tiebreak():
    lam, v = min_eigpair(np.eye(3))
    assert lam == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(v, [1, 0, 0], atol=1e-12)


def test_min_eigpair_diagonal():
    lam, v = min_eigpair(np.diag([3.0, -2.0, 5.0]))
    assert lam == pytest.approx(-2.0, abs=1e-12)
    assert np.allclose(v, [0, 1, 0], atol=1e-12)


def test_min_eigpair_rayleigh_oracle(rng):
    for _ in range(100):
        h = support.random_hermitian(rng, 6)
        lam, v = min_eigpair(h)
        assert np.linalg.norm(h @ v - lam * v) <= 1e-9 * max(1.0, np.linalg.norm(h))
        for _ in range(10):
            u = rng.normal(size=6) + 1j * rng.normal(size=6)
            u = u / np.linalg.norm(u)
            assert lam <= np.vdot(u, h @ u).real + 1e-9


def test_min_eigpair_thousand_rayleigh_samples(rng):
    h = support.random_hermitian(rng, 6)
    lam, _ = min_eigpair(h)
    for _ in range(1000):
        u = rng.normal(size=6) + 1j * rng.normal(size=6)
        u = u / np.linalg.norm(u)
        assert lam <= np.vdot(u, h @ u).real + 1e-9


def test_min_eigpair_degenerate_tensor_case():
    h = kron(np.eye(2), np.diag([0.0, 1.0]))
    lam, v = min_eigpair(h)
    assert lam == pytest.approx(0.0, abs=1e-12)
    # minimal eigenspace is span{|00>, |10>}; the canonical pick is |00>
    assert np.allclose(v, [1, 0, 0, 0], atol=1e-12)


def test_min_eigpair_rejects_non_hermitian():
    with pytest.raises(ValueError):
        min_eigpair(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_is_psd_examples():
    assert is_psd(np.eye(2), 1e-8)
    assert not is_psd(np.diag([1.0, -1e-3]), 1e-8)
    assert is_psd((np.eye(2) + SIGMA_X) / 2, 1e-8)


def test_hermitian_symmetrizes_and_rejects():
    h = np.array([[1.0, 1e-13], [0.0, 2.0]])
    sym = hermitian(h)
    assert np.allclose(sym, sym.conj().T)
    with pytest.raises(ValueError):
        hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_maximally_entangled_amplitudes():
    assert np.allclose(maximally_entangled(2),
                       [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)], atol=1e-15)
    phi3 = maximally_entangled(3)
    want = np.zeros(9)
    want[[0, 4, 8]] = 1 / np.sqrt(3)
    assert np.allclose(phi3, want, atol=1e-15)
    with pytest.raises(ValueError):
        maximally_entangled(1)


def test_check_density_and_state_vector(rng):
    rho = support.random_density(rng, 3)
    assert np.allclose(check_density(rho), rho)
    with pytest.raises(ValueError):
        check_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        check_state_vector(np.array([1.0, 1.0]))


def test_hs_inner_is_real_for_hermitian(rng):
    a = support.random_hermitian(rng, 3)
    b = support.random_hermitian(rng, 3)
    val = hs_inner(a, b)
    assert abs(val.imag) < 1e-12
    assert val.real == pytest.approx(np.trace(a @ b).real, abs=1e-12)
