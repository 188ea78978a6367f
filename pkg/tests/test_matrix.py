import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irs_isac.matrix import (InvalidInputError, herm_part, hermitian_eig, is_psd, min_eig, psd_factor, realify,
                             sample_complex_gaussian, unrealify)

from conftest import rand_herm, rand_psd

PAULI_Y = np.array([[0, -1j], [1j, 0]])


def test_identity_spectrum():
    np.testing.assert_allclose(hermitian_eig(np.eye(3)).values, [1, 1, 1])


def test_known_two_by_two_spectrum():
    np.testing.assert_allclose(hermitian_eig(PAULI_Y).values, [-1, 1], atol=1e-15)


def test_random_reconstruction(rng):
    A = rand_herm(rng, 6)
    e = hermitian_eig(A)
    np.testing.assert_allclose(e.vectors @ np.diag(e.values) @ e.vectors.conj().T, A, atol=1e-10)
    assert np.all(np.diff(e.values) >= 0)


def test_non_hermitian_rejected():
    with pytest.raises(InvalidInputError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(InvalidInputError):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(InvalidInputError):
        hermitian_eig(np.array([[np.nan, 0], [0, 1]]))


def test_herm_part_examples(rng):
    np.testing.assert_array_equal(herm_part(np.array([[0, 2], [0, 0]])), [[0, 1], [1, 0]])
    A = rand_herm(rng, 4)
    np.testing.assert_array_equal(herm_part(A), A)


def test_herm_part_trace_identity(rng):
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    X = rand_herm(rng, 5)
    H = herm_part(A)
    np.testing.assert_allclose(H, H.conj().T)
    assert np.trace(H @ X).real == pytest.approx(np.real(np.trace(A @ X)), abs=1e-12)


def test_realify_examples():
    np.testing.assert_array_equal(realify(np.eye(3)), np.eye(6))
    expected = [[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]
    np.testing.assert_array_equal(realify(PAULI_Y), expected)


def test_realify_trace_identity(rng):
    A, X = rand_herm(rng, 5), rand_herm(rng, 5)
    lhs = np.trace(realify(A) @ realify(X))
    assert lhs == pytest.approx(2 * np.trace(A @ X).real, abs=1e-12)
    np.testing.assert_allclose(unrealify(realify(A)), A, atol=1e-15)


def test_psd_tolerance():
    assert is_psd(np.diag([1.0, -1e-12]))
    assert not is_psd(np.diag([1.0, -1e-3]))


def test_zero_covariance_gives_zero(rng):
    np.testing.assert_array_equal(sample_complex_gaussian(np.zeros((3, 3)), rng), np.zeros(3))


def test_sample_covariance_converges():
    r = sample_complex_gaussian(np.eye(4), np.random.default_rng(0), size=100_000)
    S = r.T @ r.conj() / r.shape[0]
    assert np.linalg.norm(S - np.eye(4)) <= 0.05 * np.linalg.norm(np.eye(4))


def test_sampling_is_deterministic(rng):
    cov = rand_psd(rng, 4)
    a = sample_complex_gaussian(cov, np.random.default_rng(7), size=3)
    b = sample_complex_gaussian(cov, np.random.default_rng(7), size=3)
    assert a.tobytes() == b.tobytes()


def test_psd_factor_rejects_indefinite():
    with pytest.raises(InvalidInputError):
        psd_factor(np.diag([1.0, -0.5]))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_eig_residual_property(n, seed):
    A = rand_herm(np.random.default_rng(seed), n)
    e = hermitian_eig(A)
    res = np.linalg.norm(A @ e.vectors - e.vectors * e.values)
    assert res <= 1e-10 * max(1.0, np.linalg.norm(A))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), rank=st.integers(0, 8), seed=st.integers(0, 2**32 - 1))
def test_realify_keeps_min_eigenvalue(n, rank, seed):
    rng = np.random.default_rng(seed)
    A = rand_psd(rng, n, min(rank, n)) - 0.3 * np.eye(n)
    assert min_eig(realify(A)) == pytest.approx(min_eig(A), abs=1e-10)
