"""Dense complex matrix helpers shared by the solver and the relaxation code."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-9


@dataclass(frozen=True)
class HermEig:
    values: np.ndarray  # ascending, real
    vectors: np.ndarray  # orthonormal columns


def as_square(A, name: str = "A") -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def check_hermitian(A, rtol: float = HERMITIAN_RTOL, name: str = "A") -> np.ndarray:
    A = as_square(A, name)
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.linalg.norm(A - A.conj().T) > rtol * scale:
        raise InvalidInputError(f"{name} is not Hermitian")
    return A


def herm_part(A) -> np.ndarray:
    """Return (A + A^H) / 2."""
    A = as_square(A)
    return 0.5 * (A + A.conj().T)


def hermitian_eig(A) -> HermEig:
    """Full spectral decomposition of a Hermitian matrix, eigenvalues ascending."""
    A = check_hermitian(A)
    values, vectors = np.linalg.eigh(herm_part(A))
    return HermEig(values=values, vectors=vectors)


def min_eig(A) -> float:
    return float(np.linalg.eigvalsh(herm_part(A))[0])


def psd_floor(A) -> float:
    """Most negative eigenvalue tolerated before A counts as indefinite."""
    return -PSD_RTOL * max(1.0, abs(float(np.trace(A).real)))


def is_psd(A) -> bool:
    A = as_square(A)
    return min_eig(A) >= psd_floor(A)


def realify(A) -> np.ndarray:
    """Real symmetric embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian A.

    For Hermitian A and X, tr(realify(A) realify(X)) = 2 tr(A X); callers that
    solve complex programs through this map halve their coefficient matrices.
    """
    A = as_square(A)
    re, im = A.real, A.imag
    return np.block([[re, -im], [im, re]])


def unrealify(Y) -> np.ndarray:
    """Inverse of `realify` that also projects a general symmetric 2n x 2n
    matrix onto the embedded subspace (averaging the two copies).

    The projection keeps PSD-ness and every trace against a realified
    coefficient, so it is safe to apply to real SDP solutions.
    """
    Y = as_square(Y, "Y")
    if Y.shape[0] % 2:
        raise InvalidInputError("embedded matrix must have even dimension")
    n = Y.shape[0] // 2
    re = 0.5 * (Y[:n, :n] + Y[n:, n:])
    im = 0.5 * (Y[n:, :n] - Y[:n, n:])
    X = re + 1j * im
    return herm_part(X)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) draws."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def psd_factor(cov) -> np.ndarray:
    """Return F with F F^H = cov, after clipping solver-noise negative eigenvalues."""
    cov = check_hermitian(cov, rtol=1e-9, name="cov")
    eig = np.linalg.eigh(herm_part(cov))
    if eig.eigenvalues[0] < psd_floor(cov):
        raise InvalidInputError("covariance is indefinite beyond tolerance")
    lam = np.clip(eig.eigenvalues, 0.0, None)
    # round-off eigenvalues would add sqrt(eps)-sized noise to every draw
    lam[lam <= lam.size * np.finfo(float).eps * lam[-1]] = 0.0
    return eig.eigenvectors * np.sqrt(lam)


def sample_complex_gaussian(cov, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw r ~ CN(0, cov).

    Returns one vector when ``size`` is None, otherwise a (size, n) array whose
    rows are independent draws.
    """
    F = psd_factor(cov)
    n = F.shape[0]
    z = complex_normal(rng, (1 if size is None else size, n))
    r = z @ F.T
    return r[0] if size is None else r
