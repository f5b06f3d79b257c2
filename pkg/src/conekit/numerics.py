"""Scalar-generic dense linear algebra and FFT services.

Everything here works on real or complex 2-d (or 1-d, for the DFT) numpy
arrays and never promotes the scalar field behind the caller's back: real
input stays real, complex stays complex.  Inner products follow the
convention that is antilinear in the first argument,

    <u, v>   = u* v           (``np.vdot``)
    <A, B>_F = trace(A* B)    (same, after flattening)

so ``re_inner`` is the real Euclidean inner product of the underlying
real vector space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError

DEFAULT_TRUNC_TOL = 1e-10


def inner(u, v):
    """``<u, v>`` with the antilinear-first convention (matrices flatten)."""
    return np.vdot(u, v)


def re_inner(u, v):
    """Real part of ``<u, v>``."""
    return float(np.real(np.vdot(u, v)))


def _check_finite_matrix(X, name="X"):
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ArgumentError(f"{name} must be a non-empty 2-d array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return X


@dataclass(frozen=True)
class SvdFactors:
    """Economy SVD factors ``X ~ U @ diag(sigma) @ V*``.

    ``sigma`` is nonincreasing and truncated so that the discarded tail has
    Frobenius norm at most ``trunc_tol * max(1, ||X||_F)``; ``U`` is
    ``n1 x r`` and ``V`` is ``n2 x r`` with orthonormal columns.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    trunc_tol: float

    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    def compose(self) -> np.ndarray:
        """Multiply the factors back together."""
        if self.rank == 0:
            return np.zeros((self.U.shape[0], self.V.shape[0]), dtype=self.U.dtype)
        return (self.U * self.sigma) @ self.V.conj().T

    def uv_star(self) -> np.ndarray:
        """The polar-like factor ``U V*`` (useful as a nuclear-norm subgradient)."""
        return self.U @ self.V.conj().T


def svd(X, trunc_tol: float = DEFAULT_TRUNC_TOL) -> SvdFactors:
    """Economy SVD with tail truncation.

    The retained rank is the smallest ``r`` such that the discarded
    singular values satisfy ``sqrt(sum_i>r sigma_i^2) <= trunc_tol *
    max(1, ||X||_F)``, which makes the reconstruction bound exact rather
    than a per-value heuristic.
    """
    X = _check_finite_matrix(X)
    if trunc_tol < 0:
        raise ArgumentError("trunc_tol must be nonnegative")
    try:
        U, s, Vh = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - backend dependent
        raise NumericError(f"SVD did not converge: {exc}") from exc
    cutoff = trunc_tol * max(1.0, float(np.linalg.norm(X)))
    # tail norms: tails[r] = ||sigma[r:]||_2
    tails = np.sqrt(np.concatenate([np.cumsum(s[::-1] ** 2)[::-1], [0.0]]))
    r = int(np.searchsorted(-tails, -cutoff))  # smallest r with tails[r] <= cutoff
    return SvdFactors(
        U=np.ascontiguousarray(U[:, :r]),
        sigma=np.ascontiguousarray(s[:r]),
        V=np.ascontiguousarray(Vh[:r].conj().T),
        trunc_tol=float(trunc_tol),
    )


def singular_values(X) -> np.ndarray:
    X = _check_finite_matrix(X)
    try:
        return np.linalg.svd(X, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError(f"SVD did not converge: {exc}") from exc


def nuclear_norm(X) -> float:
    """Sum of singular values."""
    return float(singular_values(X).sum())


def spectral_norm(X) -> float:
    """Largest singular value."""
    return float(singular_values(X)[0])


def frobenius_norm(X) -> float:
    return float(np.linalg.norm(np.asarray(X)))


def _check_vector(v):
    v = np.asarray(v)
    if v.ndim != 1 or v.size < 1:
        raise ArgumentError(f"expected a vector of length >= 1, got shape {v.shape}")
    return v


def unitary_dft(v) -> np.ndarray:
    """Apply the normalized (unitary) DFT matrix: ``F v = fft(v) / sqrt(L)``."""
    v = _check_vector(v)
    return np.fft.fft(v) / np.sqrt(v.size)


def inverse_unitary_dft(v) -> np.ndarray:
    """Inverse of :func:`unitary_dft`: ``F* v = ifft(v) * sqrt(L)``."""
    v = _check_vector(v)
    return np.fft.ifft(v) * np.sqrt(v.size)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric complex normal with unit variance, E|z|^2 = 1.

    Real and imaginary parts are independent N(0, 1/2); the real block is
    drawn before the imaginary block so that streams regenerate bit-exactly.
    """
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)
