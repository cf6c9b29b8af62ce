"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Functions that
accept a single matrix also accept a stack ``(..., k, k)`` where noted.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NotPSDError, NumericError, ValidationError

HERMITIAN_ATOL = 1e-12
PSD_REJECT = 1e-6
RANK_RTOL = 1e-10


class EigDecomposition(NamedTuple):
    """Eigenvalues in descending order and matching unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array or raise :class:`ValidationError`."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ValidationError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def hermitian_residual(a: np.ndarray) -> float:
    """Largest entry of ``|A - A^dagger|`` over a matrix or stack."""
    a = np.asarray(a)
    return float(np.abs(a - np.swapaxes(a, -1, -2).conj()).max())


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        return False
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    return hermitian_residual(a) <= atol * scale


def _check_hermitian(a, atol: float) -> np.ndarray:
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2] or arr.shape[-1] == 0:
        raise ValidationError(f"expected square matrices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    if not is_hermitian(arr, atol):
        raise ValidationError(
            f"matrix is not Hermitian (max |A - A^dagger| = {hermitian_residual(arr):.3e})"
        )
    return arr


def hermitian_eig(a, atol: float = HERMITIAN_ATOL) -> EigDecomposition:
    """Full spectral decomposition of a Hermitian matrix (or a stack of them).

    Eigenvalues come back in descending order. Ties keep the solver's
    ascending-index order, and each eigenvector is rotated so that its
    first non-negligible component is real and positive. The result is
    deterministic for a fixed input.
    """
    arr = _check_hermitian(a, atol)
    herm = 0.5 * (arr + np.swapaxes(arr, -1, -2).conj())
    try:
        w, v = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Hermitian eigensolver did not converge: {exc}", float("inf")) from exc

    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)

    mags = np.abs(v)
    first = np.argmax(mags > 1e-12 * mags.max(axis=-2, keepdims=True), axis=-2)
    lead = np.take_along_axis(v, first[..., None, :], axis=-2)
    v = v * (np.abs(lead) / lead).conj()
    return EigDecomposition(w, v)


def operator_norm(a) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    w = hermitian_eig(a).eigenvalues
    return float(np.abs(w).max())


def frobenius_norm(a) -> float:
    arr = np.asarray(a, dtype=np.complex128)
    return float(np.sqrt(np.sum(arr.real**2 + arr.imag**2)))


def matrix_sqrt_psd(a) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Slightly negative eigenvalues are clipped to zero; anything below ``-1e-6`` is
    rejected with :class:`NotPSDError`.
    """
    w, v = hermitian_eig(a)
    lowest = float(w.min())
    if lowest < -PSD_REJECT:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {lowest:.3e})", lowest)
    root = np.sqrt(np.clip(w, 0.0, None))
    b = (v * root[..., None, :]) @ np.swapaxes(v, -1, -2).conj()
    return 0.5 * (b + np.swapaxes(b, -1, -2).conj())


def haar_random_pure_states(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent Haar-random pure density matrices, shape ``(count, dim, dim)``."""
    if dim < 1:
        raise ValidationError(f"dimension must be >= 1, got {dim}")
    g = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    outer = np.einsum("ki,kj->kij", g, g.conj())
    return outer / np.trace(outer, axis1=1, axis2=2).real[:, None, None]


def haar_random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Projector onto ``g/|g|`` with ``g`` a vector of standard complex Gaussians."""
    return haar_random_pure_states(1, dim, rng)[0]


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)


def random_trace_zero_hermitian(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Gaussian Hermitian matrix projected onto the trace-zero subspace.

    With ``rank`` given, the spectrum is instead ``rank`` Gaussian values
    shifted to sum to zero, rotated by a random unitary.
    """
    if rank is None:
        h = random_hermitian(dim, rng)
        return h - np.trace(h).real / dim * np.eye(dim)
    if not 2 <= rank <= dim:
        raise ValidationError(f"rank must lie in [2, {dim}], got {rank}")
    spectrum = rng.standard_normal(rank)
    spectrum -= spectrum.mean()
    u = random_unitary(dim, rng)[:, :rank]
    return (u * spectrum) @ u.conj().T


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def numerical_rank(a, rtol: float = RANK_RTOL) -> int:
    w = hermitian_eig(a).eigenvalues
    scale = np.abs(w).max()
    if scale == 0.0:
        return 0
    return int(np.count_nonzero(np.abs(w) > rtol * scale))


def lemma1_check(a) -> tuple[float, float]:
    """Both sides of ``|A|_op <= sqrt((r-1)/r) |A|_F`` for trace-zero Hermitian ``A``.

    ``r`` is the numerical rank (eigenvalues above ``1e-10 * |A|_op``).
    """
    arr = _check_hermitian(a, HERMITIAN_ATOL)
    if arr.ndim != 2:
        raise ValidationError("lemma1_check takes a single matrix")
    trace = np.trace(arr)
    if abs(trace) > 1e-10 * max(1.0, frobenius_norm(arr)):
        raise ValidationError(f"matrix must be trace-zero, got trace {trace.real:.3e}")
    w = hermitian_eig(arr).eigenvalues
    lhs = float(np.abs(w).max())
    if lhs == 0.0:
        raise ValidationError("matrix must be nonzero")
    r = int(np.count_nonzero(np.abs(w) > RANK_RTOL * lhs))
    rhs = float(np.sqrt((r - 1) / r) * frobenius_norm(arr))
    return lhs, rhs
