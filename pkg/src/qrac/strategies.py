"""Explicit RAC strategies and the bases they are built from.

Bases are unitary matrices whose *columns* are the basis vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, UnsupportedDimensionError, ValidationError
from .linalg import hermitian_eig
from .rac import RacSetting, Strategy, all_tuples, decoding_sums, setting_from_measurements


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, int(p**0.5) + 1))


def weyl_generators(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Shift ``X|k> = |k+1 mod d>`` and clock ``Z|k> = w^k |k>``, ``w = exp(2 pi i/d)``."""
    if d < 2:
        raise ValidationError(f"d must be >= 2, got {d}")
    X = np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z


def fourier_basis(d: int) -> np.ndarray:
    """Columns ``F[j, k] = exp(2 pi i jk/d)/sqrt(d)``."""
    if d < 2:
        raise ValidationError(f"d must be >= 2, got {d}")
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def basis_projectors(basis: np.ndarray) -> np.ndarray:
    """Rank-1 projective POVM ``|v_k><v_k|`` for each column ``v_k``, shape ``(d, d, d)``."""
    B = np.asarray(basis, dtype=np.complex128)
    return np.einsum("ik,jk->kij", B, B.conj())


def is_orthonormal_basis(basis: np.ndarray, atol: float = 1e-10) -> bool:
    B = np.asarray(basis)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        return False
    return bool(np.abs(B.conj().T @ B - np.eye(B.shape[0])).max() <= atol)


def _fix_phases(basis: np.ndarray) -> np.ndarray:
    mags = np.abs(basis)
    first = np.argmax(mags > 1e-12, axis=0)
    lead = basis[first, np.arange(basis.shape[1])]
    return basis * (np.abs(lead) / lead).conj()


def xz_eigenbasis(d: int, m: int) -> np.ndarray:
    """Eigenbasis of ``X Z^m`` in closed form.

    ``X Z^m |l> = w^{ml} |l+1>`` gives eigenvectors with components
    ``c_l = mu^{-l} w^{m l(l-1)/2}``, where ``mu^d = w^{m d(d-1)/2}``.
    """
    l = np.arange(d)
    roots = np.exp(2j * np.pi * (m * (d - 1) / 2 + np.arange(d)) / d)
    chirp = np.exp(2j * np.pi * m * l * (l - 1) / (2 * d))
    B = chirp[:, None] * roots[None, :] ** (-l[:, None]) / np.sqrt(d)
    return _fix_phases(B)


@dataclass(frozen=True)
class MubFamily:
    dim: int
    bases: tuple[np.ndarray, ...]

    def overlaps(self) -> np.ndarray:
        """``|<u|v>|^2`` for every pair of distinct bases, stacked."""
        out = [np.abs(a.conj().T @ b) ** 2
               for i, a in enumerate(self.bases) for b in self.bases[i + 1:]]
        return np.array(out)


def mub_bases(d: int, count: int) -> MubFamily:
    """Computational basis followed by the eigenbases of ``X Z^(k-1)``, ``k = 1..d``."""
    if not _is_prime(d):
        raise UnsupportedDimensionError(f"MUB construction requires prime d, got {d}")
    if not 2 <= count <= d + 1:
        raise ValidationError(f"count must lie in [2, {d + 1}], got {count}")
    bases = [np.eye(d, dtype=np.complex128)]
    bases += [xz_eigenbasis(d, m) for m in range(count - 1)]
    return MubFamily(d, tuple(bases))


def optimal_states_for_measurements(measurements: np.ndarray) -> np.ndarray:
    """Projector onto the leading eigenvector of ``sum_y M[y, x_y]`` for every ``x``.

    Degenerate leading eigenvalues resolve to the first eigenvector returned by
    :func:`qrac.linalg.hermitian_eig`; no mixing.
    """
    setting = setting_from_measurements(measurements)
    vecs = hermitian_eig(decoding_sums(measurements, setting)).eigenvectors[..., 0]
    return np.einsum("ki,kj->kij", vecs, vecs.conj())


def n2_optimal_strategy(d: int) -> Strategy:
    """Computational + Fourier decoding with Weyl-Heisenberg encodings of ``|0> + F|0>``."""
    X, Z = weyl_generators(d)
    F = fourier_basis(d)
    psi = np.zeros(d, dtype=np.complex128)
    psi[0] = 1.0
    psi = psi + F[:, 0]
    psi /= np.linalg.norm(psi)

    setting = RacSetting(2, d, d)
    states = np.empty((d * d, d, d), dtype=np.complex128)
    for k, (x1, x2) in enumerate(all_tuples(setting)):
        v = np.linalg.matrix_power(X, x1) @ np.linalg.matrix_power(Z, x2) @ psi
        states[k] = np.outer(v, v.conj())
    meas = np.stack([basis_projectors(np.eye(d)), basis_projectors(F)])
    return Strategy(setting, states, meas)


_PAULIS = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=np.complex128)


def bloch_state(r) -> np.ndarray:
    return 0.5 * (np.eye(2) + np.einsum("a,aij->ij", np.asarray(r, dtype=float), _PAULIS))


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.einsum("aij,ji->a", _PAULIS, rho).real


def cube_strategy_322() -> Strategy:
    """Pauli X, Y, Z measurements; state for ``x`` has Bloch vector ``(-1)^x / sqrt(3)``."""
    setting = RacSetting(3, 2, 2)
    signs = (-1.0) ** all_tuples(setting)
    states = np.stack([bloch_state(s / np.sqrt(3)) for s in signs])
    eye = np.eye(2)
    meas = np.stack([[0.5 * (eye + P), 0.5 * (eye - P)] for P in _PAULIS])
    return Strategy(setting, states, meas)


def mub_strategy(n: int, d: int) -> Strategy:
    """First ``n`` bases of :func:`mub_bases` with best-response encodings."""
    if not 2 <= n <= d + 1:
        raise ValidationError(f"n must lie in [2, d+1] = [2, {d + 1}], got {n}")
    family = mub_bases(d, n)
    meas = np.stack([basis_projectors(B) for B in family.bases])
    return Strategy(RacSetting(n, d, d), optimal_states_for_measurements(meas), meas)


def mub_triple_products(e: np.ndarray, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``<e_j|f_k><f_k|g_l><g_l|e_j> + <e_j|g_l><g_l|f_k><f_k|e_j>`` indexed ``[j, k, l]``."""
    e, f, g = (np.asarray(b, dtype=np.complex128) for b in (e, f, g))
    if not (e.shape == f.shape == g.shape) or e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise ValidationError(f"bases must be square and equal-sized, got {e.shape}, {f.shape}, {g.shape}")
    ef = e.conj().T @ f
    fg = f.conj().T @ g
    ge = g.conj().T @ e
    forward = np.einsum("jk,kl,lj->jkl", ef, fg, ge)
    backward = np.einsum("jl,lk,kj->jkl", ge.T.conj(), fg.T.conj(), ef.T.conj())
    total = forward + backward
    if np.abs(total.imag).max() >= 1e-12:
        raise NumericError("triple products are not real", float(np.abs(total.imag).max()))
    return total.real
