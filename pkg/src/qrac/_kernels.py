"""Hot inner loops with a numba path and a pure-numpy fallback.

The only kernel that dominates seesaw runtime is the fixed-point iteration
for minimum-error discrimination of an ensemble of unnormalised states
``R_b``::

    T_b   = R_b M_b R_b
    lam   = sum_b T_b
    M_b  <- lam^{-1/2} T_b lam^{-1/2}  (+ off-support completion)

Matrices are tiny (D <= ~10), so numpy's per-call overhead is the bottleneck
and the numba version wins by an order of magnitude.

Set ``QRAC_DISABLE_NUMBA=1`` before import to force the numpy path. Both
implementations are always importable as ``fixed_point_numpy`` and
``fixed_point_numba`` (the latter is ``None`` when numba is missing).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

_FLAG = os.environ.get("QRAC_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG not in ("", "0", "false", "no", "off")

# eigenvalues of lam below this fraction of its largest are treated as zero
SUPPORT_CUTOFF = 1e-12


def fixed_point_numpy(R, M0, max_iters, tol, cutoff=SUPPORT_CUTOFF):
    """Vectorised reference implementation.

    Returns ``(M_best, iterations, residual)`` where ``M_best`` is the iterate
    (including ``M0``) with the largest objective ``sum_b Tr(R_b M_b)``.
    """
    R = np.ascontiguousarray(R, dtype=np.complex128)
    M = np.array(M0, dtype=np.complex128, copy=True)
    d, D, _ = R.shape
    eye = np.eye(D, dtype=np.complex128)

    best = M.copy()
    best_obj = np.einsum("bij,bji->", R, M).real
    residual = np.inf
    iters = 0
    for it in range(max_iters):
        T = R @ M @ R
        lam = T.sum(axis=0)
        lam = 0.5 * (lam + lam.conj().T)
        w, V = np.linalg.eigh(lam)
        wmax = np.abs(w).max()
        keep = w > cutoff * wmax
        s = np.zeros(D)
        s[keep] = 1.0 / np.sqrt(w[keep])
        L = (V * s) @ V.conj().T
        new = L @ T @ L
        new = 0.5 * (new + new.conj().transpose(0, 2, 1))
        new += (eye - new.sum(axis=0)) / d
        residual = np.abs(new - M).max()
        M = new
        iters = it + 1
        obj = np.einsum("bij,bji->", R, M).real
        if obj > best_obj:
            best_obj = obj
            best = M.copy()
        if residual < tol:
            break
    return best, iters, residual


def _fixed_point_loops(R, M0, max_iters, tol, cutoff):
    d = R.shape[0]
    D = R.shape[1]
    M = M0.copy()
    T = np.empty_like(M)
    new = np.empty_like(M)
    eye = np.eye(D).astype(np.complex128)

    best = M.copy()
    best_obj = 0.0
    for b in range(d):
        best_obj += np.trace(R[b] @ M[b]).real
    residual = np.inf
    iters = 0
    for it in range(max_iters):
        lam = np.zeros((D, D), dtype=np.complex128)
        for b in range(d):
            T[b] = R[b] @ M[b] @ R[b]
            lam += T[b]
        lam = 0.5 * (lam + lam.conj().T)
        w, V = np.linalg.eigh(lam)
        wmax = np.max(np.abs(w))
        s = np.zeros(D)
        for i in range(D):
            if w[i] > cutoff * wmax:
                s[i] = 1.0 / np.sqrt(w[i])
        L = (V * s) @ V.conj().T
        total = np.zeros((D, D), dtype=np.complex128)
        for b in range(d):
            tmp = L @ T[b] @ L
            new[b] = 0.5 * (tmp + tmp.conj().T)
            total += new[b]
        fill = (eye - total) / d
        residual = 0.0
        obj = 0.0
        for b in range(d):
            new[b] += fill
            diff = np.max(np.abs(new[b] - M[b]))
            if diff > residual:
                residual = diff
            obj += np.trace(R[b] @ new[b]).real
        M[:] = new
        iters = it + 1
        if obj > best_obj:
            best_obj = obj
            best[:] = M
        if residual < tol:
            break
    return best, iters, residual


if numba is not None:
    _fixed_point_jit = numba.njit(cache=True, nogil=True)(_fixed_point_loops)

    def fixed_point_numba(R, M0, max_iters, tol, cutoff=SUPPORT_CUTOFF):
        """Compiled implementation; same contract as :func:`fixed_point_numpy`."""
        R = np.ascontiguousarray(R, dtype=np.complex128)
        M0 = np.ascontiguousarray(M0, dtype=np.complex128)
        return _fixed_point_jit(R, M0, int(max_iters), float(tol), float(cutoff))
else:  # pragma: no cover
    fixed_point_numba = None

USE_NUMBA = fixed_point_numba is not None and not NUMBA_DISABLED
fixed_point = fixed_point_numba if USE_NUMBA else fixed_point_numpy
BACKEND = "numba" if USE_NUMBA else "numpy"
