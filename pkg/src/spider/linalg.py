"""Small dense eigen/singular decompositions via cyclic Jacobi iteration.

Sized for the geometry stack (3x3 models, 9x9 normal matrices); not a
general-purpose solver.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ShapeError

_JACOBI_TOL = 1e-12
_MAX_SWEEPS = 60


def jacobi_eigh(sym: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues descending, eigenvectors as columns). Input must be
    symmetric to ~1e-9; asymmetry is averaged away before iterating.
    """
    a = np.asarray(sym, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"jacobi_eigh expects square matrix, got {a.shape}")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= _JACOBI_TOL * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals)[::-1]
    return eigvals[order], v[:, order]


def smallest_eigvec(sym: np.ndarray) -> np.ndarray:
    """Unit eigenvector for the smallest eigenvalue of a symmetric matrix."""
    _, vecs = jacobi_eigh(sym)
    return vecs[:, -1]


def nullvector(a: np.ndarray) -> np.ndarray:
    """Unit minimizer of ||A x|| over unit x, via the normal matrix."""
    a = np.asarray(a, dtype=np.float64)
    return smallest_eigvec(a.T @ a)


def _complete_basis(cols: list[np.ndarray], dim: int) -> list[np.ndarray]:
    out = list(cols)
    for k in range(dim):
        cand = np.zeros(dim)
        cand[k] = 1.0
        for u in out:
            cand -= np.dot(u, cand) * u
        norm = np.linalg.norm(cand)
        if norm > 1e-8:
            out.append(cand / norm)
        if len(out) == dim:
            break
    return out


def svd3(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD of a square matrix (intended for 3x3): M = U diag(s) Vt."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"svd3 expects a square matrix, got {m.shape}")
    n = m.shape[0]
    lam, v = jacobi_eigh(m.T @ m)
    sig = np.sqrt(np.clip(lam, 0.0, None))
    cutoff = max(sig[0], 1.0e-300) * 1e-13
    ucols: list[np.ndarray] = []
    for i in range(n):
        if sig[i] > cutoff:
            ucols.append((m @ v[:, i]) / sig[i])
    ucols = _complete_basis(ucols, n)
    u = np.stack(ucols[:n], axis=1)
    return u, sig, v.T
