"""Cyclic Jacobi eigenvalues for small dense symmetric matrices.

Rotations are scheduled in round-robin (tournament) order: each round pairs
every index with exactly one other, so the n/2 rotations of a round commute
and are applied at once as a single orthogonal similarity.  This lets one
call diagonalize a whole stack of matrices ``(..., n, n)``.
"""

from __future__ import annotations

import numpy as np

MAX_RANK = 8
SYM_TOL = 1e-10


def _rounds(n):
    """Round-robin pairings of range(n); a dummy index pads odd n."""
    players = list(range(n + (n % 2)))
    k = len(players)
    out = []
    for _ in range(k - 1):
        pairs = [(players[i], players[k - 1 - i]) for i in range(k // 2)]
        pairs = [(min(p), max(p)) for p in pairs if max(p) < n]
        out.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return out


def check_symmetric(A, tol=SYM_TOL):
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    defect = np.max(np.abs(A - np.swapaxes(A, -1, -2)), initial=0.0)
    if defect > tol:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {defect:.3g})")
    return A


def jacobi_eigvalsh(A, tol=1e-15, max_sweeps=60):
    """Eigenvalues (ascending) of symmetric ``A`` with shape (..., n, n)."""
    A = check_symmetric(A)
    n = A.shape[-1]
    if n > MAX_RANK:
        raise ValueError(f"rank {n} exceeds the supported maximum {MAX_RANK}")
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    if n == 1:
        return A[..., 0, :].copy()
    batch = A.shape[:-2]
    A = A.reshape((-1, n, n)).copy()
    rounds = _rounds(n)
    scale = np.maximum(np.sqrt(np.sum(A**2, axis=(-1, -2))), np.finfo(float).tiny)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(A[:, off_mask] ** 2, axis=-1))
        if np.all(off <= tol * scale):
            break
        for p, q in rounds:
            app = A[:, p, p]
            aqq = A[:, q, q]
            apq = A[:, p, q]
            live = np.abs(apq) > 0.0
            safe = np.where(live, apq, 1.0)
            # a denormal apq overflows theta; t -> 0 is then the right limit
            with np.errstate(over="ignore", divide="ignore"):
                theta = (aqq - app) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            t = np.where(live, t, 0.0)
            c = 1.0 / np.sqrt(t**2 + 1.0)
            s = t * c
            J = np.broadcast_to(np.eye(n), A.shape).copy()
            J[:, p, p] = c
            J[:, q, q] = c
            J[:, p, q] = s
            J[:, q, p] = -s
            A = np.swapaxes(J, -1, -2) @ A @ J
            A = 0.5 * (A + np.swapaxes(A, -1, -2))
    w = np.sort(np.diagonal(A, axis1=-2, axis2=-1), axis=-1)
    return w.reshape(batch + (n,))


def eigen_extremes(A):
    """(lambda_min, lambda_max) of a symmetric matrix or stack of matrices."""
    w = jacobi_eigvalsh(A)
    return w[..., 0], w[..., -1]
