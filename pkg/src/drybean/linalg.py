"""Dense covariance and a cyclic Jacobi eigensolver for symmetric matrices.

Matrices are plain 2-D float64 numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drybean.errors import InputError, NumericalError

MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]


def as_matrix(X) -> np.ndarray:
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise InputError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    return A


def covariance(X) -> np.ndarray:
    """Population covariance (divide by n) of the columns of ``X``."""
    X = as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise InputError("covariance needs at least 2 rows")
    # shifting by the first row keeps identical rows exactly zero after centering
    shifted = X - X[0]
    centered = shifted - shifted.mean(axis=0)
    C = centered.T @ centered / n
    return (C + C.T) / 2


def symmetric_eigen(A, tol: float = 1e-12) -> EigenDecomposition:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs until the largest off-diagonal magnitude is
    below ``tol`` (scaled by the Frobenius norm when that exceeds 1). Each
    eigenvector is sign-flipped so its largest-magnitude entry is positive.
    """
    A = as_matrix(A)
    n, m = A.shape
    if n != m:
        raise InputError(f"matrix must be square, got {A.shape}")
    asym = np.max(np.abs(A - A.T))
    if asym > 1e-10 * max(1.0, np.max(np.abs(A))):
        raise InputError(f"matrix is not symmetric (max asymmetry {asym:.3g})")

    a = (A + A.T) / 2
    v = np.eye(n)
    bound = tol * max(1.0, np.linalg.norm(a))

    for _ in range(MAX_SWEEPS + 1):
        off = np.abs(a - np.diag(np.diag(a)))
        if n == 1 or off.max() < bound:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app, aqq = a[p, p], a[q, q]
                # below the rounding level of both diagonals: annihilate without rotating
                g = 100.0 * abs(apq)
                if abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NumericalError(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = v[:, order]
    for k in range(n):
        col = vectors[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            vectors[:, k] = -col
    return EigenDecomposition(values, vectors)
