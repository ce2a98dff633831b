"""Binary soft-margin SVM trained by sequential minimal optimization.

The solver works on the dual

    max  sum(alpha) - 1/2 alpha^T Q alpha,   Q_ij = y_i y_j K(x_i, x_j)
    s.t. 0 <= alpha_i <= C,  sum(alpha_i y_i) = 0

and updates two multipliers per step analytically. Working pairs are chosen
first-order: ``i`` is the worst KKT violator and ``j`` the partner that
maximizes the error gap |E_i - E_j| among multipliers free to move the other
way. Kernel rows are computed lazily into an LRU row cache.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from drybean.errors import InputError
from drybean.svm.kernels import KernelSpec

TAU = 1e-12


@dataclass(frozen=True)
class SvmHyper:
    C: float = 1.0
    kernel: KernelSpec = KernelSpec()
    tol: float = 1e-3
    max_passes: int = 200
    min_updates: int = 1_000_000  # floor on the update budget for small problems
    cache_mb: float = 256.0

    def __post_init__(self):
        if not self.C > 0:
            raise InputError("C must be positive")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_passes < 1:
            raise InputError("max_passes must be >= 1")
        if self.min_updates < 0:
            raise InputError("min_updates must be >= 0")


@dataclass(frozen=True)
class BinarySolution:
    alpha: np.ndarray  # one multiplier per training row
    bias: float
    iterations: int
    converged: bool
    gap: float  # final maximal KKT violation

    def decision(self, K_rows: np.ndarray, y: np.ndarray) -> np.ndarray:
        """f(x) for kernel rows K(x, X_train)."""
        return K_rows @ (self.alpha * y) + self.bias


@njit(cache=True, nogil=True)
def _kernel_value(X, i, j, kind, gamma, coef0, degree):
    s = 0.0
    if kind == 2:
        for f in range(X.shape[1]):
            d = X[i, f] - X[j, f]
            s += d * d
        return math.exp(-gamma * s)
    for f in range(X.shape[1]):
        s += X[i, f] * X[j, f]
    if kind == 0:
        return s
    if kind == 1:
        return (gamma * s + coef0) ** degree
    return math.tanh(gamma * s + coef0)


@njit(cache=True, nogil=True)
def _fetch_row(X, i, kind, gamma, coef0, degree, rows, slot_of, owner, stamp, state):
    # state[0] = clock, state[1] = slots in use
    state[0] += 1
    s = slot_of[i]
    if s >= 0:
        stamp[s] = state[0]
        return s
    if state[1] < rows.shape[0]:
        s = state[1]
        state[1] += 1
    else:
        s = 0
        for t in range(1, rows.shape[0]):
            if stamp[t] < stamp[s]:
                s = t
        slot_of[owner[s]] = -1
    owner[s] = i
    slot_of[i] = s
    stamp[s] = state[0]
    for j in range(X.shape[0]):
        rows[s, j] = _kernel_value(X, i, j, kind, gamma, coef0, degree)
    return s


@njit(cache=True, nogil=True)
def _smo_solve(X, y, C, kind, gamma, coef0, degree, tol, max_iter, cache_rows):
    n = X.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.empty(n)
    for t in range(n):
        diag[t] = _kernel_value(X, t, t, kind, gamma, coef0, degree)

    rows = np.empty((cache_rows, n))
    slot_of = -np.ones(n, dtype=np.int64)
    owner = -np.ones(cache_rows, dtype=np.int64)
    stamp = np.zeros(cache_rows, dtype=np.int64)
    state = np.zeros(2, dtype=np.int64)

    it = 0
    converged = False
    gap = np.inf
    while True:
        gmax = -np.inf
        gmin = np.inf
        i = -1
        j = -1
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > gmax:
                    gmax = v
                    i = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if v < gmin:
                    gmin = v
                    j = t
        gap = gmax - gmin
        if i < 0 or j < 0 or gap < tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1

        si = _fetch_row(X, i, kind, gamma, coef0, degree, rows, slot_of, owner, stamp, state)
        sj = _fetch_row(X, j, kind, gamma, coef0, degree, rows, slot_of, owner, stamp, state)
        kij = rows[si, j]
        old_i = alpha[i]
        old_j = alpha[j]

        if y[i] != y[j]:
            quad = diag[i] + diag[j] - 2.0 * kij
            if quad <= 0:
                quad = TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai = old_i + delta
            aj = old_j + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * kij
            if quad <= 0:
                quad = TAU
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai = old_i - delta
            aj = old_j + delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if ai < 0:
                    ai = 0.0
                    aj = total

        alpha[i] = ai
        alpha[j] = aj
        di = (ai - old_i) * y[i]
        dj = (aj - old_j) * y[j]
        for t in range(n):
            grad[t] += y[t] * (rows[si, t] * di + rows[sj, t] * dj)

    return alpha, grad, it, converged, gap


def _bias(alpha, grad, y, C) -> float:
    values = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(values[free].mean())
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    hi = values[up].max() if up.any() else values.max()
    lo = values[low].min() if low.any() else values.min()
    return float((hi + lo) / 2)


def smo_train_binary(X, y, hyper: SvmHyper, gamma: float) -> BinarySolution:
    """Solve one binary problem; ``y`` holds +1/-1 labels.

    Stops when the maximal KKT violation drops below ``hyper.tol``. After
    ``max(max_passes * n, min_updates)`` pair updates without reaching it, returns the current
    iterate with ``converged=False`` and a warning.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise InputError("X must be 2-D with one label per row")
    if not np.all(np.abs(y) == 1):
        raise InputError("binary labels must be +1 or -1")
    if not ((y > 0).any() and (y < 0).any()):
        raise InputError("both classes must be present")
    n = X.shape[0]
    cache_rows = int(min(n, max(2, hyper.cache_mb * 2**20 // (8 * n))))
    spec = hyper.kernel
    alpha, grad, it, converged, gap = _smo_solve(
        X, y, float(hyper.C), spec.code, float(gamma), float(spec.coef0), int(spec.degree),
        float(hyper.tol), max(int(hyper.max_passes) * n, int(hyper.min_updates)), cache_rows,
    )
    if not converged:
        warnings.warn(f"SMO stopped after {it} updates with KKT gap {gap:.3g}", RuntimeWarning, stacklevel=2)
    return BinarySolution(alpha, _bias(alpha, grad, y, hyper.C), int(it), bool(converged), float(gap))


def dual_objective(alpha, y, K) -> float:
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)
