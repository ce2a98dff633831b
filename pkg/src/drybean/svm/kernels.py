from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drybean.errors import InputError

KINDS = ("linear", "polynomial", "rbf", "sigmoid")
KIND_CODES = {name: i for i, name in enumerate(KINDS)}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus how gamma is chosen.

    ``gamma`` is ``"scale"``, ``"auto"`` or a positive number.
    """

    kind: str = "rbf"
    gamma: str | float = "scale"
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise InputError(f"unknown kernel {self.kind!r}; expected one of {KINDS}")
        if isinstance(self.gamma, str):
            if self.gamma not in ("scale", "auto"):
                raise InputError(f"gamma must be 'scale', 'auto' or a number, got {self.gamma!r}")
        elif not float(self.gamma) > 0:
            raise InputError("fixed gamma must be positive")
        if int(self.degree) < 1:
            raise InputError("polynomial degree must be >= 1")

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def uses_gamma(self) -> bool:
        return self.kind != "linear"


def resolve_gamma(spec: KernelSpec, X) -> float:
    """Numeric gamma: ``auto`` is 1/n_features, ``scale`` is 1/(n_features * var(X))
    with the population variance pooled over every entry of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        raise InputError("cannot resolve gamma on empty data")
    n_features = X.shape[1]
    if spec.gamma == "auto":
        return 1.0 / n_features
    if spec.gamma == "scale":
        var = float(X.var())
        if var == 0.0:
            raise InputError("gamma='scale' undefined for zero-variance data")
        return 1.0 / (n_features * var)
    return float(spec.gamma)


def kernel_eval(spec: KernelSpec, gamma: float, x, z) -> float:
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise InputError(f"dimension mismatch: {x.shape} vs {z.shape}")
    if spec.kind == "linear":
        return float(x @ z)
    if spec.kind == "rbf":
        diff = x - z
        return float(np.exp(-gamma * (diff @ diff)))
    if spec.kind == "polynomial":
        return float((gamma * (x @ z) + spec.coef0) ** spec.degree)
    return float(np.tanh(gamma * (x @ z) + spec.coef0))


def kernel_matrix(spec: KernelSpec, gamma: float, A, B) -> np.ndarray:
    """K[i, j] = k(A[i], B[j]), vectorized."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise InputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]} features")
    dots = A @ B.T
    if spec.kind == "linear":
        return dots
    if spec.kind == "rbf":
        na = (A * A).sum(axis=1)[:, None]
        nb = (B * B).sum(axis=1)[None, :]
        sq = np.maximum(na + nb - 2.0 * dots, 0.0)
        # the expansion cancels badly for nearby points; redo those pairs directly
        close = np.nonzero(sq <= 1e-8 * (na + nb))
        if close[0].size:
            diff = A[close[0]] - B[close[1]]
            sq[close] = (diff * diff).sum(axis=1)
        return np.exp(-gamma * sq)
    if spec.kind == "polynomial":
        return (gamma * dots + spec.coef0) ** spec.degree
    return np.tanh(gamma * dots + spec.coef0)
