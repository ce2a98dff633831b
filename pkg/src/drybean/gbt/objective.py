"""Softmax cross-entropy on raw class scores."""

from __future__ import annotations

import numpy as np


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_grad_hess(raw_scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """Per-class gradient p - onehot and diagonal hessian p(1 - p)."""
    raw_scores = np.asarray(raw_scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    p = softmax(raw_scores)
    grad = p.copy()
    grad[np.arange(len(labels)), labels] -= 1.0
    hess = p * (1.0 - p)
    return grad, hess


def log_loss(raw_scores, labels) -> float:
    """Mean negative log-likelihood of the true class."""
    raw_scores = np.asarray(raw_scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    top = raw_scores.max(axis=1)
    lse = top + np.log(np.exp(raw_scores - top[:, None]).sum(axis=1))
    return float(np.mean(lse - raw_scores[np.arange(len(labels)), labels]))
