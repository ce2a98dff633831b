"""Regression trees grown by exact greedy search on second-order statistics.

For a node with gradient sum G and hessian sum H, a split into (L, R) scores

    gain = 1/2 * [G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda) - G^2 / (H + lambda)]

and a leaf predicts -G / (H + lambda).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

LEAF = -1


@dataclass(frozen=True)
class RegressionTree:
    feature: np.ndarray  # split feature per node, LEAF for leaves
    threshold: np.ndarray  # rows with x < threshold go left
    left: np.ndarray
    right: np.ndarray
    weight: np.ndarray  # leaf output (0 on internal nodes)
    columns_used: tuple[int, ...] = ()

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature == LEAF))

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            if self.feature[node] == LEAF:
                best = max(best, d)
            else:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _predict(X, self.feature, self.threshold, self.left, self.right, self.weight)


def presort(X: np.ndarray) -> np.ndarray:
    """Row order per feature (feature-major), computed once per training matrix."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


@njit(cache=True, nogil=True)
def _predict(X, feature, threshold, left, right, weight):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = weight[node]
    return out


@njit(cache=True, nogil=True)
def _grow(X, grad, hess, sorted_idx, columns, max_depth, reg_lambda, min_child_weight):
    n = X.shape[0]
    n_cand = columns.shape[0]
    order = np.empty((n_cand, n), dtype=np.int64)
    for c in range(n_cand):
        order[c, :] = sorted_idx[columns[c], :]
    buf = np.empty(n, dtype=np.int64)
    goes_left = np.zeros(n, dtype=np.bool_)
    row_leaf = np.zeros(n, dtype=np.int64)

    cap = 2 * n + 1
    if max_depth < 30:
        cap = min(cap, 2 ** (max_depth + 1) - 1)
    feature = -np.ones(cap, dtype=np.int64)
    threshold = np.zeros(cap)
    left = -np.ones(cap, dtype=np.int64)
    right = -np.ones(cap, dtype=np.int64)
    weight = np.zeros(cap)

    # breadth-first queue of (node, start, end, depth)
    q_node = np.empty(cap, dtype=np.int64)
    q_start = np.empty(cap, dtype=np.int64)
    q_end = np.empty(cap, dtype=np.int64)
    q_depth = np.empty(cap, dtype=np.int64)
    q_node[0] = 0
    q_start[0] = 0
    q_end[0] = n
    q_depth[0] = 0
    head = 0
    tail = 1
    n_nodes = 1

    while head < tail:
        node = q_node[head]
        start = q_start[head]
        end = q_end[head]
        depth = q_depth[head]
        head += 1

        G = 0.0
        H = 0.0
        for p in range(start, end):
            r = order[0, p]
            G += grad[r]
            H += hess[r]
        weight[node] = -G / (H + reg_lambda)
        for p in range(start, end):
            row_leaf[order[0, p]] = node
        if depth >= max_depth or end - start < 2:
            continue

        parent_score = G * G / (H + reg_lambda)
        best_gain = 0.0
        best_c = -1
        best_thr = 0.0
        for c in range(n_cand):
            f = columns[c]
            GL = 0.0
            HL = 0.0
            for p in range(start, end - 1):
                r = order[c, p]
                GL += grad[r]
                HL += hess[r]
                x_here = X[r, f]
                x_next = X[order[c, p + 1], f]
                if x_here < x_next:
                    HR = H - HL
                    if HL >= min_child_weight and HR >= min_child_weight:
                        GR = G - GL
                        sl = GL * GL / (HL + reg_lambda)
                        sr = GR * GR / (HR + reg_lambda)
                        gain = 0.5 * (sl + sr - parent_score)
                        # gains equal up to rounding count as ties so the earliest candidate wins
                        if gain > best_gain + 1e-12 * (sl + sr + parent_score):
                            best_gain = gain
                            best_c = c
                            thr = 0.5 * (x_here + x_next)
                            if thr <= x_here:
                                thr = x_next
                            best_thr = thr
        if best_c < 0:
            continue

        f = columns[best_c]
        n_left = 0
        for p in range(start, end):
            r = order[0, p]
            goes_left[r] = X[r, f] < best_thr
            if goes_left[r]:
                n_left += 1
        # stable partition of every feature's ordering
        for c in range(n_cand):
            lo = start
            hi = start + n_left
            for p in range(start, end):
                r = order[c, p]
                if goes_left[r]:
                    buf[lo] = r
                    lo += 1
                else:
                    buf[hi] = r
                    hi += 1
            for p in range(start, end):
                order[c, p] = buf[p]

        feature[node] = f
        threshold[node] = best_thr
        weight[node] = 0.0
        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        left[node] = lchild
        right[node] = rchild
        q_node[tail] = lchild
        q_start[tail] = start
        q_end[tail] = start + n_left
        q_depth[tail] = depth + 1
        tail += 1
        q_node[tail] = rchild
        q_start[tail] = start + n_left
        q_end[tail] = end
        q_depth[tail] = depth + 1
        tail += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), weight[:n_nodes].copy(), row_leaf)


def build_tree(
    X,
    grad,
    hess,
    columns,
    max_depth: int,
    reg_lambda: float = 1.0,
    min_child_weight: float = 1.0,
    sorted_idx: np.ndarray | None = None,
) -> tuple[RegressionTree, np.ndarray]:
    """Grow one tree on the candidate ``columns``.

    Returns the tree and each training row's leaf weight.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    grad = np.ascontiguousarray(grad, dtype=np.float64)
    hess = np.ascontiguousarray(hess, dtype=np.float64)
    if grad.shape != (X.shape[0],) or hess.shape != (X.shape[0],):
        raise ValueError("grad and hess need one entry per row")
    if sorted_idx is None:
        sorted_idx = presort(X)
    cols = np.array(sorted(int(c) for c in columns), dtype=np.int64)
    feature, threshold, left, right, weight, row_leaf = _grow(
        X, grad, hess, sorted_idx, cols, int(max_depth), float(reg_lambda), float(min_child_weight)
    )
    tree = RegressionTree(feature, threshold, left, right, weight, tuple(int(c) for c in cols))
    return tree, weight[row_leaf]
