from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from drybean.errors import InputError


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray  # fold id per row
    seed: object
    stratified: bool = True

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def splits(self):
        for f in range(self.k):
            yield self.train_rows(f), self.test_rows(f)

    def to_csv(self) -> str:
        return "row,fold\n" + "".join(f"{i},{f}\n" for i, f in enumerate(self.assignments))


def stratified_kfold(labels, k: int, seed) -> FoldPlan:
    """Shuffle each class with ``seed`` and deal its rows round-robin to folds.

    The dealing position carries over from one class to the next, so fold
    sizes also stay within one row of each other.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise InputError("k must be >= 2")
    present, counts = np.unique(labels, return_counts=True)
    if counts.size == 0 or k > counts.min():
        raise InputError(f"k={k} exceeds the smallest class count ({counts.min() if counts.size else 0})")
    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.shape[0], dtype=np.int64)
    offset = 0
    for cls in present:
        rows = np.flatnonzero(labels == cls)
        rows = rows[rng.permutation(rows.size)]
        assignments[rows] = (offset + np.arange(rows.size)) % k
        offset = (offset + rows.size) % k
    return FoldPlan(k, assignments, seed, True)
