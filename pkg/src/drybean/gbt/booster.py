"""Multiclass gradient boosting with softmax objective."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from drybean.dataset import Dataset
from drybean.errors import FormatError, InputError
from drybean.gbt.objective import log_loss, softmax, softmax_grad_hess
from drybean.gbt.rng import RNG_NAME, XorShift64Star
from drybean.gbt.tree import RegressionTree, build_tree, presort

MODEL_FORMAT = "drybean-gbt"
MODEL_VERSION = 1


@dataclass(frozen=True)
class GbtHyper:
    n_estimators: int = 100
    learning_rate: float = 0.3
    colsample_bytree: float = 1.0
    max_depth: int = 6
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if int(self.n_estimators) < 1:
            raise InputError("n_estimators must be >= 1")
        if not 0 < self.learning_rate <= 1:
            raise InputError("learning_rate must be in (0, 1]")
        if not 0 < self.colsample_bytree <= 1:
            raise InputError("colsample_bytree must be in (0, 1]")
        if int(self.max_depth) < 1:
            raise InputError("max_depth must be >= 1")
        if self.reg_lambda < 0 or self.min_child_weight < 0:
            raise InputError("reg_lambda and min_child_weight must be >= 0")


@dataclass(frozen=True)
class GbtModel:
    trees: tuple[RegressionTree, ...]  # round-major: trees[r * n_classes + k]
    n_classes: int
    n_features: int
    hyper: GbtHyper
    base_score: float = 0.0
    train_loss: tuple[float, ...] = field(default_factory=tuple)  # after each round

    @property
    def n_rounds(self) -> int:
        return len(self.trees) // self.n_classes


def n_sampled_columns(colsample: float, n_features: int) -> int:
    # round() absorbs products like 0.7 * 10 = 7.000000000000001
    return max(1, min(n_features, math.ceil(round(colsample * n_features, 9))))


def tree_seed(seed: int, round_index: int, n_classes: int, k: int) -> int:
    return seed ^ (round_index * n_classes + k)


def fit_gbt(X, y, hyper: GbtHyper, n_classes: int | None = None) -> GbtModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise InputError("X must be 2-D with one label per row")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if np.unique(y).size < 2:
        raise InputError("boosting needs at least 2 classes present")
    n, n_features = X.shape
    sorted_idx = presort(X)
    n_cols = n_sampled_columns(hyper.colsample_bytree, n_features)

    raw = np.full((n, n_classes), 0.0)
    trees: list[RegressionTree] = []
    losses: list[float] = []
    for rnd in range(int(hyper.n_estimators)):
        grad, hess = softmax_grad_hess(raw, y)
        step = np.empty_like(raw)
        for k in range(n_classes):
            if n_cols == n_features:
                cols = range(n_features)
            else:
                cols = XorShift64Star(tree_seed(hyper.seed, rnd, n_classes, k)).sample(n_features, n_cols)
            tree, out = build_tree(
                X, grad[:, k], hess[:, k], cols, hyper.max_depth,
                hyper.reg_lambda, hyper.min_child_weight, sorted_idx,
            )
            trees.append(tree)
            step[:, k] = out
        raw += hyper.learning_rate * step
        losses.append(log_loss(raw, y))
    return GbtModel(tuple(trees), n_classes, n_features, hyper, 0.0, tuple(losses))


def gbt_train(d: Dataset, hyper: GbtHyper) -> GbtModel:
    return fit_gbt(d.features, d.labels, hyper, d.n_classes)


def staged_raw_scores(m: GbtModel, X, rounds) -> dict[int, np.ndarray]:
    """Raw scores after each requested number of rounds, from one pass over the trees."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.n_features:
        raise InputError(f"model expects {m.n_features} features")
    wanted = sorted(set(int(r) for r in rounds))
    if wanted and (wanted[0] < 0 or wanted[-1] > m.n_rounds):
        raise InputError(f"rounds must be within [0, {m.n_rounds}]")
    raw = np.full((X.shape[0], m.n_classes), m.base_score)
    out = {}
    if 0 in wanted:
        out[0] = raw.copy()
    lr = m.hyper.learning_rate
    for rnd in range(wanted[-1] if wanted else 0):
        step = np.empty_like(raw)
        for k in range(m.n_classes):
            step[:, k] = m.trees[rnd * m.n_classes + k].predict(X)
        raw += lr * step
        if rnd + 1 in wanted:
            out[rnd + 1] = raw.copy()
    return out


def gbt_predict(m: GbtModel, X, n_rounds: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Class ids (argmax, lowest id on ties) and softmax probabilities."""
    rounds = m.n_rounds if n_rounds is None else n_rounds
    raw = staged_raw_scores(m, X, [rounds])[rounds]
    return np.argmax(raw, axis=1), softmax(raw)


# ---------------------------------------------------------------------------
# serialization


def model_to_json(m: GbtModel) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "rng": RNG_NAME,
        "hyper": asdict(m.hyper),
        "n_classes": m.n_classes,
        "n_features": m.n_features,
        "base_score": m.base_score,
        "train_loss": list(m.train_loss),
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "weight": t.weight.tolist(),
                "columns_used": list(t.columns_used),
            }
            for t in m.trees
        ],
    }
    return json.dumps(doc)


def model_from_json(text: str) -> GbtModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid GBT model file: {exc.msg}", exc.lineno) from None
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise FormatError(f"not a {MODEL_FORMAT} v{MODEL_VERSION} model")
    trees = tuple(
        RegressionTree(
            np.array(t["feature"], dtype=np.int64),
            np.array(t["threshold"], dtype=np.float64),
            np.array(t["left"], dtype=np.int64),
            np.array(t["right"], dtype=np.int64),
            np.array(t["weight"], dtype=np.float64),
            tuple(t["columns_used"]),
        )
        for t in doc["trees"]
    )
    return GbtModel(
        trees, doc["n_classes"], doc["n_features"], GbtHyper(**doc["hyper"]),
        doc["base_score"], tuple(doc["train_loss"]),
    )
