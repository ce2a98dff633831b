"""One-vs-one multiclass SVM built from binary SMO machines."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from drybean.dataset import Dataset
from drybean.errors import FormatError, InputError
from drybean.svm.kernels import KernelSpec, kernel_matrix, resolve_gamma
from drybean.svm.smo import SvmHyper, smo_train_binary

MODEL_FORMAT = "drybean-svm"
MODEL_VERSION = 1


@dataclass(frozen=True)
class PairMachine:
    """Decision function for classes ``(positive, negative)``.

    ``sv_index`` points into ``SvmModel.support_vectors``; ``dual_coef`` holds
    alpha_i * y_i with y = +1 for the positive (lower id) class.
    """

    positive: int
    negative: int
    sv_index: np.ndarray
    dual_coef: np.ndarray
    bias: float
    converged: bool = True
    iterations: int = 0


@dataclass(frozen=True)
class SvmModel:
    class_ids: tuple[int, ...]
    kernel: KernelSpec
    gamma: float
    C: float
    support_vectors: np.ndarray
    machines: tuple[PairMachine, ...] = field(default_factory=tuple)

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.machines)


def _fit_pair(X, y, a, b, hyper, gamma):
    rows = np.flatnonzero((y == a) | (y == b))
    signs = np.where(y[rows] == a, 1.0, -1.0)
    sol = smo_train_binary(X[rows], signs, hyper, gamma)
    support = np.flatnonzero(sol.alpha > 0)
    return rows[support], sol.alpha[support] * signs[support], sol


def fit_svm(X, y, hyper: SvmHyper, jobs: int = 1) -> SvmModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise InputError("SVM training needs at least 2 classes")
    gamma = resolve_gamma(hyper.kernel, X)
    pairs = list(combinations(classes, 2))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: _fit_pair(X, y, p[0], p[1], hyper, gamma), pairs))
    else:
        results = [_fit_pair(X, y, a, b, hyper, gamma) for a, b in pairs]

    used = np.unique(np.concatenate([r[0] for r in results]))
    position = {int(r): k for k, r in enumerate(used)}
    machines = []
    for (a, b), (rows, coef, sol) in zip(pairs, results):
        idx = np.array([position[int(r)] for r in rows], dtype=np.int64)
        machines.append(PairMachine(a, b, idx, coef, sol.bias, sol.converged, sol.iterations))
    return SvmModel(classes, hyper.kernel, gamma, hyper.C, X[used].copy(), tuple(machines))


def svm_train(d: Dataset, hyper: SvmHyper, jobs: int = 1) -> SvmModel:
    return fit_svm(d.features, d.labels, hyper, jobs)


def decision_values(m: SvmModel, X) -> np.ndarray:
    """Pairwise decision values, one column per machine."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.n_features:
        raise InputError(f"model expects {m.n_features} features")
    out = np.empty((X.shape[0], len(m.machines)))
    for start in range(0, X.shape[0], 1024):
        K = kernel_matrix(m.kernel, m.gamma, X[start:start + 1024], m.support_vectors)
        for k, mach in enumerate(m.machines):
            out[start:start + 1024, k] = K[:, mach.sv_index] @ mach.dual_coef + mach.bias
    return out


def svm_predict(m: SvmModel, X) -> np.ndarray:
    """Majority vote over pairwise machines.

    Ties go to the class with the larger summed |decision value| over the
    votes it won, then to the lowest class id.
    """
    dec = decision_values(m, X)
    n = dec.shape[0]
    pos = {c: k for k, c in enumerate(m.class_ids)}
    votes = np.zeros((n, len(m.class_ids)), dtype=np.int64)
    strength = np.zeros((n, len(m.class_ids)))
    for k, mach in enumerate(m.machines):
        f = dec[:, k]
        win_pos = f > 0
        for cls, mask in ((mach.positive, win_pos), (mach.negative, ~win_pos)):
            votes[mask, pos[cls]] += 1
            strength[mask, pos[cls]] += np.abs(f[mask])
    best = np.empty(n, dtype=np.int64)
    for r in range(n):
        top = np.flatnonzero(votes[r] == votes[r].max())
        if top.size > 1:
            s = strength[r, top]
            top = top[s == s.max()]
        best[r] = m.class_ids[top[0]]
    return best


# ---------------------------------------------------------------------------
# serialization


def model_to_json(m: SvmModel) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kernel": {
            "kind": m.kernel.kind,
            "gamma": m.kernel.gamma,
            "degree": m.kernel.degree,
            "coef0": m.kernel.coef0,
        },
        "gamma": m.gamma,
        "C": m.C,
        "class_ids": list(m.class_ids),
        "support_vectors": m.support_vectors.tolist(),
        "machines": [
            {
                "positive": mach.positive,
                "negative": mach.negative,
                "sv_index": mach.sv_index.tolist(),
                "dual_coef": mach.dual_coef.tolist(),
                "bias": mach.bias,
                "converged": mach.converged,
                "iterations": mach.iterations,
            }
            for mach in m.machines
        ],
    }
    return json.dumps(doc)


def model_from_json(text: str) -> SvmModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid SVM model file: {exc.msg}", exc.lineno) from None
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise FormatError(f"not a {MODEL_FORMAT} v{MODEL_VERSION} model")
    k = doc["kernel"]
    spec = KernelSpec(k["kind"], k["gamma"], k["degree"], k["coef0"])
    machines = tuple(
        PairMachine(
            mach["positive"], mach["negative"],
            np.array(mach["sv_index"], dtype=np.int64),
            np.array(mach["dual_coef"], dtype=np.float64),
            mach["bias"], mach["converged"], mach["iterations"],
        )
        for mach in doc["machines"]
    )
    sv = np.array(doc["support_vectors"], dtype=np.float64)
    return SvmModel(tuple(doc["class_ids"]), spec, doc["gamma"], doc["C"], sv, machines)
