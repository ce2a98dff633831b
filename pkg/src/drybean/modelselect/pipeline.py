"""Preprocessing modes and model fitting for candidate hyperparameters.

``paper-faithful`` runs scaler, z-filter and PCA once on the whole dataset
before any split. ``leakage-free`` refits them on every training split and
never filters test rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from drybean.dataset import Dataset
from drybean.errors import InputError
from drybean.gbt import GbtHyper, fit_gbt, staged_raw_scores
from drybean.preprocess import (
    OutlierReport,
    PcaModel,
    ScalerParams,
    pca_fit,
    pca_transform,
    scaler_apply,
    scaler_fit,
    zscore_filter,
)
from drybean.svm import KernelSpec, SvmHyper, fit_svm, svm_predict

log = logging.getLogger(__name__)

MODES = ("paper-faithful", "leakage-free")
PIPELINE_KEYS = ("n_components",)
MODEL_KEYS = {
    "svm": ("C", "kernel", "gamma", "degree", "coef0", "tol", "max_passes"),
    "gbt": ("n_estimators", "learning_rate", "colsample_bytree", "max_depth", "reg_lambda", "min_child_weight"),
}


@dataclass(frozen=True)
class PreprocessConfig:
    z_threshold: float = 3.0
    z_ddof: int = 0
    z_inclusive: bool = False
    variance_threshold: float = 0.9999


def filter_dataset(d: Dataset, cfg: PreprocessConfig) -> tuple[Dataset, OutlierReport]:
    return zscore_filter(d, cfg.z_threshold, cfg.z_ddof, cfg.z_inclusive)


@dataclass(frozen=True)
class PreparedData:
    dataset: Dataset  # PCA scores of the filtered rows
    filtered: Dataset  # filtered rows in original units
    scaler: ScalerParams
    outliers: OutlierReport
    pca: PcaModel


def prepare_paper_faithful(d: Dataset, cfg: PreprocessConfig) -> PreparedData:
    """Fit scaler on all rows, drop per-class z outliers, scale, project onto PCA axes."""
    scaler = scaler_fit(d.features, d.feature_names)
    filtered, report = filter_dataset(d, cfg)
    scaled = scaler_apply(scaler, filtered.features)
    pca = pca_fit(scaled, cfg.variance_threshold, d.feature_names)
    scores = pca_transform(pca, scaled)
    names = tuple(f"PC{k + 1}" for k in range(pca.n_components))
    return PreparedData(filtered.with_features(scores, names), filtered, scaler, report, pca)


@dataclass(frozen=True)
class FoldPreprocess:
    scaler: ScalerParams
    pca: PcaModel
    kept_rows: np.ndarray  # training rows surviving the z-filter
    n_removed: int

    def transform(self, X) -> np.ndarray:
        return pca_transform(self.pca, scaler_apply(self.scaler, X))


def fit_fold_preprocess(train: Dataset, cfg: PreprocessConfig, n_components: int | None = None) -> FoldPreprocess:
    scaler = scaler_fit(train.features, train.feature_names)
    _, report = filter_dataset(train, cfg)
    keep = np.ones(train.n_rows, dtype=bool)
    keep[list(report.removed_row_indices)] = False
    kept = np.flatnonzero(keep)
    scaled = scaler_apply(scaler, train.features[kept])
    if n_components is not None:
        n_components = min(int(n_components), scaled.shape[1])
    pca = pca_fit(scaled, cfg.variance_threshold, train.feature_names, n_components=n_components)
    return FoldPreprocess(scaler, pca, kept, report.n_removed)


def validate_params(kind: str, params: dict) -> None:
    if kind not in MODEL_KEYS:
        raise InputError(f"unknown model kind {kind!r}")
    allowed = set(MODEL_KEYS[kind]) | set(PIPELINE_KEYS)
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise InputError(f"unknown {kind} grid parameters: {', '.join(unknown)}")


def split_params(params: dict) -> tuple[dict, dict]:
    pipe = {k: v for k, v in params.items() if k in PIPELINE_KEYS}
    model = {k: v for k, v in params.items() if k not in PIPELINE_KEYS}
    return pipe, model


def svm_hyper(params: dict) -> SvmHyper:
    gamma = params.get("gamma", "scale")
    if not isinstance(gamma, str):
        gamma = float(gamma)
    spec = KernelSpec(
        kind=str(params.get("kernel", "rbf")),
        gamma=gamma,
        degree=int(params.get("degree", 3)),
        coef0=float(params.get("coef0", 0.0)),
    )
    return SvmHyper(
        C=float(params.get("C", 1.0)),
        kernel=spec,
        tol=float(params.get("tol", 1e-3)),
        max_passes=int(params.get("max_passes", 200)),
    )


def gbt_hyper(params: dict, seed: int) -> GbtHyper:
    return GbtHyper(
        n_estimators=int(params.get("n_estimators", 100)),
        learning_rate=float(params.get("learning_rate", 0.3)),
        colsample_bytree=float(params.get("colsample_bytree", 1.0)),
        max_depth=int(params.get("max_depth", 6)),
        reg_lambda=float(params.get("reg_lambda", 1.0)),
        min_child_weight=float(params.get("min_child_weight", 1.0)),
        seed=int(seed),
    )


def fit_model(kind: str, params: dict, X, y, seed: int, n_classes: int):
    if kind == "svm":
        return fit_svm(X, y, svm_hyper(params))
    return fit_gbt(X, y, gbt_hyper(params, seed), n_classes)


def predict_model(kind: str, model, X) -> np.ndarray:
    if kind == "svm":
        return svm_predict(model, X)
    raw = staged_raw_scores(model, X, [model.n_rounds])[model.n_rounds]
    return np.argmax(raw, axis=1)


def _svm_key(h: SvmHyper):
    spec = h.kernel
    gamma = spec.gamma if spec.uses_gamma else None
    shape = (spec.degree, spec.coef0) if spec.kind in ("polynomial", "sigmoid") else None
    return (h.C, spec.kind, gamma, shape, h.tol, h.max_passes)


def predict_candidates(kind: str, candidates: list[dict], X_train, y_train, X_test, seed: int, n_classes: int) -> list:
    """Test-set predictions for each candidate's model parameters.

    Candidates that describe the same model share one fit: SVMs differing only
    in an unused gamma, and boosters differing only in n_estimators (scored
    from one staged run). A failed fit yields its exception in place of
    predictions.
    """
    results: list = [None] * len(candidates)
    if kind == "svm":
        done: dict = {}
        for i, params in enumerate(candidates):
            try:
                key = _svm_key(svm_hyper(params))
                if key not in done:
                    done[key] = svm_predict(fit_svm(X_train, y_train, svm_hyper(params)), X_test)
                results[i] = done[key]
            except Exception as exc:  # disqualify this candidate only
                log.warning("candidate %s failed: %s", params, exc)
                results[i] = exc
        return results

    groups: dict = {}
    for i, params in enumerate(candidates):
        rest = tuple(sorted((k, v) for k, v in params.items() if k != "n_estimators"))
        groups.setdefault(rest, []).append(i)
    for members in groups.values():
        try:
            rounds = {i: gbt_hyper(candidates[i], seed).n_estimators for i in members}
            longest = dict(candidates[members[0]], n_estimators=max(rounds.values()))
            model = fit_gbt(X_train, y_train, gbt_hyper(longest, seed), n_classes)
            staged = staged_raw_scores(model, X_test, rounds.values())
            for i in members:
                results[i] = np.argmax(staged[rounds[i]], axis=1)
        except Exception as exc:
            log.warning("candidates %s failed: %s", [candidates[i] for i in members], exc)
            for i in members:
                results[i] = exc
    return results
