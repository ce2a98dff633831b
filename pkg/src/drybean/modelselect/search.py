"""Grid search and nested cross-validation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from drybean.dataset import Dataset
from drybean.errors import DrybeanError, InputError
from drybean.modelselect.folds import FoldPlan, stratified_kfold
from drybean.modelselect.grid import ParamGrid, format_params
from drybean.modelselect.metrics import ConfusionMatrix, Metrics, evaluate
from drybean.modelselect.pipeline import (
    MODES,
    PreprocessConfig,
    fit_fold_preprocess,
    fit_model,
    predict_candidates,
    predict_model,
    prepare_paper_faithful,
    split_params,
    validate_params,
)

log = logging.getLogger(__name__)

AGGREGATED = ("accuracy", "micro_f1", "macro_f1", "micro_recall", "macro_recall")


@dataclass(frozen=True)
class SearchResult:
    best_index: int
    best_params: dict
    best_score: float
    scores: tuple  # mean inner accuracy per candidate, None when disqualified


@dataclass(frozen=True)
class FoldResult:
    index: int
    best_params: dict
    inner_accuracy: float
    metrics: Metrics
    confusion: ConfusionMatrix
    n_train: int
    n_test: int
    candidate_scores: tuple
    extras: dict = field(default_factory=dict)

    def value(self, name: str) -> float:
        return getattr(self.metrics, name)


@dataclass(frozen=True)
class CvReport:
    model_kind: str
    mode: str
    class_names: tuple[str, ...]
    grid: ParamGrid
    folds: tuple[FoldResult, ...]
    config: dict = field(default_factory=dict)
    dataset_info: dict = field(default_factory=dict)

    def mean(self, name: str) -> float:
        return float(np.mean([f.value(name) for f in self.folds]))

    def std(self, name: str) -> float:
        return float(np.std([f.value(name) for f in self.folds]))

    def aggregates(self) -> dict:
        out = {}
        for name in AGGREGATED:
            out[f"{name}_mean"] = self.mean(name)
            out[f"{name}_std"] = self.std(name)
        return out

    def modal_params(self) -> dict:
        """Most frequent best-parameter set across outer folds (earliest fold on ties)."""
        keys = [format_params(f.best_params) for f in self.folds]
        best = max(keys, key=lambda k: (keys.count(k), -keys.index(k)))
        return dict(self.folds[keys.index(best)].best_params)


# ---------------------------------------------------------------------------
# split-level work, runnable in worker processes

_CONTEXT: dict = {}


def _install_context(ctx: dict) -> None:
    _CONTEXT.clear()
    _CONTEXT.update(ctx)


def _split_predictions(ctx, train_rows, test_rows, candidates):
    """Predictions on ``test_rows`` for every candidate trained on ``train_rows``."""
    d: Dataset = ctx["data"]
    kind, mode, cfg, seed = ctx["kind"], ctx["mode"], ctx["cfg"], ctx["seed"]
    results: list = [None] * len(candidates)
    groups: dict = {}
    for i, params in enumerate(candidates):
        pipe, _ = split_params(params)
        groups.setdefault(pipe.get("n_components"), []).append(i)
    for n_components, members in groups.items():
        model_params = [split_params(candidates[i])[1] for i in members]
        try:
            X_tr, y_tr, X_te, _ = _prepare_split(d, train_rows, test_rows, mode, cfg, n_components)
        except DrybeanError as exc:
            for i in members:
                results[i] = exc
            continue
        preds = predict_candidates(kind, model_params, X_tr, y_tr, X_te, seed, d.n_classes)
        for i, p in zip(members, preds):
            results[i] = p
    return results


def _prepare_split(d, train_rows, test_rows, mode, cfg, n_components):
    if mode == "paper-faithful":
        cols = d.n_features if n_components is None else min(int(n_components), d.n_features)
        if n_components is not None and int(n_components) > d.n_features:
            log.warning("n_components=%s exceeds the %d prepared components", n_components, d.n_features)
        X = d.features[:, :cols]
        return X[train_rows], d.labels[train_rows], X[test_rows], None
    train = d.subset(train_rows)
    fp = fit_fold_preprocess(train, cfg, n_components)
    X_tr = fp.transform(train.features[fp.kept_rows])
    return X_tr, train.labels[fp.kept_rows], fp.transform(d.features[test_rows]), fp


def _inner_task(args):
    outer, inner, train_rows, test_rows = args
    ctx = _CONTEXT
    candidates = ctx["candidates"]
    preds = _split_predictions(ctx, train_rows, test_rows, candidates)
    truth = ctx["data"].labels[test_rows]
    scores = []
    for p in preds:
        scores.append(None if isinstance(p, BaseException) else float(np.mean(p == truth)))
    return outer, inner, scores


def _refit_task(args):
    outer, params, train_rows, test_rows = args
    ctx = _CONTEXT
    d: Dataset = ctx["data"]
    pipe, model_params = split_params(params)
    X_tr, y_tr, X_te, fp = _prepare_split(d, train_rows, test_rows, ctx["mode"], ctx["cfg"], pipe.get("n_components"))
    model = fit_model(ctx["kind"], model_params, X_tr, y_tr, ctx["seed"], d.n_classes)
    pred = predict_model(ctx["kind"], model, X_te)
    extras = {"n_fit_rows": int(X_tr.shape[0]), "n_components": int(X_tr.shape[1])}
    if fp is not None:
        extras["n_removed_train"] = fp.n_removed
        extras["scaler_means"] = [float(v) for v in fp.scaler.means]
    if ctx["kind"] == "gbt":
        losses = np.asarray(model.train_loss)
        rises = np.diff(losses)
        extras["final_train_loss"] = float(losses[-1])
        extras["max_loss_increase"] = float(max(0.0, rises.max())) if rises.size else 0.0
        extras["train_loss"] = [float(v) for v in losses]
    else:
        extras["solver_converged"] = bool(model.converged)
        extras["n_support_vectors"] = int(model.support_vectors.shape[0])
    return outer, pred, extras


def _run_map(fn, tasks, ctx, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        _install_context(ctx)
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_install_context, initargs=(ctx,)) as pool:
        return list(pool.map(fn, tasks))


def _pick_best(candidates, fold_scores) -> SearchResult:
    means = []
    for c in range(len(candidates)):
        per_fold = [s[c] for s in fold_scores]
        means.append(None if any(v is None for v in per_fold) else float(np.mean(per_fold)))
    valid = [i for i, m in enumerate(means) if m is not None]
    if not valid:
        raise DrybeanError("every grid candidate failed")
    best = valid[0]
    for i in valid:
        if means[i] > means[best]:
            best = i
    for i, m in enumerate(means):
        if m is None:
            log.warning("candidate %s disqualified", candidates[i])
    return SearchResult(best, dict(candidates[best]), means[best], tuple(means))


def _check_mode(kind, mode, grid):
    if mode not in MODES:
        raise InputError(f"unknown pipeline mode {mode!r}; expected one of {MODES}")
    for params in grid.candidates()[:1]:
        validate_params(kind, params)


def grid_search(
    train: Dataset,
    grid: ParamGrid,
    inner_k: int,
    seed,
    kind: str,
    mode: str = "paper-faithful",
    cfg: PreprocessConfig = PreprocessConfig(),
    model_seed: int = 0,
    jobs: int = 1,
) -> SearchResult:
    """Pick the candidate with the best mean accuracy over stratified folds.

    Ties go to the earliest candidate in enumeration order. Candidates that
    fail on any fold are disqualified rather than aborting the search.
    """
    _check_mode(kind, mode, grid)
    candidates = grid.candidates()
    plan = stratified_kfold(train.labels, inner_k, seed)
    ctx = dict(data=train, kind=kind, mode=mode, cfg=cfg, seed=model_seed, candidates=candidates)
    tasks = [(0, f, tr, te) for f, (tr, te) in enumerate(plan.splits())]
    results = _run_map(_inner_task, tasks, ctx, jobs)
    return _pick_best(candidates, [scores for _, _, scores in results])


def inner_seed(seed: int, outer: int) -> list[int]:
    return [int(seed), outer + 1]


def nested_cv(
    d: Dataset,
    grid: ParamGrid,
    kind: str,
    outer_k: int = 5,
    inner_k: int = 3,
    seed: int = 0,
    mode: str = "paper-faithful",
    cfg: PreprocessConfig = PreprocessConfig(),
    jobs: int = 1,
) -> tuple[CvReport, FoldPlan]:
    """Outer folds estimate accuracy of a grid search run on each outer-train split.

    In paper-faithful mode ``d`` is preprocessed once up front; in
    leakage-free mode every training split refits its own transforms. The
    returned plan indexes the rows actually split (filtered rows in
    paper-faithful mode).
    """
    _check_mode(kind, mode, grid)
    candidates = grid.candidates()
    info = {"input_rows": d.n_rows, "input_features": d.n_features}
    if mode == "paper-faithful":
        prepared = prepare_paper_faithful(d, cfg)
        data = prepared.dataset
        info.update(filtered_rows=data.n_rows, removed_rows=prepared.outliers.n_removed,
                    pca_components=prepared.pca.n_components)
    else:
        data = d

    outer_plan = stratified_kfold(data.labels, outer_k, seed)
    inner_tasks = []
    for o in range(outer_k):
        outer_train = outer_plan.train_rows(o)
        plan = stratified_kfold(data.labels[outer_train], inner_k, inner_seed(seed, o))
        for i, (tr, te) in enumerate(plan.splits()):
            inner_tasks.append((o, i, outer_train[tr], outer_train[te]))

    ctx = dict(data=data, kind=kind, mode=mode, cfg=cfg, seed=seed, candidates=candidates)
    inner = _run_map(_inner_task, inner_tasks, ctx, jobs)
    searches = []
    for o in range(outer_k):
        scores = [s for (oo, _, s) in inner if oo == o]
        searches.append(_pick_best(candidates, scores))

    refit_tasks = [
        (o, searches[o].best_params, outer_plan.train_rows(o), outer_plan.test_rows(o)) for o in range(outer_k)
    ]
    refits = _run_map(_refit_task, refit_tasks, ctx, jobs)

    folds = []
    for (o, pred, extras), search in zip(refits, searches):
        test = outer_plan.test_rows(o)
        confusion, metrics = evaluate(data.labels[test], pred, data.class_names)
        folds.append(FoldResult(
            index=o,
            best_params=search.best_params,
            inner_accuracy=search.best_score,
            metrics=metrics,
            confusion=confusion,
            n_train=int(outer_plan.train_rows(o).size),
            n_test=int(test.size),
            candidate_scores=search.scores,
            extras=extras,
        ))
    report = CvReport(kind, mode, data.class_names, grid, tuple(folds), dataset_info=info)
    return report, outer_plan
