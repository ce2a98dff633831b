from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drybean.dataset import from_string_labels
from drybean.errors import FormatError, InputError
from drybean.modelselect import (
    DEFAULT_GRIDS,
    ParamGrid,
    PreprocessConfig,
    evaluate,
    grid_search,
    nested_cv,
    parse_grid,
    stratified_kfold,
)
from drybean.modelselect.grid import format_params, parse_params


def _check_partition(labels, k, plan):
    n = len(labels)
    tests = [plan.test_rows(f) for f in range(k)]
    allrows = np.concatenate(tests)
    assert np.array_equal(np.sort(allrows), np.arange(n))
    for f, (tr, te) in enumerate(plan.splits()):
        assert np.intersect1d(tr, te).size == 0
        assert tr.size + te.size == n
    for c in np.unique(labels):
        per_fold = np.array([(labels[t] == c).sum() for t in tests])
        assert np.all(np.abs(per_fold - (labels == c).sum() / k) < 1.0)
    sizes = [t.size for t in tests]
    assert max(sizes) - min(sizes) <= 1


def test_fold_laws_on_1000_random_label_vectors():
    rng = np.random.default_rng(123)
    for trial in range(1000):
        k = int(rng.integers(2, 8))
        n_classes = int(rng.integers(1, 8))
        counts = rng.integers(k, k + 40, n_classes)
        labels = rng.permutation(np.repeat(np.arange(n_classes), counts))
        _check_partition(labels, k, stratified_kfold(labels, k, trial))


def test_perfectly_divisible_folds():
    labels = np.repeat([0, 1], 5)
    plan = stratified_kfold(labels, 5, 0)
    for f in range(5):
        assert sorted(labels[plan.test_rows(f)].tolist()) == [0, 1]


def test_folds_are_seeded():
    labels = np.repeat(np.arange(3), 20)
    a, b = stratified_kfold(labels, 4, 7), stratified_kfold(labels, 4, 7)
    assert np.array_equal(a.assignments, b.assignments)
    assert not np.array_equal(a.assignments, stratified_kfold(labels, 4, 8).assignments)


def test_fold_errors():
    with pytest.raises(InputError):
        stratified_kfold([0, 0, 1], 2, 0)
    with pytest.raises(InputError):
        stratified_kfold([0, 1, 0, 1], 1, 0)


def test_metrics_hand_case():
    cm, m = evaluate([0, 0, 1, 1], [0, 1, 1, 1], ("a", "b"))
    assert cm.counts.tolist() == [[1, 1], [0, 2]]
    assert m.accuracy == 0.75
    assert m.macro_recall == pytest.approx(0.75)
    assert m.micro_f1 == 0.75


def test_metrics_perfect():
    y = [0, 1, 2, 2, 1]
    cm, m = evaluate(y, y, ("a", "b", "c"))
    assert np.array_equal(cm.counts, np.diag(np.diag(cm.counts)))
    assert m.accuracy == m.macro_f1 == m.micro_f1 == 1.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 9), st.integers(1, 300))
def test_micro_identity(seed, k, n):
    rng = np.random.default_rng(seed)
    true, pred = rng.integers(0, k, n), rng.integers(0, k, n)
    cm, m = evaluate(true, pred, tuple(str(i) for i in range(k)))
    assert m.micro_f1 == m.micro_recall == m.accuracy
    assert cm.total == n
    assert 0.0 <= m.macro_f1 <= 1.0


def test_confusion_csv_and_render():
    cm, _ = evaluate([0, 1, 1], [0, 0, 1], ("LONGNAME", "b"))
    assert cm.to_csv().splitlines()[0] == "true\\pred,LONGNAME,b"
    lines = cm.render().splitlines()
    assert len({len(line) for line in lines}) == 1


def test_grid_defaults():
    svm = DEFAULT_GRIDS["svm"]
    assert len(svm) == 12
    assert svm.candidates()[0] == {"n_components": 10, "C": 0.1, "kernel": "linear", "gamma": "scale"}
    assert svm.candidates()[1]["gamma"] == "auto"
    gbt = DEFAULT_GRIDS["gbt"]
    assert len(gbt) == 18
    assert dict(gbt.axes)["colsample_bytree"] == (0.3, 0.7, 1)


def test_grid_text_round_trip():
    for grid in DEFAULT_GRIDS.values():
        assert parse_grid(grid.to_text()) == grid
    params = {"C": 0.1, "kernel": "rbf", "n_components": 10}
    assert parse_params(format_params(params)) == params


def test_grid_parse_errors():
    with pytest.raises(FormatError, match="line 2"):
        parse_grid("C = 1, 2\nkernel\n")
    with pytest.raises(FormatError):
        parse_grid("# nothing\n")
    with pytest.raises(FormatError):
        parse_grid("C = 1\nC = 2\n")


def _blobs(seed=0, n=12):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(c, 0.2, (n, 2)) for c in ([0, 0], [4, 0], [0, 4])])
    return from_string_labels(X, ["a"] * n + ["b"] * n + ["c"] * n, ["x", "y"])


def test_single_candidate_wins():
    grid = ParamGrid.from_dict({"C": [0.001], "kernel": ["linear"]})
    r = grid_search(_blobs(), grid, 3, 0, "svm")
    assert r.best_index == 0


def test_perfect_candidate_is_chosen():
    grid = ParamGrid.from_dict({"kernel": ["sigmoid", "linear"], "gamma": [25.0], "C": [1.0]})
    r = grid_search(_blobs(), grid, 3, 0, "svm")
    assert r.best_index == 1
    assert r.best_score == 1.0
    assert r.scores[0] < 1.0


def test_ties_go_to_first_candidate():
    # constant features: every booster predicts the same class
    d = from_string_labels(np.ones((30, 2)), ["a"] * 15 + ["b"] * 15, ["x", "y"])
    grid = ParamGrid.from_dict({"n_estimators": [3, 1], "learning_rate": [0.3, 0.1]})
    r = grid_search(d, grid, 3, 0, "gbt")
    assert len(set(r.scores)) == 1
    assert r.best_index == 0


def test_failing_candidate_is_disqualified():
    grid = ParamGrid.from_dict({"learning_rate": [2.0, 0.3], "n_estimators": [2]})
    r = grid_search(_blobs(), grid, 3, 0, "gbt")
    assert r.scores[0] is None
    assert r.best_index == 1


def test_unknown_parameter_rejected():
    with pytest.raises(InputError, match="bogus"):
        grid_search(_blobs(), ParamGrid.from_dict({"bogus": [1]}), 3, 0, "svm")


SMALL_SVM = ParamGrid.from_dict({"n_components": [4], "C": [1, 10], "kernel": ["linear", "rbf"], "gamma": ["scale"]})
SMALL_GBT = ParamGrid.from_dict({"n_estimators": [5, 10], "learning_rate": [0.3], "colsample_bytree": [0.7], "max_depth": [3]})


@pytest.mark.parametrize("kind, grid", [("svm", SMALL_SVM), ("gbt", SMALL_GBT)])
@pytest.mark.parametrize("mode", ["paper-faithful", "leakage-free"])
def test_nested_cv_on_surrogate(surrogate, kind, grid, mode):
    report, plan = nested_cv(surrogate, grid, kind, 5, 3, seed=1, mode=mode)
    assert len(report.folds) == 5
    assert sum(f.n_test for f in report.folds) == plan.assignments.size
    if mode == "leakage-free":
        assert plan.assignments.size == surrogate.n_rows
    for f in report.folds:
        m = f.metrics
        assert m.micro_f1 == m.micro_recall == m.accuracy
        assert f.confusion.total == f.n_test
        assert f.best_params in grid.candidates()
        assert 0.6 < m.accuracy <= 1.0
    assert report.aggregates()["accuracy_mean"] == pytest.approx(np.mean([f.metrics.accuracy for f in report.folds]))
    if kind == "gbt":
        assert all(f.extras["max_loss_increase"] <= 1e-12 for f in report.folds)


def test_paper_faithful_filters_before_splitting(surrogate):
    report, plan = nested_cv(surrogate, SMALL_SVM, "svm", 5, 3, seed=0)
    info = report.dataset_info
    assert info["filtered_rows"] + info["removed_rows"] == surrogate.n_rows
    assert plan.assignments.size == info["filtered_rows"]


def test_leakage_free_refits_per_fold(surrogate):
    cfg = PreprocessConfig(variance_threshold=0.9999)
    report, _ = nested_cv(surrogate, SMALL_SVM, "svm", 5, 3, seed=0, mode="leakage-free", cfg=cfg)
    means = [tuple(f.extras["scaler_means"]) for f in report.folds]
    assert len(set(means)) == 5


def test_nested_cv_independent_of_jobs(surrogate):
    from drybean.report import write_report

    a, _ = nested_cv(surrogate, SMALL_GBT, "gbt", 5, 3, seed=2, jobs=1)
    b, _ = nested_cv(surrogate, SMALL_GBT, "gbt", 5, 3, seed=2, jobs=2)
    assert write_report(a) == write_report(b)


def test_unknown_mode(surrogate):
    with pytest.raises(InputError):
        nested_cv(surrogate, SMALL_SVM, "svm", mode="sloppy")
