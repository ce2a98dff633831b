"""Acceptance criteria, one PASS/FAIL line each.

Criteria 1-4 and 6 need the real bean table (13,611 rows). Point the
``DRYBEAN_CSV`` environment variable at it or place it at
``data/Dry_Bean_Dataset.csv``; without it those criteria fail rather than skip.
Criteria 5 and 7 run on synthetic and randomized inputs.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from conftest import real_data_path
from drybean.dataset import class_distribution, from_string_labels, load_csv, stratified_subsample
from drybean.linalg import symmetric_eigen
from drybean.modelselect import DEFAULT_GRIDS, PreprocessConfig, evaluate, nested_cv, stratified_kfold
from drybean.modelselect.grid import format_params
from drybean.preprocess import pca_fit, pca_top_features, scaler_apply, scaler_fit, zscore_filter
from drybean.report import write_report

pytestmark = pytest.mark.acceptance

EXPECTED_ROWS = 12909
EXPECTED_COMPONENTS = 10
TOP4 = [
    {"MajorAxisLength", "ShapeFactor2", "Perimeter", "EquivDiameter"},
    {"MinorAxisLength", "ShapeFactor1", "AspectRation", "Compactness"},
    {"Solidity", "ShapeFactor4", "AspectRation", "roundness"},
    {"Extent", "ShapeFactor4", "Eccentricity", "ShapeFactor3"},
    {"ShapeFactor4", "roundness", "Solidity", "Extent"},
    {"ShapeFactor1", "ConvexArea", "Area", "Solidity"},
    {"Eccentricity", "roundness", "ShapeFactor2", "ShapeFactor1"},
    {"AspectRation", "roundness", "Eccentricity", "Solidity"},
    {"ShapeFactor2", "MinorAxisLength", "MajorAxisLength", "ShapeFactor1"},
    {"MinorAxisLength", "ConvexArea", "Area", "Perimeter"},
]
TARGET_ACCURACY = {"svm": 0.9439, "gbt": 0.9400}
FULL_TOLERANCE = 0.015
CI_TOLERANCE = 0.03
CI_SUBSAMPLE = 2000
CI_SECONDS = 180.0


@pytest.fixture
def verdict(capsys):
    def emit(criterion: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, f"criterion {criterion}: {detail}"

    return emit


@pytest.fixture(scope="module")
def bean_data():
    path = real_data_path()
    return None if path is None else load_csv(path)


def _need_data(bean_data, verdict, criterion):
    if bean_data is None:
        verdict(criterion, False, "real dataset not found (set DRYBEAN_CSV or add data/Dry_Bean_Dataset.csv)")


def test_c1_row_filtering(bean_data, verdict):
    _need_data(bean_data, verdict, "1")
    default = PreprocessConfig()
    started = time.perf_counter()
    kept, _ = zscore_filter(bean_data, default.z_threshold, default.z_ddof, default.z_inclusive)
    elapsed = time.perf_counter() - started
    counts = {}
    for ddof in (0, 1):
        for inclusive in (False, True):
            counts[(ddof, inclusive)] = zscore_filter(bean_data, 3.0, ddof, inclusive)[0].n_rows
    delta = kept.n_rows - EXPECTED_ROWS
    exact_elsewhere = any(n == EXPECTED_ROWS for n in counts.values())
    closest = min(abs(n - EXPECTED_ROWS) for n in counts.values())
    ok = (delta == 0 or (not exact_elsewhere and abs(delta) == closest and abs(delta) <= 5)) and elapsed < 1.0
    detail = (f"{bean_data.n_rows} -> {kept.n_rows} rows (expected {EXPECTED_ROWS}, delta {delta}) "
              f"in {elapsed:.3f}s; (ddof, inclusive) -> rows: {counts}")
    verdict("1", ok, detail)


def _default_pca(d):
    cfg = PreprocessConfig()
    scaler = scaler_fit(d.features, d.feature_names)
    kept, _ = zscore_filter(d, cfg.z_threshold, cfg.z_ddof, cfg.z_inclusive)
    return pca_fit(scaler_apply(scaler, kept.features), cfg.variance_threshold, d.feature_names)


def test_c2_component_count(bean_data, verdict):
    _need_data(bean_data, verdict, "2")
    started = time.perf_counter()
    model = _default_pca(bean_data)
    elapsed = time.perf_counter() - started
    ok = model.n_components == EXPECTED_COMPONENTS and elapsed < 1.0
    verdict("2", ok, f"{model.n_components} components at 0.9999 (expected {EXPECTED_COMPONENTS}) in {elapsed:.3f}s")


def test_c3_loadings(bean_data, verdict):
    _need_data(bean_data, verdict, "3")
    ranked = pca_top_features(_default_pca(bean_data), 4)
    matches, mismatches = 0, []
    for k, expected in enumerate(TOP4):
        got = set(ranked[k]) if k < len(ranked) else set()
        if got == expected:
            matches += 1
        else:
            mismatches.append(f"component {k}: got {ranked[k] if k < len(ranked) else []}")
    verdict("3", matches >= 7, f"{matches}/10 top-4 sets match; mismatches: {mismatches or 'none'}")


def _check_accuracy(d, kind, tolerance, verdict, criterion, limit=None):
    started = time.perf_counter()
    report, _ = nested_cv(d, DEFAULT_GRIDS[kind], kind, 5, 3, seed=0)
    elapsed = time.perf_counter() - started
    mean = report.aggregates()["accuracy_mean"]
    target = TARGET_ACCURACY[kind]
    identity = all(f.metrics.micro_f1 == f.metrics.micro_recall == f.metrics.accuracy for f in report.folds)
    ok = abs(mean - target) <= tolerance and identity and (limit is None or elapsed < limit)
    detail = (f"{kind} mean outer accuracy {mean:.4f} (target {target} +/- {tolerance}) on {d.n_rows} rows "
              f"in {elapsed:.1f}s; modal best params: {format_params(report.modal_params())}")
    verdict(criterion, ok, detail)


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["svm", "gbt"])
def test_c4_headline_accuracy(bean_data, verdict, kind):
    _need_data(bean_data, verdict, f"4-{kind}")
    _check_accuracy(bean_data, kind, FULL_TOLERANCE, verdict, f"4-{kind}")


@pytest.mark.parametrize("kind", ["svm", "gbt"])
def test_c4_subsample_variant(bean_data, verdict, kind):
    _need_data(bean_data, verdict, f"4-{kind}-subsample")
    sub = stratified_subsample(bean_data, CI_SUBSAMPLE, seed=0)
    _check_accuracy(sub, kind, CI_TOLERANCE, verdict, f"4-{kind}-subsample", limit=CI_SECONDS)


def test_c5_metric_identity(surrogate, bean_data, verdict):
    data = surrogate if bean_data is None else stratified_subsample(bean_data, CI_SUBSAMPLE, seed=0)
    folds = 0
    ok = True
    for kind in ("svm", "gbt"):
        for mode in ("paper-faithful", "leakage-free"):
            report, _ = nested_cv(data, DEFAULT_GRIDS[kind], kind, 5, 3, seed=0, mode=mode)
            for f in report.folds:
                folds += 1
                m = f.metrics
                ok &= m.micro_f1 == m.micro_recall == m.accuracy
    rng = np.random.default_rng(0)
    for _ in range(500):
        true, pred = rng.integers(0, 7, 300), rng.integers(0, 7, 300)
        _, m = evaluate(true, pred, tuple("abcdefg"))
        ok &= m.micro_f1 == m.micro_recall == m.accuracy
    source = "synthetic surrogate" if bean_data is None else "real data subsample"
    verdict("5", ok, f"micro-F1 == micro-recall == accuracy on {folds} nested-CV folds ({source}) and 500 random label sets")


def test_c6_class_distribution(bean_data, verdict):
    _need_data(bean_data, verdict, "6")
    dist = class_distribution(bean_data)
    dermason, bombay = dist.fraction_of("DERMASON"), dist.fraction_of("BOMBAY")
    ok = abs(dermason - 0.2620) <= 0.0005 and abs(bombay - 0.0383) <= 0.0005
    verdict("6", ok, f"DERMASON {100 * dermason:.2f}% (expect 26.20 +/- 0.05), BOMBAY {100 * bombay:.2f}% (expect 3.83 +/- 0.05)")


def test_c7a_eigensolver(verdict):
    rng = np.random.default_rng(7)
    worst_res = worst_rec = 0.0
    for _ in range(100):
        M = rng.normal(size=(8, 8))
        A = (M + M.T) / 2
        e = symmetric_eigen(A)
        V, lam = e.eigenvectors, e.eigenvalues
        worst_res = max(worst_res, np.abs(A @ V - V * lam).max())
        worst_rec = max(worst_rec, np.abs(V @ np.diag(lam) @ V.T - A).max())
    ok = worst_res < 1e-8 and worst_rec < 1e-7
    verdict("7-eigen", ok, f"max residual {worst_res:.2e} (< 1e-8), max reconstruction error {worst_rec:.2e} (< 1e-7)")


def test_c7b_smo_dual(verdict):
    from test_svm import TOY, _grid_dual_max

    from drybean.svm import KernelSpec, SvmHyper, kernel_matrix, smo_train_binary
    from drybean.svm.smo import dual_objective

    worst_gap = worst_kkt = 0.0
    box = True
    for X, y, kind, gamma, C in TOY:
        X, y = np.asarray(X, float), np.asarray(y, float)
        spec = KernelSpec(kind, gamma=gamma, coef0=1.0, degree=2)
        sol = smo_train_binary(X, y, SvmHyper(C=C, kernel=spec, tol=1e-6), gamma)
        K = kernel_matrix(spec, gamma, X, X)
        if len(y) == 2:
            grid = max(2 * a - 0.5 * a * a * (K[0, 0] + K[1, 1] - 2 * K[0, 1]) for a in np.linspace(0, C, 51))
        else:
            grid = _grid_dual_max(K, y, C)
        worst_gap = max(worst_gap, abs(dual_objective(sol.alpha, y, K) - grid))
        box &= bool(np.all((sol.alpha >= 0) & (sol.alpha <= C))) and abs(sol.alpha @ y) < 1e-9
        m = y * sol.decision(K, y)
        lower = np.where(sol.alpha < C, 1 - m, 0.0)  # alpha < C needs margin >= 1
        upper = np.where(sol.alpha > 0, m - 1, 0.0)  # alpha > 0 needs margin <= 1
        worst_kkt = max(worst_kkt, lower.max(), upper.max())
    ok = worst_gap < 1e-3 and box and worst_kkt < 1e-5
    verdict("7-smo", ok, f"{len(TOY)} toy problems: max |dual - grid dual| {worst_gap:.2e} (< 1e-3), "
                         f"box/equality ok={box}, max KKT violation {worst_kkt:.2e}")


def test_c7c_boosting(verdict):
    from test_gbt import _brute_split

    from drybean.gbt import GbtHyper, build_tree, fit_gbt, log_loss, softmax_grad_hess

    rng = np.random.default_rng(3)
    worst_fd = 0.0
    for _ in range(50):
        raw, labels = rng.normal(0, 2, (3, 5)), rng.integers(0, 5, 3)
        grad, _ = softmax_grad_hess(raw, labels)
        for i in range(3):
            for c in range(5):
                up, down = raw.copy(), raw.copy()
                up[i, c] += 1e-4
                down[i, c] -= 1e-4
                fd = (log_loss(up, labels) - log_loss(down, labels)) * 3 / 2e-4
                worst_fd = max(worst_fd, abs(fd - grad[i, c]))

    X = rng.normal(size=(300, 6))
    y = (X[:, 0] > 0).astype(int) + 2 * (X[:, 1] + X[:, 2] > 0.3).astype(int)
    monotone = True
    for lr, cs in [(0.1, 0.3), (0.3, 0.7), (0.3, 1.0)]:
        m = fit_gbt(X, y, GbtHyper(n_estimators=50, learning_rate=lr, colsample_bytree=cs, max_depth=10))
        losses = np.array((log_loss(np.zeros((300, 4)), y),) + m.train_loss)
        monotone &= bool(np.all(np.diff(losses) <= 1e-12))

    splits = 0
    agree = True
    for _ in range(500):
        n, p = int(rng.integers(2, 9)), int(rng.integers(1, 4))
        Xs = rng.integers(0, 5, (n, p)).astype(float)
        g, h = rng.normal(size=n), rng.uniform(0.05, 1.0, n)
        _, f, thr = _brute_split(Xs, g, h, 1.0, 0.5)
        tree, _ = build_tree(Xs, g, h, range(p), 1, 1.0, 0.5)
        got = (-1, 0.0) if tree.n_nodes == 1 else (int(tree.feature[0]), float(tree.threshold[0]))
        agree &= got == ((f, thr) if f >= 0 else (-1, 0.0))
        splits += 1
    ok = worst_fd < 1e-6 and monotone and agree
    verdict("7-gbt", ok, f"max |grad - central diff| {worst_fd:.2e} (< 1e-6), loss non-increasing={monotone}, "
                         f"{splits} brute-force split checks agree={agree}")


def test_c7d_fold_laws(verdict):
    rng = np.random.default_rng(11)
    ok = True
    for trial in range(1000):
        k = int(rng.integers(2, 8))
        counts = rng.integers(k, k + 50, int(rng.integers(1, 8)))
        labels = rng.permutation(np.repeat(np.arange(counts.size), counts))
        plan = stratified_kfold(labels, k, trial)
        tests = [plan.test_rows(f) for f in range(k)]
        ok &= np.array_equal(np.sort(np.concatenate(tests)), np.arange(labels.size))
        for c in range(counts.size):
            per = np.array([(labels[t] == c).sum() for t in tests])
            ok &= bool(np.all(np.abs(per - counts[c] / k) < 1.0))
    verdict("7-folds", bool(ok), "1000 random label vectors: disjoint, exhaustive, per-class counts within 1 of count/k")


def test_c7e_affine_invariance(verdict):
    rng = np.random.default_rng(5)
    same = 0
    trials = 200
    removed_total = 0
    for _ in range(trials):
        X = rng.standard_t(3, size=(120, 4))
        labels = np.repeat(["A", "B", "C"], 40).tolist()
        d = from_string_labels(X, labels, ["a", "b", "c", "d"])
        scale = rng.choice([-1e3, -2.0, 0.01, 3.0, 1e4], size=4)
        shift = rng.uniform(-1e5, 1e5, 4)
        _, r1 = zscore_filter(d, 3.0)
        _, r2 = zscore_filter(d.with_features(X * scale + shift), 3.0)
        same += r1.removed_row_indices == r2.removed_row_indices
        removed_total += r1.n_removed
    verdict("7-affine", same == trials, f"{same}/{trials} random column-affine maps keep the removal set ({removed_total} removals seen)")


def test_c7f_determinism(surrogate, verdict):
    sub = stratified_subsample(surrogate, 600, seed=0)
    ok = True
    for kind in ("svm", "gbt"):
        texts = []
        for jobs in (1, 1, 2):
            report, _ = nested_cv(sub, DEFAULT_GRIDS[kind], kind, 5, 3, seed=3, jobs=jobs)
            texts.append(write_report(report))
        ok &= texts[0] == texts[1] == texts[2]
    verdict("7-determinism", ok, "svm and gbt reports byte-identical across reruns and --jobs 1/2")
