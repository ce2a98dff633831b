from __future__ import annotations

import pytest

from drybean.errors import FormatError
from drybean.modelselect import ParamGrid, nested_cv
from drybean.report import parse_report, render_summary, write_report

GRID = ParamGrid.from_dict({"n_components": [5], "C": [1], "kernel": ["linear", "rbf"], "gamma": ["scale"]})


@pytest.fixture(scope="module")
def report(surrogate):
    r, _ = nested_cv(surrogate, GRID, "svm", 5, 3, seed=0)
    return r


def test_round_trip_is_exact(report):
    text = write_report(report)
    parsed = parse_report(text)
    assert parsed.aggregate["accuracy_mean"] == report.aggregates()["accuracy_mean"]
    assert parsed.grid == GRID
    assert parsed.class_names == report.class_names
    assert len(parsed.folds) == 5
    for pf, f in zip(parsed.folds, report.folds):
        assert pf.values["accuracy"] == f.metrics.accuracy
        assert pf.best_params == f.best_params
        assert (pf.confusion.counts == f.confusion.counts).all()
        assert [c[1] for c in pf.candidates] == list(f.candidate_scores)


def test_summary_lists_every_fold(report):
    summary = render_summary(parse_report(write_report(report)))
    assert summary.count("fold ") == 5
    assert repr(report.aggregates()["accuracy_mean"]) in summary
    for name in ("accuracy", "micro_f1", "macro_f1", "micro_recall", "macro_recall"):
        assert name in summary


@pytest.mark.parametrize("cut", [10, 40, -3])
def test_truncation_is_reported(report, cut):
    lines = write_report(report).splitlines()
    with pytest.raises(FormatError, match="truncated") as exc:
        parse_report("\n".join(lines[:cut]))
    assert exc.value.line is not None


def test_bad_header_and_version(report):
    text = write_report(report)
    with pytest.raises(FormatError, match="line 1"):
        parse_report("garbage\n" + text)
    with pytest.raises(FormatError, match="version"):
        parse_report(text.replace("format_version = 1", "format_version = 9"))


def test_malformed_confusion_row(report):
    text = write_report(report).replace("\n[fold 0 confusion]\n", "\n[fold 0 confusion]\nx,y\n", 1)
    with pytest.raises(FormatError, match="line"):
        parse_report(text)
