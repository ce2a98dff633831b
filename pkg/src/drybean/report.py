"""Text serialization of cross-validation reports.

Layout: a version header, then ``[section]`` blocks. Most sections hold
``key = value`` lines; sections whose name ends in ``confusion`` or
``candidates`` hold a CSV table. A closing ``[end]`` marker detects
truncation. Floats are written with ``repr`` so they parse back exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from drybean.errors import FormatError
from drybean.modelselect.grid import format_params, format_value, parse_grid, parse_params, parse_value
from drybean.modelselect.metrics import ConfusionMatrix
from drybean.modelselect.search import AGGREGATED, CvReport

HEADER = "# drybean-cv-report"
FORMAT_VERSION = 1
METRIC_KEYS = ("accuracy", "micro_f1", "macro_f1", "micro_recall", "macro_recall",
               "micro_precision", "macro_precision")
TABLE_SUFFIXES = ("confusion", "candidates")


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return format_value(v)


def write_report(report: CvReport) -> str:
    out = io.StringIO()
    out.write(f"{HEADER}\nformat_version = {FORMAT_VERSION}\n")

    out.write("\n[config]\n")
    for key, value in report.config.items():
        out.write(f"{key} = {_fmt(value)}\n")
    out.write(f"model = {report.model_kind}\nmode = {report.mode}\n")
    out.write("classes = " + ",".join(report.class_names) + "\n")

    out.write("\n[dataset]\n")
    for key, value in report.dataset_info.items():
        out.write(f"{key} = {_fmt(value)}\n")

    out.write("\n[grid]\n")
    out.write(report.grid.to_text())

    out.write("\n[aggregate]\n")
    out.write(f"n_folds = {len(report.folds)}\n")
    for key, value in report.aggregates().items():
        out.write(f"{key} = {value!r}\n")
    out.write(f"modal_best_params = {format_params(report.modal_params())}\n")

    for fold in report.folds:
        out.write(f"\n[fold {fold.index}]\n")
        out.write(f"best_params = {format_params(fold.best_params)}\n")
        out.write(f"inner_accuracy = {fold.inner_accuracy!r}\n")
        for key in METRIC_KEYS:
            out.write(f"{key} = {getattr(fold.metrics, key)!r}\n")
        out.write(f"n_train = {fold.n_train}\nn_test = {fold.n_test}\n")
        for key, value in fold.extras.items():
            out.write(f"{key} = {_fmt(value)}\n")

        out.write(f"\n[fold {fold.index} candidates]\n")
        out.write("candidate,inner_accuracy,params\n")
        for i, (params, score) in enumerate(zip(report.grid.candidates(), fold.candidate_scores)):
            shown = "disqualified" if score is None else repr(score)
            out.write(f"{i},{shown},{format_params(params)}\n")

        out.write(f"\n[fold {fold.index} confusion]\n")
        out.write(fold.confusion.to_csv())
    out.write("\n[end]\n")
    return out.getvalue()


@dataclass
class ParsedFold:
    index: int
    values: dict = field(default_factory=dict)
    best_params: dict = field(default_factory=dict)
    candidates: list = field(default_factory=list)
    confusion: ConfusionMatrix | None = None


@dataclass
class ParsedReport:
    config: dict
    dataset: dict
    grid: object
    aggregate: dict
    folds: list[ParsedFold]

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(self.config["classes"].split(","))


def parse_report(text: str) -> ParsedReport:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise FormatError("missing report header", 1)

    sections: list[tuple[str, int, list[tuple[int, str]]]] = []
    current = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = (line[1:-1].strip(), lineno, [])
            sections.append(current)
        elif current is None:
            key, sep, value = line.partition("=")
            if not sep or key.strip() != "format_version":
                raise FormatError(f"unexpected line before first section: {line!r}", lineno)
            if value.strip() != str(FORMAT_VERSION):
                raise FormatError(f"unsupported format version {value.strip()}", lineno)
        else:
            current[2].append((lineno, line))

    if not sections or sections[-1][0] != "end":
        raise FormatError("report is truncated (no [end] marker)", len(lines) + 1)

    def kv(body):
        out = {}
        for lineno, line in body:
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"expected 'key = value', got {line!r}", lineno)
            out[key.strip()] = value.strip()
        return out

    config, dataset, aggregate, grid = {}, {}, {}, None
    folds: dict[int, ParsedFold] = {}
    for name, lineno, body in sections[:-1]:
        parts = name.split()
        if name == "config":
            config = kv(body)
        elif name == "dataset":
            dataset = {k: parse_value(v) for k, v in kv(body).items()}
        elif name == "grid":
            grid = parse_grid("\n".join(line for _, line in body))
        elif name == "aggregate":
            aggregate = {k: parse_value(v) for k, v in kv(body).items()}
        elif parts[0] == "fold" and len(parts) >= 2:
            try:
                idx = int(parts[1])
            except ValueError:
                raise FormatError(f"bad fold index in section [{name}]", lineno) from None
            fold = folds.setdefault(idx, ParsedFold(idx))
            if len(parts) == 2:
                values = kv(body)
                try:
                    fold.best_params = parse_params(values.pop("best_params", ""))
                except ValueError as exc:
                    raise FormatError(str(exc), lineno) from None
                fold.values = {k: parse_value(v) for k, v in values.items()}
            elif parts[2] == "candidates":
                for ln, line in body[1:]:
                    cells = line.split(",", 2)
                    if len(cells) != 3:
                        raise FormatError("malformed candidate row", ln)
                    score = None if cells[1] == "disqualified" else parse_value(cells[1])
                    fold.candidates.append((int(cells[0]), score, parse_params(cells[2])))
            elif parts[2] == "confusion":
                fold.confusion = _parse_confusion(body, lineno)
            else:
                raise FormatError(f"unknown section [{name}]", lineno)
        else:
            raise FormatError(f"unknown section [{name}]", lineno)

    if "accuracy_mean" not in aggregate:
        raise FormatError("aggregate section lacks accuracy_mean")
    ordered = [folds[k] for k in sorted(folds)]
    for fold in ordered:
        if fold.confusion is None or "accuracy" not in fold.values:
            raise FormatError(f"fold {fold.index} is incomplete")
    return ParsedReport(config, dataset, grid, aggregate, ordered)


def _parse_confusion(body, lineno) -> ConfusionMatrix:
    if not body:
        raise FormatError("empty confusion table", lineno)
    header = body[0][1].split(",")
    names = tuple(header[1:])
    rows = []
    for ln, line in body[1:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise FormatError("confusion row has the wrong number of cells", ln)
        try:
            rows.append([int(c) for c in cells[1:]])
        except ValueError:
            raise FormatError("non-integer confusion count", ln) from None
    if len(rows) != len(names):
        raise FormatError("confusion table is not square", lineno)
    return ConfusionMatrix(np.array(rows, dtype=np.int64), names)


def render_summary(parsed: ParsedReport) -> str:
    """Aggregate table, per-fold parameters and aligned confusion matrices."""
    out = io.StringIO()
    cfg = parsed.config
    out.write(f"model: {cfg.get('model')}   mode: {cfg.get('mode')}   folds: {len(parsed.folds)}\n\n")
    out.write(f"{'metric':<14}{'mean':>10}{'std':>10}\n")
    for name in AGGREGATED:
        mean = parsed.aggregate[f"{name}_mean"]
        std = parsed.aggregate[f"{name}_std"]
        out.write(f"{name:<14}{mean:>10.4f}{std:>10.4f}\n")
    out.write(f"\naccuracy_mean (exact): {parsed.aggregate['accuracy_mean']!r}\n")
    if "modal_best_params" in parsed.aggregate:
        out.write(f"modal best params: {parsed.aggregate['modal_best_params']}\n")
    for fold in parsed.folds:
        acc = fold.values["accuracy"]
        out.write(f"\nfold {fold.index}: accuracy {acc:.4f}   best {format_params(fold.best_params)}\n")
        out.write(fold.confusion.render() + "\n")
    return out.getvalue()
