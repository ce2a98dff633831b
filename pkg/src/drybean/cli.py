"""Command-line entry point.

    drybean inspect     class distribution and correlation matrices
    drybean preprocess  filtered dataset, outlier report, scree and loadings
    drybean nested-cv   nested cross-validation report
    drybean report      human-readable summary of a report file
    drybean synth       write the synthetic surrogate dataset
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from drybean import __version__
from drybean.dataset import (
    Dataset,
    class_distribution,
    correlation_matrix,
    load_csv,
    matrix_to_csv,
    stratified_subsample,
    write_csv,
)
from drybean.errors import DrybeanError, InputError
from drybean.modelselect import DEFAULT_GRIDS, MODES, PreprocessConfig, nested_cv, parse_grid
from drybean.modelselect.grid import ParamGrid
from drybean.modelselect.pipeline import filter_dataset
from drybean.preprocess import loadings_csv, pca_fit, scaler_apply, scaler_fit, scree_csv
from drybean.report import parse_report, render_summary, write_report


@dataclass
class RunConfig:
    data: str = "Dry_Bean_Dataset.csv"
    label_column: str = "Class"
    seed: int = 0
    model: str = "svm"
    mode: str = "paper-faithful"
    z_threshold: float = 3.0
    z_ddof: int = 0
    z_inclusive: bool = False
    variance_threshold: float = 0.9999
    outer_k: int = 5
    inner_k: int = 3
    grid: str | None = None
    out: str = "out"
    jobs: int = 1
    subsample: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def preprocess(self) -> PreprocessConfig:
        return PreprocessConfig(self.z_threshold, self.z_ddof, self.z_inclusive, self.variance_threshold)

    def echo(self) -> dict:
        """Settings that determine results; ``out`` and ``jobs`` never change outputs."""
        d = asdict(self)
        for key in ("out", "jobs", "extra"):
            d.pop(key)
        if d["subsample"] is None:
            d["subsample"] = "none"
        if d["grid"] is None:
            d["grid"] = "default"
        return d


def _echo_line(command: str, cfg: RunConfig) -> str:
    items = " ".join(f"{k}={v}" for k, v in cfg.echo().items())
    return f"# drybean {__version__} {command} {items}\n"


def _write(path: Path, text: str, command: str, cfg: RunConfig) -> None:
    path.write_text(_echo_line(command, cfg) + text, encoding="utf-8")


def load_dataset(cfg: RunConfig) -> Dataset:
    d = load_csv(cfg.data, cfg.label_column)
    if cfg.subsample:
        d = stratified_subsample(d, cfg.subsample, cfg.seed)
    return d


def load_grid(cfg: RunConfig) -> ParamGrid:
    if cfg.grid is None:
        return DEFAULT_GRIDS[cfg.model]
    path = Path(cfg.grid)
    if not path.is_file():
        raise InputError(f"grid file not found: {path}")
    return parse_grid(path.read_text(encoding="utf-8"))


def cmd_inspect(cfg: RunConfig) -> dict:
    d = load_dataset(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    filtered, _ = filter_dataset(d, cfg.preprocess)
    summary = {}
    for tag, data in (("raw", d), ("filtered", filtered)):
        dist = class_distribution(data)
        _write(out / f"class_distribution_{tag}.csv", dist.to_csv(), "inspect", cfg)
        corr = correlation_matrix(data)
        _write(out / f"correlation_{tag}.csv", matrix_to_csv(corr, data.feature_names), "inspect", cfg)
        summary[tag] = {"rows": data.n_rows, "fractions": {s.name: s.fraction for s in dist}}
    print(f"rows: {d.n_rows} raw, {filtered.n_rows} after z-filter")
    for s in class_distribution(d):
        print(f"  {s.name:<10} {s.count:>6}  {100 * s.fraction:6.2f}%")
    return summary


def cmd_preprocess(cfg: RunConfig) -> dict:
    d = load_dataset(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    pre = cfg.preprocess
    scaler = scaler_fit(d.features, d.feature_names)
    filtered, report = filter_dataset(d, pre)
    scaled = scaler_apply(scaler, filtered.features)
    pca = pca_fit(scaled, pre.variance_threshold, d.feature_names)

    write_csv(filtered, out / "filtered.csv", cfg.label_column)
    text = (out / "filtered.csv").read_text(encoding="utf-8")
    _write(out / "filtered.csv", text, "preprocess", cfg)
    _write(out / "outliers.csv", report.to_csv(), "preprocess", cfg)
    _write(out / "scree.csv", scree_csv(pca), "preprocess", cfg)
    _write(out / "loadings_top4.csv", loadings_csv(pca, min(4, d.n_features)), "preprocess", cfg)
    print(f"rows: {d.n_rows} -> {filtered.n_rows} ({report.n_removed} removed)")
    print(f"PCA components kept at {pre.variance_threshold}: {pca.n_components}")
    return {"rows_in": d.n_rows, "rows_out": filtered.n_rows, "n_components": pca.n_components}


def cmd_nested_cv(cfg: RunConfig) -> Path:
    if cfg.model not in DEFAULT_GRIDS:
        raise InputError(f"unknown model {cfg.model!r}")
    d = load_dataset(cfg)
    grid = load_grid(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    report, plan = nested_cv(
        d, grid, cfg.model, cfg.outer_k, cfg.inner_k, cfg.seed, cfg.mode, cfg.preprocess, cfg.jobs
    )
    elapsed = time.perf_counter() - started
    report = replace(report, config=cfg.echo())

    path = out / f"report_{cfg.model}.txt"
    path.write_text(write_report(report), encoding="utf-8")
    for fold in report.folds:
        _write(out / f"confusion_{cfg.model}_fold{fold.index}.csv", fold.confusion.to_csv(), "nested-cv", cfg)
    _write(out / f"folds_{cfg.model}.csv", plan.to_csv(), "nested-cv", cfg)
    # wall-clock lives outside the report so reports stay byte-identical across runs
    (out / f"timing_{cfg.model}.json").write_text(
        json.dumps({"wall_clock_seconds": elapsed, "jobs": cfg.jobs}, indent=2) + "\n", encoding="utf-8"
    )
    agg = report.aggregates()
    print(f"{cfg.model} ({cfg.mode}): mean accuracy {agg['accuracy_mean']:.4f} "
          f"+/- {agg['accuracy_std']:.4f} over {len(report.folds)} folds in {elapsed:.1f}s")
    print(f"report: {path}")
    return path


def cmd_report(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"report file not found: {p}")
    summary = render_summary(parse_report(p.read_text(encoding="utf-8")))
    print(summary, end="")
    return summary


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", default=RunConfig.data, help="input CSV")
    p.add_argument("--label-column", default="Class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z-threshold", type=float, default=3.0)
    p.add_argument("--z-ddof", type=int, choices=(0, 1), default=0,
                   help="0 = population std (default), 1 = sample std for z-scores")
    p.add_argument("--z-inclusive", action="store_true", help="also drop rows with |z| exactly at the threshold")
    p.add_argument("--variance-threshold", type=float, default=0.9999)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--subsample", type=int, default=None, help="stratified subsample size for quick runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drybean", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("inspect", help="class distribution and correlation CSVs"))
    _common(sub.add_parser("preprocess", help="filtered data, outliers, scree and loadings CSVs"))

    p = sub.add_parser("nested-cv", help="nested cross-validation with grid search")
    _common(p)
    p.add_argument("--model", choices=sorted(DEFAULT_GRIDS), default="svm")
    p.add_argument("--mode", choices=MODES, default="paper-faithful")
    p.add_argument("--outer-k", type=int, default=5)
    p.add_argument("--inner-k", type=int, default=3)
    p.add_argument("--grid", default=None, help="grid file (default: built-in grid for the model)")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("report", help="summarize a nested-cv report file")
    p.add_argument("path")

    p = sub.add_parser("synth", help="write the synthetic surrogate dataset as CSV")
    p.add_argument("--out", default="surrogate.csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    for key in asdict(cfg):
        if hasattr(args, key):
            setattr(cfg, key, getattr(args, key))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            cmd_report(args.path)
        elif args.command == "synth":
            from drybean.synthetic import make_surrogate

            write_csv(make_surrogate(args.seed, args.scale), args.out)
            print(f"wrote synthetic surrogate (not the real dataset) to {args.out}")
        else:
            cfg = config_from_args(args)
            {"inspect": cmd_inspect, "preprocess": cmd_preprocess, "nested-cv": cmd_nested_cv}[args.command](cfg)
    except DrybeanError as exc:
        print(f"drybean: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"drybean: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
