"""Stratified folds, metrics, grid search and nested cross-validation."""

from drybean.modelselect.folds import FoldPlan, stratified_kfold
from drybean.modelselect.grid import DEFAULT_GRIDS, GBT_GRID, SVM_GRID, ParamGrid, parse_grid
from drybean.modelselect.metrics import ConfusionMatrix, Metrics, evaluate
from drybean.modelselect.pipeline import MODES, PreprocessConfig, prepare_paper_faithful
from drybean.modelselect.search import CvReport, FoldResult, SearchResult, grid_search, nested_cv

__all__ = [
    "DEFAULT_GRIDS",
    "GBT_GRID",
    "MODES",
    "SVM_GRID",
    "ConfusionMatrix",
    "CvReport",
    "FoldPlan",
    "FoldResult",
    "Metrics",
    "ParamGrid",
    "PreprocessConfig",
    "SearchResult",
    "evaluate",
    "grid_search",
    "nested_cv",
    "parse_grid",
    "prepare_paper_faithful",
    "stratified_kfold",
]
