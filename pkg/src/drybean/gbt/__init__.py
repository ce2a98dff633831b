"""Gradient-boosted regression trees with a softmax multiclass objective."""

from drybean.gbt.booster import (
    GbtHyper,
    GbtModel,
    fit_gbt,
    gbt_predict,
    gbt_train,
    model_from_json,
    model_to_json,
    n_sampled_columns,
    staged_raw_scores,
)
from drybean.gbt.objective import log_loss, softmax, softmax_grad_hess
from drybean.gbt.tree import RegressionTree, build_tree

__all__ = [
    "GbtHyper",
    "GbtModel",
    "RegressionTree",
    "build_tree",
    "fit_gbt",
    "gbt_predict",
    "gbt_train",
    "log_loss",
    "model_from_json",
    "model_to_json",
    "n_sampled_columns",
    "softmax",
    "softmax_grad_hess",
    "staged_raw_scores",
]
