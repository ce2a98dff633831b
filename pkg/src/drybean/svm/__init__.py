"""Kernel SVM: SMO binary solver and one-vs-one multiclass wrapper."""

from drybean.svm.kernels import KernelSpec, kernel_eval, kernel_matrix, resolve_gamma
from drybean.svm.multiclass import (
    PairMachine,
    SvmModel,
    decision_values,
    fit_svm,
    model_from_json,
    model_to_json,
    svm_predict,
    svm_train,
)
from drybean.svm.smo import BinarySolution, SvmHyper, dual_objective, smo_train_binary

__all__ = [
    "BinarySolution",
    "KernelSpec",
    "PairMachine",
    "SvmHyper",
    "SvmModel",
    "decision_values",
    "dual_objective",
    "fit_svm",
    "kernel_eval",
    "kernel_matrix",
    "model_from_json",
    "model_to_json",
    "resolve_gamma",
    "smo_train_binary",
    "svm_predict",
    "svm_train",
]
