"""Fitted transforms: standard scaler, per-class z-score outlier filter, PCA."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from drybean.dataset import Dataset
from drybean.errors import InputError
from drybean.linalg import as_matrix, covariance, symmetric_eigen


@dataclass(frozen=True)
class ScalerParams:
    means: np.ndarray
    stds: np.ndarray


def _column_moments(X: np.ndarray, ddof: int = 0) -> tuple[np.ndarray, np.ndarray]:
    origin = X[0]
    shifted = X - origin
    mean = shifted.mean(axis=0)
    var = ((shifted - mean) ** 2).sum(axis=0) / (X.shape[0] - ddof)
    return origin + mean, np.sqrt(var)


def scaler_fit(X, feature_names=None) -> ScalerParams:
    """Per-column population mean and standard deviation."""
    X = as_matrix(X)
    if X.shape[0] < 2:
        raise InputError("scaler needs at least 2 rows")
    means, stds = _column_moments(X)
    for j in np.flatnonzero(stds == 0.0):
        name = feature_names[j] if feature_names is not None else f"#{j}"
        raise InputError(f"constant column {name}")
    return ScalerParams(means, stds)


def scaler_apply(params: ScalerParams, X) -> np.ndarray:
    X = as_matrix(X)
    if X.shape[1] != params.means.shape[0]:
        raise InputError(f"scaler fitted on {params.means.shape[0]} columns, got {X.shape[1]}")
    return (X - params.means) / params.stds


def scaler_invert(params: ScalerParams, Z) -> np.ndarray:
    return np.asarray(Z) * params.stds + params.means


# ---------------------------------------------------------------------------
# z-score outlier filter


@dataclass(frozen=True)
class OutlierReport:
    removed_row_indices: tuple[int, ...]
    removed_per_class: dict[str, int]
    threshold: float
    ddof: int = 0
    inclusive: bool = False

    @property
    def n_removed(self) -> int:
        return len(self.removed_row_indices)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# threshold={self.threshold!r} ddof={self.ddof} inclusive={self.inclusive}\n")
        buf.write("class,removed\n")
        for name, count in self.removed_per_class.items():
            buf.write(f"{name},{count}\n")
        buf.write("removed_row_index\n")
        for i in self.removed_row_indices:
            buf.write(f"{i}\n")
        return buf.getvalue()


def class_zscores(d: Dataset, ddof: int = 0) -> np.ndarray:
    """z-scores of every cell against its own class's column statistics.

    A feature that is constant within a class gets z = 0 for that class.
    """
    z = np.zeros_like(d.features)
    for k in range(d.n_classes):
        rows = np.flatnonzero(d.labels == k)
        if rows.size == 0:
            continue
        if rows.size < 2:
            raise InputError(f"class {d.class_names[k]!r} has fewer than 2 members")
        block = d.features[rows]
        mean, std = _column_moments(block, ddof)
        safe = np.where(std > 0, std, 1.0)
        zk = (block - mean) / safe
        zk[:, std == 0] = 0.0
        z[rows] = zk
    return z


def zscore_filter(
    d: Dataset, threshold: float = 3.0, ddof: int = 0, inclusive: bool = False
) -> tuple[Dataset, OutlierReport]:
    """Drop rows with any per-class |z| beyond ``threshold``.

    Class statistics are computed once on the unfiltered class. With
    ``inclusive=False`` a row goes only when |z| > threshold; ``inclusive=True``
    also drops |z| == threshold.
    """
    if not threshold > 0:
        raise InputError("z threshold must be positive")
    z = np.abs(class_zscores(d, ddof))
    beyond = z >= threshold if inclusive else z > threshold
    removed = np.flatnonzero(beyond.any(axis=1))
    keep = np.ones(d.n_rows, dtype=bool)
    keep[removed] = False
    per_class = {
        name: int(np.count_nonzero(d.labels[removed] == k)) for k, name in enumerate(d.class_names)
    }
    report = OutlierReport(tuple(int(i) for i in removed), per_class, float(threshold), ddof, inclusive)
    return d.subset(np.flatnonzero(keep)), report


# ---------------------------------------------------------------------------
# PCA


@dataclass(frozen=True)
class PcaModel:
    component_matrix: np.ndarray  # n_features x k, columns are principal axes
    explained_variance: np.ndarray  # length k
    explained_ratio: np.ndarray  # length k
    variance_threshold: float
    input_means: np.ndarray
    all_variances: np.ndarray  # every eigenvalue, for scree output
    all_ratios: np.ndarray
    feature_names: tuple[str, ...] = ()

    @property
    def n_components(self) -> int:
        return self.component_matrix.shape[1]


def n_components_for(ratios: np.ndarray, threshold: float) -> int:
    """Smallest k whose cumulative explained ratio reaches ``threshold``."""
    cumulative = np.cumsum(ratios)
    # cumulative sums can land an ulp below 1.0
    hits = np.flatnonzero(cumulative >= threshold - 1e-12)
    return int(hits[0]) + 1 if hits.size else len(ratios)


def pca_fit(X, variance_threshold: float = 0.9999, feature_names=None, n_components: int | None = None) -> PcaModel:
    """Principal axes of ``X`` (expected already scaled).

    Keeps the fewest components reaching ``variance_threshold`` of the total
    variance, or exactly ``n_components`` when that is given.
    """
    X = as_matrix(X)
    if not 0 < variance_threshold <= 1:
        raise InputError("variance threshold must be in (0, 1]")
    eig = symmetric_eigen(covariance(X))
    variances = eig.eigenvalues
    clipped = np.clip(variances, 0.0, None)
    total = clipped.sum()
    ratios = clipped / total if total > 0 else np.full_like(clipped, 1.0 / len(clipped))
    if n_components is None:
        k = n_components_for(ratios, variance_threshold)
    else:
        if not 1 <= n_components <= X.shape[1]:
            raise InputError(f"n_components must be in [1, {X.shape[1]}]")
        k = int(n_components)
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{j}" for j in range(X.shape[1]))
    return PcaModel(
        component_matrix=eig.eigenvectors[:, :k].copy(),
        explained_variance=variances[:k].copy(),
        explained_ratio=ratios[:k].copy(),
        variance_threshold=float(variance_threshold),
        input_means=X.mean(axis=0),
        all_variances=variances,
        all_ratios=ratios,
        feature_names=names,
    )


def pca_transform(m: PcaModel, X) -> np.ndarray:
    X = as_matrix(X)
    if X.shape[1] != m.component_matrix.shape[0]:
        raise InputError(f"PCA fitted on {m.component_matrix.shape[0]} columns, got {X.shape[1]}")
    return (X - m.input_means) @ m.component_matrix


def pca_top_features(m: PcaModel, top_n: int = 4) -> list[list[str]]:
    """For each kept component, feature names ranked by |loading| (ties by column order)."""
    n_features = m.component_matrix.shape[0]
    if not 1 <= top_n <= n_features:
        raise InputError(f"top_n must be in [1, {n_features}]")
    ranked = []
    for k in range(m.n_components):
        mags = np.abs(m.component_matrix[:, k])
        order = sorted(range(n_features), key=lambda j: (-mags[j], j))
        ranked.append([m.feature_names[j] for j in order[:top_n]])
    return ranked


def scree_csv(m: PcaModel) -> str:
    buf = io.StringIO()
    buf.write("component,explained_variance,explained_ratio,cumulative_ratio\n")
    cumulative = np.cumsum(m.all_ratios)
    for k, (var, ratio, cum) in enumerate(zip(m.all_variances, m.all_ratios, cumulative), start=1):
        buf.write(f"{k},{float(var)!r},{float(ratio)!r},{float(cum)!r}\n")
    return buf.getvalue()


def loadings_csv(m: PcaModel, top_n: int = 4) -> str:
    buf = io.StringIO()
    buf.write("component," + ",".join(f"feature_{i + 1}" for i in range(top_n)) + "\n")
    for k, names in enumerate(pca_top_features(m, top_n)):
        buf.write(f"{k}," + ",".join(names) + "\n")
    return buf.getvalue()
