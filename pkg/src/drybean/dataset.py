"""Labeled feature table: CSV loading, label encoding and summaries."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from drybean.errors import InputError


class DatasetError(InputError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus integer-encoded labels.

    ``labels[i]`` indexes into ``class_names``, which is sorted ascending so the
    encoding is deterministic.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DatasetError("features must be a 2-D array")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DatasetError(
                f"labels length {labels.shape[0]} does not match {features.shape[0]} feature rows"
            )
        if features.shape[1] != len(self.feature_names):
            raise DatasetError("feature_names length does not match the feature columns")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DatasetError("duplicate feature names")
        names = tuple(self.class_names)
        if list(names) != sorted(set(names)):
            raise DatasetError("class_names must be sorted and unique")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise DatasetError("label id outside [0, n_classes)")
        if not np.all(np.isfinite(features)):
            raise DatasetError("non-finite feature value")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, rows) -> Dataset:
        """Rows selected by index or mask; class_names are kept as-is."""
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names, self.class_names)

    def with_features(self, features: np.ndarray, feature_names=None) -> Dataset:
        if feature_names is None:
            feature_names = self.feature_names
        return Dataset(features, self.labels, tuple(feature_names), self.class_names)

    def decoded_labels(self) -> list[str]:
        return [self.class_names[i] for i in self.labels]


@dataclass(frozen=True)
class ClassShare:
    name: str
    count: int
    fraction: float


@dataclass(frozen=True)
class ClassDistribution:
    shares: tuple[ClassShare, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.shares)

    def __len__(self):
        return len(self.shares)

    def fraction_of(self, name: str) -> float:
        for share in self.shares:
            if share.name == name:
                return share.fraction
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("class,count,fraction\n")
        for s in self.shares:
            buf.write(f"{s.name},{s.count},{s.fraction!r}\n")
        return buf.getvalue()


def from_string_labels(features, label_strings, feature_names) -> Dataset:
    """Build a Dataset, encoding labels by their rank in sorted order."""
    class_names = tuple(sorted(set(label_strings)))
    index = {name: i for i, name in enumerate(class_names)}
    labels = np.array([index[s] for s in label_strings], dtype=np.int64)
    return Dataset(np.asarray(features, dtype=np.float64), labels, tuple(feature_names), class_names)


def load_csv(path: str | os.PathLike, label_column: str = "Class") -> Dataset:
    """Read a comma-separated table with a header row and one label column.

    Every other column must hold finite reals. Quoted fields are not supported
    and lines starting with ``#`` are ignored. Errors name the offending row
    (1-based physical line) and column.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"data file not found: {path}")
    with open(path, encoding="utf-8-sig", newline="") as fh:
        text = fh.read()
    if '"' in text:
        raise DatasetError(f"{path}: quoted fields are not supported")

    # '#' lines are comments; blank them so reported row numbers stay physical
    lines = ["" if line.startswith("#") else line for line in text.split("\n")]
    reader = enumerate(csv.reader(io.StringIO("\n".join(lines))), start=1)
    header = None
    for _, record in reader:
        if record and any(cell.strip() for cell in record):
            header = [h.strip() for h in record]
            break
    if header is None:
        raise DatasetError(f"{path}: missing header row")
    seen = set()
    for name in header:
        if not name:
            raise DatasetError(f"{path}: empty column name in header")
        if name in seen:
            raise DatasetError(f"{path}: duplicate header column {name!r}")
        seen.add(name)
    if label_column not in header:
        raise DatasetError(f"{path}: label column {label_column!r} not in header")

    label_idx = header.index(label_column)
    feature_idx = [j for j in range(len(header)) if j != label_idx]
    feature_names = [header[j] for j in feature_idx]

    rows: list[list[float]] = []
    label_strings: list[str] = []
    for lineno, record in reader:
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(header):
            raise DatasetError(
                f"{path}: row {lineno} has {len(record)} fields, expected {len(header)}"
            )
        values = []
        for j in feature_idx:
            cell = record[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: row {lineno}, column {header[j]!r}: cannot parse {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise DatasetError(f"{path}: row {lineno}, column {header[j]!r}: non-finite value")
            values.append(v)
        label = record[label_idx].strip()
        if not label:
            raise DatasetError(f"{path}: row {lineno}: empty label")
        rows.append(values)
        label_strings.append(label)

    if not rows:
        raise DatasetError(f"{path}: no data rows")
    features = np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
    return from_string_labels(features, label_strings, feature_names)


def write_csv(d: Dataset, path: str | os.PathLike, label_column: str = "Class") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join([*d.feature_names, label_column]) + "\n")
        for row, label in zip(d.features, d.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{d.class_names[label]}\n")


def class_distribution(d: Dataset) -> ClassDistribution:
    """Per-class counts and fractions, largest class first (ties by class id)."""
    if d.n_rows == 0:
        raise DatasetError("empty dataset")
    counts = np.bincount(d.labels, minlength=d.n_classes)
    order = sorted((i for i in range(d.n_classes) if counts[i] > 0), key=lambda i: (-counts[i], i))
    total = int(counts.sum())
    return ClassDistribution(
        tuple(ClassShare(d.class_names[i], int(counts[i]), float(counts[i] / total)) for i in order)
    )


def correlation_matrix(d: Dataset) -> np.ndarray:
    """Pearson correlation between feature columns (population moments).

    The result is exactly symmetric with an exact unit diagonal.
    """
    if d.n_rows < 2:
        raise DatasetError("correlation needs at least 2 rows")
    X = d.features - d.features[0]
    centered = X - X.mean(axis=0)
    std = np.sqrt((centered**2).mean(axis=0))
    for j, s in enumerate(std):
        if s == 0.0:
            raise DatasetError(f"zero-variance column {d.feature_names[j]!r}")
    z = centered / std
    corr = (z.T @ z) / d.n_rows
    corr = np.clip(np.triu(corr, 1), -1.0, 1.0)
    corr = corr + corr.T
    np.fill_diagonal(corr, 1.0)
    return corr


def matrix_to_csv(matrix: np.ndarray, names) -> str:
    buf = io.StringIO()
    buf.write("," + ",".join(names) + "\n")
    for name, row in zip(names, matrix):
        buf.write(name + "," + ",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def stratified_subsample(d: Dataset, n: int, seed: int) -> Dataset:
    """Seeded stratified subsample of ``n`` rows, keeping original row order.

    Class quotas follow largest-remainder apportionment of the class shares.
    """
    if n >= d.n_rows:
        return d
    if n <= 0:
        raise DatasetError("subsample size must be positive")
    counts = np.bincount(d.labels, minlength=d.n_classes)
    exact = counts * (n / d.n_rows)
    quota = np.floor(exact).astype(np.int64)
    remainder = n - int(quota.sum())
    order = sorted(range(d.n_classes), key=lambda k: (-(exact[k] - quota[k]), k))
    for k in order[:remainder]:
        quota[k] += 1
    rng = np.random.default_rng(seed)
    keep = []
    for k in range(d.n_classes):
        members = np.flatnonzero(d.labels == k)
        if quota[k] > 0:
            keep.append(rng.choice(members, size=int(quota[k]), replace=False))
    rows = np.sort(np.concatenate(keep))
    return d.subset(rows)
