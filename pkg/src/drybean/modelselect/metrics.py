from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from drybean.errors import InputError


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows = true class, columns = predicted class
    class_names: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("true\\pred," + ",".join(self.class_names) + "\n")
        for name, row in zip(self.class_names, self.counts):
            buf.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
        return buf.getvalue()

    def render(self) -> str:
        names = list(self.class_names)
        width = max(max(len(n) for n in names), len(str(self.counts.max())), 4)
        lines = [" " * width + " | " + " ".join(n[:width].rjust(width) for n in names)]
        lines.append("-" * len(lines[0]))
        for name, row in zip(names, self.counts):
            lines.append(name.rjust(width) + " | " + " ".join(str(int(v)).rjust(width) for v in row))
        return "\n".join(lines)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]


def _ratio(num, den):
    return np.divide(num, den, out=np.zeros(len(num)), where=den > 0)


def evaluate(true, predicted, class_names) -> tuple[ConfusionMatrix, Metrics]:
    """Confusion counts plus accuracy and micro/macro precision, recall, F1.

    Undefined per-class ratios (0/0) count as 0; macro averages run over the
    classes that occur in either vector. Micro figures are computed
    from integer totals, so micro recall and micro F1 equal accuracy exactly.
    """
    true = np.asarray(true, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if true.shape != predicted.shape:
        raise InputError(f"length mismatch: {true.shape[0]} true vs {predicted.shape[0]} predicted")
    if true.size == 0:
        raise InputError("cannot evaluate an empty prediction set")
    n_classes = len(class_names)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (true, predicted), 1)

    tp = np.diag(counts).astype(np.float64)
    pred_tot = counts.sum(axis=0).astype(np.float64)
    true_tot = counts.sum(axis=1).astype(np.float64)
    precision = _ratio(tp, pred_tot)
    recall = _ratio(tp, true_tot)
    f1 = _ratio(2 * tp, pred_tot + true_tot)

    seen = (pred_tot + true_tot) > 0
    total = int(counts.sum())
    hits = int(np.trace(counts))
    accuracy = hits / total
    # FP and FN totals both equal total - hits in single-label data
    micro_f1 = (2 * hits) / (2 * hits + 2 * (total - hits))
    metrics = Metrics(
        accuracy=accuracy,
        micro_precision=hits / total,
        micro_recall=hits / total,
        micro_f1=micro_f1,
        macro_precision=float(precision[seen].mean()),
        macro_recall=float(recall[seen].mean()),
        macro_f1=float(f1[seen].mean()),
        per_class_precision=tuple(float(v) for v in precision),
        per_class_recall=tuple(float(v) for v in recall),
        per_class_f1=tuple(float(v) for v in f1),
    )
    return ConfusionMatrix(counts, tuple(class_names)), metrics
