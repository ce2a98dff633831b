"""Synthetic stand-in for the Dry Bean table.

Rows are generated from per-class ellipse geometry (area, aspect ratio,
solidity, extent) and the 16 shape columns are derived from it with the usual
morphology formulas, so columns are strongly correlated the way the real
measurements are. Class sizes default to the published counts. This is NOT
the real dataset; it exists so the pipeline can be exercised and timed
without it.
"""

from __future__ import annotations

import numpy as np

from drybean.dataset import Dataset, from_string_labels

FEATURES = (
    "Area", "Perimeter", "MajorAxisLength", "MinorAxisLength", "AspectRation",
    "Eccentricity", "ConvexArea", "EquivDiameter", "Extent", "Solidity",
    "roundness", "Compactness", "ShapeFactor1", "ShapeFactor2", "ShapeFactor3",
    "ShapeFactor4",
)

# name: (count, area mean, area sd, aspect mean, aspect sd, solidity mean, extent mean)
CLASSES = {
    "BARBUNYA": (1322, 69804.0, 10265.0, 1.585, 0.090, 0.9828, 0.750),
    "BOMBAY": (522, 173485.0, 23281.0, 1.584, 0.100, 0.9864, 0.777),
    "CALI": (1630, 75538.0, 9379.0, 1.719, 0.080, 0.9847, 0.759),
    "DERMASON": (3546, 32118.0, 4677.0, 1.462, 0.080, 0.9882, 0.753),
    "HOROZ": (1928, 53648.0, 7341.0, 2.046, 0.140, 0.9855, 0.706),
    "SEKER": (2027, 39881.0, 4814.0, 1.199, 0.060, 0.9895, 0.772),
    "SIRA": (2636, 44729.0, 4573.0, 1.519, 0.070, 0.9878, 0.759),
}


def _ellipse_perimeter(a, b):
    h = ((a - b) / (a + b)) ** 2
    return np.pi * (a + b) * (1 + 3 * h / (10 + np.sqrt(4 - 3 * h)))


def make_surrogate(seed: int = 0, scale: float = 1.0, outlier_rate: float = 0.01) -> Dataset:
    """Dry-Bean-shaped synthetic dataset; ``scale`` shrinks the class counts."""
    rng = np.random.default_rng(seed)
    rows, labels = [], []
    for name, (count, a_mu, a_sd, r_mu, r_sd, s_mu, e_mu) in CLASSES.items():
        n = max(4, int(round(count * scale)))
        area = np.abs(rng.normal(a_mu, a_sd, n)) + 1000.0
        aspect = np.maximum(rng.normal(r_mu, r_sd, n), 1.01)
        solidity = np.clip(rng.normal(s_mu, 0.004, n), 0.9, 0.9995)
        extent = np.clip(rng.normal(e_mu, 0.04, n), 0.55, 0.87)
        roughness = np.abs(rng.normal(1.0, 0.012, n)) + 0.99
        sf4 = np.clip(rng.normal(0.995, 0.004, n), 0.94, 1.0)

        wild = rng.random(n) < outlier_rate
        area = np.where(wild, area * rng.uniform(1.4, 1.9, n), area)
        aspect = np.where(wild & (rng.random(n) < 0.5), aspect * 1.25, aspect)

        major = np.sqrt(4 * area * aspect / np.pi)
        minor = major / aspect
        perimeter = _ellipse_perimeter(major / 2, minor / 2) * roughness
        convex = np.round(area / solidity)
        area = np.round(area)
        equiv = np.sqrt(4 * area / np.pi)
        block = np.column_stack([
            area,
            perimeter,
            major,
            minor,
            major / minor,
            np.sqrt(1 - (minor / major) ** 2),
            convex,
            equiv,
            extent,
            area / convex,
            4 * np.pi * area / perimeter**2,
            equiv / major,
            major / area,
            minor / area,
            (equiv / major) ** 2,
            sf4,
        ])
        rows.append(block)
        labels.extend([name] * n)
    X = np.vstack(rows)
    order = rng.permutation(X.shape[0])
    return from_string_labels(X[order], [labels[i] for i in order], FEATURES)
