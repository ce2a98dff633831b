"""Dry bean multiclass classification pipeline built from scratch.

Standard scaling, per-class z-score outlier removal, PCA via Jacobi
rotations, SMO-trained kernel SVMs, softmax gradient-boosted trees and
nested cross-validation with grid search.
"""

__version__ = "0.1.0"
