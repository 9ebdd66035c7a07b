"""Radial-basis kernel."""

from __future__ import annotations

import numpy as np


def rbf_kernel(x, x2, gamma: float = 1.0) -> float:
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape:
        raise ValueError(f"feature length mismatch: {x.shape} vs {x2.shape}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    d = x - x2
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_gram(X, Y=None, gamma: float = 1.0) -> np.ndarray:
    """Pairwise RBF kernel matrix between the rows of X and Y."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"feature length mismatch: {X.shape[1]} vs {Y.shape[1]}")
    sq = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
    np.maximum(sq, 0.0, out=sq)
    K = np.exp(-gamma * sq)
    if Y is X:
        # exact symmetry and unit diagonal despite cancellation in sq
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    return K
