"""
Soft-margin SVM trained by sequential minimal optimization.

The solver works on the dual in minimisation form

    min_a  1/2 a^T Q a - e^T a,   Q_ij = y_i y_j K_ij
    s.t.   y^T a = 0,  0 <= a_i <= C

using second-order working-set selection on a precomputed Gram matrix.
Ties in the selection go to the lowest index, so training is fully
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import rbf_gram
from .quantum import QuantumFeatureMap, quantum_gram

NORMAL = 1
ANOMALOUS = -1

_TAU = 1e-12


class SvmTrainingError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """``kind`` is "rbf" (uses ``gamma``) or "quantum" (uses ``fmap``)."""

    kind: str = "rbf"
    gamma: float = 1.0
    fmap: QuantumFeatureMap | None = None

    def __post_init__(self):
        if self.kind not in ("rbf", "quantum"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.kind == "quantum" and self.fmap is None:
            object.__setattr__(self, "fmap", QuantumFeatureMap())

    @classmethod
    def rbf(cls, gamma: float = 1.0) -> "KernelSpec":
        return cls("rbf", gamma=gamma)

    @classmethod
    def quantum(cls, fmap: QuantumFeatureMap | None = None) -> "KernelSpec":
        return cls("quantum", fmap=fmap or QuantumFeatureMap())

    def gram(self, X, Y=None) -> np.ndarray:
        if self.kind == "rbf":
            return rbf_gram(X, Y, self.gamma)
        return quantum_gram(X, Y, self.fmap)

    def to_dict(self) -> dict:
        if self.kind == "rbf":
            return {"kind": "rbf", "gamma": self.gamma}
        return {"kind": "quantum", "feature_map": self.fmap.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        if d["kind"] == "rbf":
            return cls.rbf(float(d["gamma"]))
        return cls.quantum(QuantumFeatureMap.from_dict(d["feature_map"]))


@dataclass
class KernelModel:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: KernelSpec
    C: float
    alphas: np.ndarray | None = field(default=None, repr=False)
    schema: str | None = None
    scaler: dict | None = None
    n_iter: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(
                f"feature length {X.shape[1]} does not match model ({self.support_vectors.shape[1]})"
            )
        K = self.kernel.gram(X, self.support_vectors)
        return K @ self.dual_coefs + self.bias


def dual_objective(alpha, y, K) -> float:
    """Minimisation-form dual objective 1/2 a^T Q a - sum(a)."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(0.5 * ay @ K @ ay - np.sum(alpha))


def _check_psd(K: np.ndarray) -> None:
    w = np.linalg.eigvalsh(0.5 * (K + K.T))
    if w[0] < -1e-6:
        raise SvmTrainingError(f"kernel matrix is not PSD: min eigenvalue {w[0]:.3e}")


def smo_solve(K: np.ndarray, y: np.ndarray, C: float = 10.0, tol: float = 1e-3,
              max_iter: int = 1_000_000) -> tuple[np.ndarray, float, int]:
    """Solve the dual for a precomputed Gram matrix.

    Returns ``(alpha, rho, iterations)`` where the decision function is
    ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    QD = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * G
        up_score = np.where(up, score, -np.inf)
        i = int(np.argmax(up_score))
        g_max = up_score[i]
        low_score = np.where(low, score, np.inf)
        g_min = low_score.min()
        if g_max - g_min < tol:
            break
        b = g_max - score
        cand = low & (b > 0)
        a = QD[i] + QD - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, _TAU)
        obj = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))
        it += 1

        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * Q[i, j], _TAU)
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * Q[i, j], _TAU)
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total
        G += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub = np.where(((y < 0) & (alpha >= C)) | ((y > 0) & (alpha <= 0)), yG, np.inf).min()
        lb = np.where(((y > 0) & (alpha >= C)) | ((y < 0) & (alpha <= 0)), yG, -np.inf).max()
        rho = float(0.5 * (ub + lb)) if math.isfinite(ub) and math.isfinite(lb) else float(
            ub if math.isfinite(ub) else lb)
    return alpha, rho, it


def kkt_violation(alpha, y, K, C: float) -> float:
    """Maximal violating-pair gap m(a) - M(a); <= tol at a solution."""
    y = np.asarray(y, dtype=float)
    G = (y[:, None] * y[None, :] * K) @ alpha - 1.0
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    score = -y * G
    return float(max(score[up].max() - score[low].min(), 0.0))


def smo_train(X, y, kernel: KernelSpec = KernelSpec(), C: float = 10.0, tol: float = 1e-3,
              schema: str | None = None, scaler: dict | None = None) -> KernelModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] != y.shape[0]:
        raise SvmTrainingError("X and y have different lengths")
    if X.shape[0] < 2:
        raise SvmTrainingError("need at least two samples")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise SvmTrainingError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise SvmTrainingError("both classes must be present")
    if not C > 0:
        raise SvmTrainingError("C must be positive")
    K = kernel.gram(X)
    _check_psd(K)
    alpha, rho, it = smo_solve(K, y, C, tol)
    sv = alpha > 0
    return KernelModel(
        support_vectors=X[sv].copy(),
        dual_coefs=(alpha * y)[sv],
        bias=-rho,
        kernel=kernel,
        C=C,
        alphas=alpha,
        schema=schema,
        scaler=scaler,
        n_iter=it,
    )


def svm_decision(model: KernelModel, x) -> float:
    return float(model.decision_function(np.asarray(x, dtype=float)[None, :])[0])


def svm_predict(model: KernelModel, x, schema: str | None = None) -> int:
    """``NORMAL`` (+1) when the decision value is positive, else ``ANOMALOUS``.

    A decision value of exactly zero is classified as anomalous.
    """
    if schema is not None and model.schema is not None and schema != model.schema:
        raise ValueError(f"feature schema {schema!r} does not match model schema {model.schema!r}")
    return NORMAL if svm_decision(model, x) > 0 else ANOMALOUS
