"""Linear Kalman filter with identity measurement matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KalmanFilter:
    """State estimate and covariances for

        x(k) = Phi x(k-1) + w(k),   Cov w = Q
        y(k) = M x(k)     + v(k),   Cov v = R,   M = I
    """

    x_hat: np.ndarray
    P: np.ndarray
    Phi: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.x_hat = np.asarray(self.x_hat, dtype=float).copy()
        n = self.x_hat.shape[0]
        for name in ("P", "Phi", "Q", "R"):
            mat = np.asarray(getattr(self, name), dtype=float).copy()
            if mat.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}, got {mat.shape}")
            setattr(self, name, mat)
        for name in ("P", "Q", "R"):
            mat = getattr(self, name)
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(mat).min() < -1e-12:
                raise ValueError(f"{name} must be positive semidefinite")

    @property
    def Mmat(self) -> np.ndarray:
        return np.eye(self.x_hat.shape[0])

    @classmethod
    def random_walk(cls, x0, p0_diag, q_diag, r_diag) -> "KalmanFilter":
        n = len(x0)
        return cls(np.asarray(x0, float), np.diag(p0_diag), np.eye(n), np.diag(q_diag), np.diag(r_diag))


def kf_step(f: KalmanFilter, y) -> tuple[KalmanFilter, np.ndarray]:
    """Predict then update ``f`` in place with measurement ``y``.

    Returns the filter and the innovation ``y - M x_prior``. The posterior
    covariance uses the Joseph form and is re-symmetrised each step.
    A singular innovation covariance raises ``numpy.linalg.LinAlgError``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != f.x_hat.shape:
        raise ValueError(f"measurement shape {y.shape} does not match state {f.x_hat.shape}")
    M = f.Mmat
    x_prior = f.Phi @ f.x_hat
    P_prior = f.Phi @ f.P @ f.Phi.T + f.Q
    S = M @ P_prior @ M.T + f.R
    # K = P_prior M^T S^-1, solved without forming the inverse
    K = np.linalg.solve(S.T, (P_prior @ M.T).T).T
    innovation = y - M @ x_prior
    f.x_hat = x_prior + K @ innovation
    IKM = np.eye(len(y)) - K @ M
    P = IKM @ P_prior @ IKM.T + K @ f.R @ K.T
    f.P = 0.5 * (P + P.T)
    return f, innovation
