"""Feature extraction for the SVM detectors."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np


class FeatureSchema(str, enum.Enum):
    # normalized power, feedwater flow, steam flow, level
    CLASSICAL4 = "Classical4"
    # level-reading spread, feedwater-reading error, flow mismatch
    QUANTUM3 = "Quantum3"

    @property
    def length(self) -> int:
        return 4 if self is FeatureSchema.CLASSICAL4 else 3


@dataclass(frozen=True)
class TelemetryStep:
    """Delivered readings at one step plus the references needed to
    normalise them. Channel ids are 1-based."""

    P_core: float
    P_nominal: float
    ws_nominal: float
    lt: tuple[float, ...]
    ft: tuple[float, ...]
    st: tuple[float, ...]
    kf_ws: float
    lt_ctrl: int = 3
    ft_ctrl: int = 1
    st_ctrl: int = 1


def extract_features(step: TelemetryStep, schema: FeatureSchema) -> np.ndarray:
    """Unscaled feature vector.

    Quantum3 entries are in percent (level spread in % span, flow terms in
    % of nominal flow); they still need ``FeatureScaler`` before the
    quantum kernel.
    """
    for name, n, idx in (("LT", len(step.lt), step.lt_ctrl), ("FT", len(step.ft), step.ft_ctrl),
                         ("ST", len(step.st), step.st_ctrl)):
        if not 1 <= idx <= n:
            raise ValueError(f"missing {name} channel {idx}")
    lt = step.lt[step.lt_ctrl - 1]
    ft = step.ft[step.ft_ctrl - 1]
    st = step.st[step.st_ctrl - 1]
    if schema is FeatureSchema.CLASSICAL4:
        return np.array([step.P_core / step.P_nominal, ft / step.ws_nominal,
                         st / step.ws_nominal, lt / 100.0])
    if len(step.lt) < 2:
        raise ValueError("Quantum3 needs at least two LT channels")
    spread = max(abs(a - b) for a, b in itertools.combinations(step.lt, 2))
    flow_err = 100.0 * abs(ft - step.kf_ws) / step.ws_nominal
    mismatch = 100.0 * abs(st - ft) / step.ws_nominal
    return np.array([spread, flow_err, mismatch])


@dataclass(frozen=True)
class FeatureScaler:
    """Min-max map of training bounds onto [0, span]; values outside the
    training range are clipped."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    span: float = math.pi

    @classmethod
    def fit(cls, X, span: float = math.pi) -> "FeatureScaler":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return cls(tuple(float(v) for v in X.min(0)), tuple(float(v) for v in X.max(0)), span)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        lo = np.asarray(self.lo)
        width = np.asarray(self.hi) - lo
        width = np.where(width > 0, width, 1.0)
        return np.clip((X - lo) / width, 0.0, 1.0) * self.span

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "span": self.span}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureScaler":
        return cls(tuple(d["lo"]), tuple(d["hi"]), float(d["span"]))
