"""
Non-ML detectors: physics-based diagnostics on a Kalman-filtered flow
estimate, online sensor validation across redundant channels, and noise
profiling against a moving average.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..control import SensorKind
from ..thermal import DomainError, SgParams, implied_flowrate
from .kalman import KalmanFilter, kf_step


class Detector(str, enum.Enum):
    PBD_KF = "PBD_KF"
    OSV = "OSV"
    NP = "NP"
    SVM = "SVM"
    QSVM = "QSVM"


@dataclass
class DetectorVerdict:
    detector: Detector
    alarmed: bool
    residual: float
    t_first_alarm: float | None = None
    metadata: dict = field(default_factory=dict)


def pbd_detect(P_core: float, Ws_filtered: float, p: SgParams, tol: float = 1e-2,
               t: float | None = None) -> DetectorVerdict:
    """Relative mismatch between filtered feedwater flow and the flow that
    balances core power."""
    if not P_core > 0:
        raise DomainError(f"core power must be positive, got {P_core!r}")
    w_ref = implied_flowrate(P_core, p)
    if w_ref == 0:
        raise DomainError("implied flowrate is zero")
    residual = abs(Ws_filtered - w_ref) / w_ref
    alarmed = residual > tol
    return DetectorVerdict(Detector.PBD_KF, alarmed, residual, t if alarmed else None)


def osv_detect(readings: dict[SensorKind, list[float]], taus: dict[SensorKind, float],
               t: float | None = None) -> DetectorVerdict:
    """Alarm when any two channels of one kind disagree by more than that
    kind's tolerance. The residual is the largest pairwise deviation
    divided by its tolerance, so ``alarmed == residual > 1``."""
    residual = 0.0
    skipped = []
    worst = None
    for kind, values in readings.items():
        if len(values) < 2:
            skipped.append(kind.value)
            continue
        tau = taus[kind]
        dev = max(abs(a - b) for a, b in itertools.combinations(values, 2))
        if dev / tau > residual:
            residual = dev / tau
            worst = kind.value
    alarmed = residual > 1.0
    meta = {"skipped": skipped}
    if worst is not None:
        meta["worst_kind"] = worst
    return DetectorVerdict(Detector.OSV, alarmed, residual, t if alarmed else None, meta)


def np_detect(window, current: float, etas: tuple[float, float] = (1e-3, 1.0),
              t: float | None = None) -> DetectorVerdict:
    """Single-step moving-average test.

    ``d = |mean(window) - current|``; alarm when ``d > eta_upper`` (noisy or
    jumping signal) or ``d < eta_lower`` (signal too clean).
    """
    eta_lower, eta_upper = etas
    d = abs(float(np.mean(window)) - current)
    if d > eta_upper:
        branch = "upper"
    elif d < eta_lower:
        branch = "lower"
    else:
        branch = None
    alarmed = branch is not None
    return DetectorVerdict(Detector.NP, alarmed, d, t if alarmed else None, {"branch": branch})


class AlarmLatch:
    """Keeps the first alarm time of a detector across a run."""

    def __init__(self, detector: Detector):
        self.detector = detector
        self.t_first_alarm: float | None = None
        self.metadata: dict = {}

    def record(self, v: DetectorVerdict, t: float) -> DetectorVerdict:
        if v.alarmed and self.t_first_alarm is None:
            self.t_first_alarm = t
            self.metadata = dict(v.metadata)
        v.t_first_alarm = self.t_first_alarm
        return v

    @property
    def alarmed(self) -> bool:
        return self.t_first_alarm is not None


@dataclass(frozen=True)
class PbdConfig:
    tol: float = 1e-2
    q_ws: float = 0.15  # kg/s, process-noise std per step
    q_z0: float = 1.2e-3  # m
    burn_in_steps: int = 10


class PhysicsDiagnostics:
    """Kalman-filtered flow/level estimate and the power-balance residual.

    The filter state is [Ws, z0] with a random-walk transition; it is fed
    the flow and level readings the controller consumes.
    """

    def __init__(self, cfg: PbdConfig, p: SgParams, x0, sigma_ws: float, sigma_z0: float):
        self.cfg = cfg
        self.p = p
        r = [max(sigma_ws, 1e-9) ** 2, max(sigma_z0, 1e-12) ** 2]
        self.kf = KalmanFilter.random_walk(x0, r, [cfg.q_ws ** 2, cfg.q_z0 ** 2], r)
        self.steps = 0
        self.latch = AlarmLatch(Detector.PBD_KF)
        self.last_innovation = np.zeros(2)

    def step(self, ws_reading: float, z0_reading: float, P_core: float, t: float) -> DetectorVerdict | None:
        _, self.last_innovation = kf_step(self.kf, (ws_reading, z0_reading))
        self.steps += 1
        if self.steps <= self.cfg.burn_in_steps:
            return None
        v = pbd_detect(P_core, float(self.kf.x_hat[0]), self.p, self.cfg.tol, t)
        return self.latch.record(v, t)

    @property
    def ws_estimate(self) -> float:
        return float(self.kf.x_hat[0])


@dataclass(frozen=True)
class OsvConfig:
    """Tolerances as fractions of each kind's nominal value."""

    tau_lt: float = 0.10
    tau_ft: float = 0.10
    tau_st: float = 0.10


class SensorValidator:
    def __init__(self, cfg: OsvConfig, nominal: dict[SensorKind, float]):
        self.taus = {
            SensorKind.LT: cfg.tau_lt * nominal[SensorKind.LT],
            SensorKind.FT: cfg.tau_ft * nominal[SensorKind.FT],
            SensorKind.ST: cfg.tau_st * nominal[SensorKind.ST],
        }
        self.latch = AlarmLatch(Detector.OSV)

    def step(self, readings: dict[SensorKind, list[float]], t: float) -> DetectorVerdict:
        return self.latch.record(osv_detect(readings, self.taus, t), t)


@dataclass(frozen=True)
class NpConfig:
    """Thresholds apply to readings in percent: level in % span, flows in
    % of nominal. The lower branch must hold for ``m`` consecutive steps."""

    m: int = 5
    eta_lower: float = 1e-3
    eta_upper: float = 1.0


class NoiseProfiler:
    """Per-channel moving-average noise check.

    The upper branch alarms on a single step. The lower ("too clean")
    branch alarms only after ``m`` consecutive low-deviation steps, since a
    single Gaussian draw lands inside the lower band with non-negligible
    probability.
    """

    def __init__(self, cfg: NpConfig, scale: dict[str, float]):
        self.cfg = cfg
        self.scale = scale  # multiplier from reading to percent units, per channel
        self.windows = {name: deque(maxlen=cfg.m) for name in scale}
        self.low_run = {name: 0 for name in scale}
        self.latch = AlarmLatch(Detector.NP)
        self.events: dict[str, tuple[float, str]] = {}  # branch -> first (t, channel)

    def step(self, readings: dict[str, float], t: float) -> DetectorVerdict | None:
        worst = 0.0
        alarm_meta = None
        warm = True
        for name, raw in readings.items():
            x = raw * self.scale[name]
            w = self.windows[name]
            if len(w) < self.cfg.m:
                warm = False
                w.append(x)
                continue
            v = np_detect(w, x, (self.cfg.eta_lower, self.cfg.eta_upper))
            w.append(x)
            worst = max(worst, v.residual)
            branch = v.metadata["branch"]
            if branch == "lower":
                self.low_run[name] += 1
                if self.low_run[name] >= self.cfg.m:
                    self.events.setdefault("lower", (t, name))
                    if alarm_meta is None:
                        alarm_meta = {"branch": "lower", "channel": name}
            else:
                self.low_run[name] = 0
                if branch == "upper":
                    self.events.setdefault("upper", (t, name))
                    if alarm_meta is None:
                        alarm_meta = {"branch": "upper", "channel": name}
        if not warm:
            return None
        alarmed = alarm_meta is not None
        v = DetectorVerdict(Detector.NP, alarmed, worst, t if alarmed else None, alarm_meta or {})
        return self.latch.record(v, t)
