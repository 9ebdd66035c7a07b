"""Closed-loop run of one scenario: plant, controller, attacks, detectors."""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..attacks import AttackClass, AttackEngine, CONTROLLER_PARAMS, VALVE_SIGNAL
from ..control import SensorKind, TripStatus, check_trip, make_sensor_suite, sample_sensor, sglcs_step
from ..diagnostics.features import FeatureSchema, TelemetryStep, extract_features
from ..diagnostics.model_io import load_model, model_scaler
from ..diagnostics.physics import (
    AlarmLatch, Detector, DetectorVerdict, NoiseProfiler, PhysicsDiagnostics, SensorValidator,
)
from ..diagnostics.svm import ANOMALOUS, KernelModel
from ..thermal import implied_flowrate, initial_state, nominal_power, step_plant
from .scenario import INITIAL_CONDITIONS, Scenario

log = logging.getLogger(__name__)

DETECTORS = (Detector.PBD_KF, Detector.OSV, Detector.NP, Detector.SVM, Detector.QSVM)
_DET_COLUMN = {Detector.PBD_KF: "pbd", Detector.OSV: "osv", Detector.NP: "np",
               Detector.SVM: "svm", Detector.QSVM: "qsvm"}


class Outcome(str, enum.Enum):
    TRIPPED = "Tripped"
    OVER_TIME = "OverTime"
    BASELINE = "Baseline"
    ERROR = "Error"


@dataclass
class RunResult:
    name: str
    seed: int
    outcome: Outcome
    t_trip: float | None = None
    t_insertion: float | None = None
    t_first_alarm: dict = field(default_factory=dict)
    false_positive: dict = field(default_factory=dict)
    alarm_detail: dict = field(default_factory=dict)
    enabled: tuple = ()
    telemetry_path: str | None = None
    telemetry: list | None = field(default=None, repr=False)
    columns: list | None = field(default=None, repr=False)
    error: str | None = None
    steps: int = 0

    def detection_latency(self, det: Detector) -> float | None:
        t = self.t_first_alarm.get(det)
        if t is None or self.t_insertion is None or self.false_positive.get(det):
            return None
        return t - self.t_insertion


class MlDetector:
    """SVM verdict stream: alarm whenever the classifier says anomalous."""

    def __init__(self, model: KernelModel, detector: Detector, warmup_steps: int):
        self.model = model
        self.detector = detector
        self.schema = FeatureSchema(model.schema)
        self.scaler = model_scaler(model)
        self.warmup_steps = warmup_steps
        self.steps = 0
        self.latch = AlarmLatch(detector)

    def step(self, ts: TelemetryStep, t: float) -> DetectorVerdict | None:
        self.steps += 1
        if self.steps <= self.warmup_steps:
            return None
        x = extract_features(ts, self.schema)
        if self.scaler is not None:
            x = self.scaler.transform(x)
        value = float(self.model.decision_function(x[None, :])[0])
        alarmed = (1 if value > 0 else -1) == ANOMALOUS
        v = DetectorVerdict(self.detector, alarmed, value, t if alarmed else None)
        return self.latch.record(v, t)


def telemetry_columns(s: Scenario) -> list[str]:
    c = s.control
    cols = ["t", "level_true"]
    cols += [f"LT{i}" for i in range(1, c.n_lt + 1)]
    cols += [f"FT{i}" for i in range(1, c.n_ft + 1)]
    cols += [f"ST{i}" for i in range(1, c.n_st + 1)]
    cols += ["valve_cmd", "valve_pos", "Ws", "Wst", "P_sg", "kf_ws"]
    for det in DETECTORS:
        cols += [f"{_DET_COLUMN[det]}_residual", f"{_DET_COLUMN[det]}_alarm"]
    return cols


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_telemetry(path, columns, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def load_models(s: Scenario) -> dict:
    models = {}
    if s.detectors.svm is not None:
        models[Detector.SVM] = load_model(s.detectors.svm.path)
    if s.detectors.qsvm is not None:
        models[Detector.QSVM] = load_model(s.detectors.qsvm.path)
    return models


def run_scenario(s: Scenario, models: dict | None = None, telemetry_path=None,
                 keep_telemetry: bool = True, initial_level: float | None = None) -> RunResult:
    """Simulate one scenario to trip, over-time or the configured duration.

    Each step: sample sensors, deliver them through the attack engine, run
    the cascade controller, deliver the valve command, evaluate detectors
    on the delivered readings, then advance the plant. Numerical failures
    inside the loop produce an ``Outcome.ERROR`` result rather than an
    exception. ``initial_level`` starts the true level away from the
    setpoint (controller integrals still start at zero).
    """
    models = load_models(s) if models is None else models
    telemetry_path = telemetry_path or s.output.telemetry
    p, cl, c = s.plant, s.closure, s.control
    dt = s.dt

    master = np.random.SeedSequence(s.seed)
    sensor_seq, attack_seq = master.spawn(2)
    P_nom = nominal_power(p, cl)
    P_core = INITIAL_CONDITIONS[s.initial_condition] * P_nom
    state = initial_state(p, cl, P_core, c.level_setpoint)
    if initial_level is not None:
        state = replace(state, z0=cl.z_from_level(initial_level), level_nr=initial_level)
    c1, c2 = c.make_controllers(valve_bias=state.v)
    params_nominal = {"Kp1": c1.Kp, "tau1": c1.tau_i, "Kp2": c2.Kp, "tau2": c2.tau_i}
    sensors = make_sensor_suite(c, cl.ws_nominal, sensor_seq)
    engine = AttackEngine(list(s.attacks), attack_seq)
    param_attack = any(a.target.kind == "param" for a in engine.attacks)
    flow_scale = 100.0 / cl.ws_nominal
    span = cl.z_high - cl.z_low

    pbd = PhysicsDiagnostics(s.detectors.pbd, p, [state.Ws, state.z0],
                             sigma_ws=c.sigma_ft * cl.ws_nominal, sigma_z0=c.sigma_lt / 100.0 * span)
    osv = SensorValidator(s.detectors.osv, {SensorKind.LT: c.level_setpoint,
                                            SensorKind.FT: cl.ws_nominal,
                                            SensorKind.ST: cl.ws_nominal})
    np_scale = {name: (1.0 if ch.kind is SensorKind.LT else flow_scale) for name, ch in sensors.items()}
    noise = NoiseProfiler(s.detectors.np, np_scale)
    ml = [MlDetector(m, det, s.detectors.pbd.burn_in_steps) for det, m in sorted(models.items())]

    names = {k: [n for n, ch in sensors.items() if ch.kind is k] for k in SensorKind}
    lt_c, ft_c, st_c = f"LT{c.controller_lt}", f"FT{c.controller_ft}", f"ST{c.controller_st}"
    latches = {Detector.PBD_KF: pbd.latch, Detector.OSV: osv.latch, Detector.NP: noise.latch}
    latches.update({d.detector: d.latch for d in ml})

    columns = telemetry_columns(s)
    rows = [] if (keep_telemetry or telemetry_path) else None
    duration = s.run_duration
    trip = s.trip
    n_steps = int(round(duration / dt))
    outcome = None
    t_trip = None
    error = None
    k = 0
    try:
        for k in range(n_steps):
            t = round(k * dt, 9)
            truth = {SensorKind.LT: state.level_nr, SensorKind.FT: state.Ws, SensorKind.ST: state.Wst}
            raw = {name: sample_sensor(truth[ch.kind], ch, t=t) for name, ch in sensors.items()}
            seen = engine.deliver_sensors(raw, t)

            if param_attack:
                live = engine.deliver_commands(params_nominal, t)
                c1.Kp, c1.tau_i, c2.Kp, c2.tau_i = (live[n] for n in CONTROLLER_PARAMS)
            v_cmd = sglcs_step(seen[lt_c], c.level_setpoint, seen[ft_c], seen[st_c], c1, c2, dt, flow_scale)
            v_plant = engine.deliver_commands({VALVE_SIGNAL: v_cmd}, t)[VALVE_SIGNAL]

            verdicts = {}
            z_reading = cl.z_from_level(seen[lt_c])
            verdicts[Detector.PBD_KF] = pbd.step(seen[ft_c], z_reading, P_core, t)
            by_kind = {kind: [seen[n] for n in names[kind]] for kind in SensorKind}
            verdicts[Detector.OSV] = osv.step(by_kind, t)
            verdicts[Detector.NP] = noise.step(seen, t)
            if ml:
                ts = TelemetryStep(P_core, P_nom, cl.ws_nominal,
                                   tuple(by_kind[SensorKind.LT]), tuple(by_kind[SensorKind.FT]),
                                   tuple(by_kind[SensorKind.ST]), pbd.ws_estimate,
                                   c.controller_lt, c.controller_ft, c.controller_st)
                for d in ml:
                    verdicts[d.detector] = d.step(ts, t)

            if rows is not None:
                row = [t, state.level_nr]
                row += [seen[n] for n in names[SensorKind.LT]]
                row += [seen[n] for n in names[SensorKind.FT]]
                row += [seen[n] for n in names[SensorKind.ST]]
                row += [v_cmd, state.v, state.Ws, state.Wst, state.P_sg, pbd.ws_estimate]
                for det in DETECTORS:
                    v = verdicts.get(det)
                    row += [None, None] if v is None else [float(v.residual), bool(v.alarmed)]
                rows.append(row)

            state = step_plant(state, v_plant, P_core, dt, p, cl)
            state = replace(state, t=round((k + 1) * dt, 9))
            status = check_trip(state, trip)
            if status is TripStatus.TRIPPED_LEVEL:
                state = replace(state, tripped=True)
                outcome, t_trip = Outcome.TRIPPED, state.t
                break
            if status is TripStatus.OVER_TIME:
                break
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        log.warning("run %s aborted at step %d: %s", s.name, k, exc)
        outcome, error = Outcome.ERROR, f"{type(exc).__name__}: {exc}"

    t_ins = engine.first_insertion
    if outcome is None:
        if t_ins is None:
            outcome = Outcome.BASELINE
        elif duration >= s.max_runtime:
            outcome = Outcome.OVER_TIME
        else:
            outcome = Outcome.BASELINE if t_ins >= duration else Outcome.OVER_TIME

    first = {det: latch.t_first_alarm for det, latch in latches.items()}
    fp = {det: (t is not None and (t_ins is None or t < t_ins)) for det, t in first.items()}
    detail = {det: latch.metadata for det, latch in latches.items() if latch.alarmed}
    if noise.events:
        detail[Detector.NP] = {**detail.get(Detector.NP, {}), "events": dict(noise.events)}
    if telemetry_path and rows is not None:
        write_telemetry(telemetry_path, columns, rows)
    return RunResult(
        name=s.name, seed=s.seed, outcome=outcome, t_trip=t_trip, t_insertion=t_ins,
        t_first_alarm=first, false_positive=fp, alarm_detail=detail, enabled=tuple(latches),
        telemetry_path=str(telemetry_path) if telemetry_path else None,
        telemetry=rows if keep_telemetry else None, columns=columns, error=error, steps=k + 1,
    )


def steady_flow(s: Scenario) -> float:
    return implied_flowrate(INITIAL_CONDITIONS[s.initial_condition] * nominal_power(s.plant, s.closure), s.plant)


__all__ = ["Outcome", "RunResult", "run_scenario", "telemetry_columns", "write_telemetry",
           "MlDetector", "load_models", "DETECTORS", "AttackClass"]
