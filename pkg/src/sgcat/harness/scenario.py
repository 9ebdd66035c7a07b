"""
Scenario JSON schema.

Top-level sections: ``seed``, ``dt``, ``max_runtime``, ``duration``,
``initial_condition``, ``plant``, ``control``, ``attacks``, ``detectors``,
``output`` (plus an optional ``name``). Unknown keys are rejected at every
level. Flow-valued fields take either a bare number in kg/s or
``{"value": x, "unit": "lb/s" | "kg/s"}``.
"""

from __future__ import annotations

import copy
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..attacks import AttackClass, AttackConfigError, AttackSpec, Target, validate_schedule
from ..control import ControlConfig, SensorKind, TripConfig
from ..diagnostics.physics import NpConfig, OsvConfig, PbdConfig
from ..thermal import LB_TO_KG, ClosureConfig, SgParams


class ScenarioError(ValueError):
    """Malformed scenario file."""


# fraction of full power for each named initial condition
INITIAL_CONDITIONS = {
    "full_power": 1.00,
    "power_90": 0.90,
    "power_75": 0.75,
    "power_50": 0.50,
}

_FLOW_UNITS = {"kg/s": 1.0, "lb/s": LB_TO_KG}
_FLOW_FIELDS = {"ws_nominal"}


def _flow(value, where: str) -> float:
    if isinstance(value, dict):
        _reject_unknown(value, {"value", "unit"}, where)
        unit = value.get("unit", "kg/s")
        if unit not in _FLOW_UNITS:
            raise ScenarioError(f"{where}: unsupported flow unit {unit!r}")
        return float(value["value"]) * _FLOW_UNITS[unit]
    return float(value)


def _reject_unknown(data: dict, allowed, where: str) -> None:
    if not isinstance(data, dict):
        raise ScenarioError(f"{where}: expected an object, got {type(data).__name__}")
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise ScenarioError(f"{where}: unknown field(s) {', '.join(extra)}")


def _build(cls, data: dict | None, where: str, convert=None):
    data = dict(data or {})
    names = {f.name for f in dataclasses.fields(cls)}
    _reject_unknown(data, names, where)
    if convert:
        for key, fn in convert.items():
            if key in data:
                data[key] = fn(data[key], f"{where}.{key}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


_SPOOF_UNITS = {
    "%": 1.0, "kg/s": 1.0, "lb/s": LB_TO_KG, "fraction": 1.0, "raw": 1.0, "s": 1.0,
}


def parse_attack(data: dict, where: str = "attacks[]") -> AttackSpec:
    """Build an ``AttackSpec`` from its JSON form.

    ``target`` is ``"valve"``, ``{"sensor": "LT", "id": 3}`` or
    ``{"param": "Kp1"}``. ``unit`` applies to ``spoof_value`` and
    ``artificial_noise_sigma``.
    """
    _reject_unknown(data, {"class", "target", "spoof_value", "unit", "artificial_noise_sigma",
                           "delay", "t_insertion", "t_end", "ramp"}, where)
    try:
        cls = AttackClass.parse(data["class"])
        tgt = data["target"]
        if tgt == "valve":
            target = Target.valve()
        elif isinstance(tgt, dict) and "sensor" in tgt:
            _reject_unknown(tgt, {"sensor", "id"}, f"{where}.target")
            target = Target.sensor_channel(SensorKind(tgt["sensor"]), int(tgt["id"]))
        elif isinstance(tgt, dict) and "param" in tgt:
            _reject_unknown(tgt, {"param"}, f"{where}.target")
            target = Target.controller_param(tgt["param"])
        else:
            raise ScenarioError(f"{where}: unrecognised target {tgt!r}")
        unit = data.get("unit")
        if unit is None:
            unit = "%" if target.kind == "sensor" and target.sensor is SensorKind.LT else (
                "kg/s" if target.kind == "sensor" else "raw")
        if unit not in _SPOOF_UNITS:
            raise ScenarioError(f"{where}: unsupported unit {unit!r}")
        factor = _SPOOF_UNITS[unit]
        spoof = data.get("spoof_value")
        return AttackSpec(
            attack_class=cls,
            target=target,
            t_insertion=float(data["t_insertion"]),
            spoof_value=None if spoof is None else float(spoof) * factor,
            artificial_noise_sigma=float(data.get("artificial_noise_sigma", 0.0)) * factor,
            delay=None if data.get("delay") is None else float(data["delay"]),
            t_end=None if data.get("t_end") is None else float(data["t_end"]),
            ramp=float(data.get("ramp", 0.0)),
        )
    except KeyError as exc:
        raise ScenarioError(f"{where}: missing field {exc.args[0]!r}") from None
    except (AttackConfigError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{where}: {exc}") from exc


def attack_to_json(a: AttackSpec) -> dict:
    """Inverse of ``parse_attack`` in internal units (flows kg/s)."""
    t = a.target
    if t.kind == "sensor":
        target = {"sensor": t.sensor.value, "id": t.id}
        unit = "%" if t.sensor is SensorKind.LT else "kg/s"
    elif t.kind == "valve":
        target, unit = "valve", "fraction"
    else:
        target, unit = {"param": t.param}, "raw"
    out = {"class": a.attack_class.value, "target": target, "unit": unit, "t_insertion": a.t_insertion}
    if a.spoof_value is not None:
        out["spoof_value"] = a.spoof_value
    if a.artificial_noise_sigma:
        out["artificial_noise_sigma"] = a.artificial_noise_sigma
    if a.delay is not None:
        out["delay"] = a.delay
    if a.t_end is not None:
        out["t_end"] = a.t_end
    if a.ramp:
        out["ramp"] = a.ramp
    return out


@dataclass(frozen=True)
class ModelRef:
    path: str


@dataclass(frozen=True)
class DetectorsConfig:
    pbd: PbdConfig = PbdConfig()
    osv: OsvConfig = OsvConfig()
    np: NpConfig = NpConfig()
    svm: ModelRef | None = None
    qsvm: ModelRef | None = None


@dataclass(frozen=True)
class OutputConfig:
    telemetry: str | None = None


@dataclass(frozen=True)
class Scenario:
    seed: int = 0
    dt: float = 0.1
    max_runtime: float = 180.0
    duration: float | None = None
    initial_condition: str = "full_power"
    plant: SgParams = SgParams()
    closure: ClosureConfig = ClosureConfig()
    control: ControlConfig = ControlConfig()
    attacks: tuple[AttackSpec, ...] = ()
    detectors: DetectorsConfig = DetectorsConfig()
    output: OutputConfig = OutputConfig()
    name: str = "scenario"

    def __post_init__(self):
        if not self.dt > 0:
            raise ScenarioError("dt must be positive")
        if not self.max_runtime > 0:
            raise ScenarioError("max_runtime must be positive")
        if self.duration is not None and not self.duration > 0:
            raise ScenarioError("duration must be positive")
        if self.initial_condition not in INITIAL_CONDITIONS:
            raise ScenarioError(
                f"unknown initial_condition {self.initial_condition!r}; "
                f"choose from {sorted(INITIAL_CONDITIONS)}"
            )
        try:
            object.__setattr__(self, "attacks", tuple(validate_schedule(list(self.attacks))))
        except AttackConfigError as exc:
            raise ScenarioError(str(exc)) from exc

    @property
    def run_duration(self) -> float:
        return self.max_runtime if self.duration is None else min(self.duration, self.max_runtime)

    @property
    def trip(self) -> TripConfig:
        return dataclasses.replace(self.control.trip, max_runtime=self.max_runtime)

    def with_overrides(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


def scenario_from_dict(data: dict, base_dir: Path | None = None) -> Scenario:
    _reject_unknown(data, {"name", "seed", "dt", "max_runtime", "duration", "initial_condition",
                           "plant", "control", "attacks", "detectors", "output"}, "scenario")
    plant = data.get("plant", {})
    _reject_unknown(plant, {"params", "closure"}, "plant")
    params = _build(SgParams, plant.get("params"), "plant.params")
    closure = _build(ClosureConfig, plant.get("closure"), "plant.closure",
                     {k: _flow for k in _FLOW_FIELDS})

    control = dict(data.get("control", {}))
    trip_data = control.pop("trip", None) or {}
    if "max_runtime" in trip_data:
        raise ScenarioError("control.trip.max_runtime: set max_runtime at top level")
    trip = _build(TripConfig, trip_data, "control.trip")
    control_cfg = _build(ControlConfig, {**control, "trip": trip}, "control")

    det = data.get("detectors", {})
    _reject_unknown(det, {"pbd", "osv", "np", "svm", "qsvm"}, "detectors")
    refs = {}
    for key in ("svm", "qsvm"):
        ref = det.get(key)
        if ref is None:
            refs[key] = None
            continue
        _reject_unknown(ref, {"model"}, f"detectors.{key}")
        path = Path(ref["model"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ScenarioError(f"detectors.{key}.model: file not found: {path}")
        refs[key] = ModelRef(str(path))
    detectors = DetectorsConfig(
        pbd=_build(PbdConfig, det.get("pbd"), "detectors.pbd"),
        osv=_build(OsvConfig, det.get("osv"), "detectors.osv"),
        np=_build(NpConfig, det.get("np"), "detectors.np"),
        svm=refs["svm"],
        qsvm=refs["qsvm"],
    )
    output = _build(OutputConfig, data.get("output"), "output")
    attacks = data.get("attacks", [])
    if not isinstance(attacks, list):
        raise ScenarioError("attacks must be an array")
    specs = tuple(parse_attack(a, f"attacks[{i}]") for i, a in enumerate(attacks))
    try:
        return Scenario(
            seed=int(data.get("seed", 0)),
            dt=float(data.get("dt", 0.1)),
            max_runtime=float(data.get("max_runtime", 180.0)),
            duration=None if data.get("duration") is None else float(data["duration"]),
            initial_condition=data.get("initial_condition", "full_power"),
            plant=params,
            closure=closure,
            control=control_cfg,
            attacks=specs,
            detectors=detectors,
            output=output,
            name=str(data.get("name", "scenario")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from exc
    return scenario_from_dict(data, base_dir=path.parent)


def scenario_to_dict(s: Scenario) -> dict:
    """Serialise back to the JSON schema (internal units)."""
    control = dataclasses.asdict(s.control)
    trip = control.pop("trip")
    trip.pop("max_runtime", None)
    control["trip"] = trip
    det = {
        "pbd": dataclasses.asdict(s.detectors.pbd),
        "osv": dataclasses.asdict(s.detectors.osv),
        "np": dataclasses.asdict(s.detectors.np),
    }
    for key in ("svm", "qsvm"):
        ref = getattr(s.detectors, key)
        if ref is not None:
            det[key] = {"model": ref.path}
    return {
        "name": s.name,
        "seed": s.seed,
        "dt": s.dt,
        "max_runtime": s.max_runtime,
        "duration": s.duration,
        "initial_condition": s.initial_condition,
        "plant": {"params": dataclasses.asdict(s.plant), "closure": dataclasses.asdict(s.closure)},
        "control": control,
        "attacks": [attack_to_json(a) for a in s.attacks],
        "detectors": det,
        "output": dataclasses.asdict(s.output),
    }


def clone(s: Scenario) -> Scenario:
    return copy.deepcopy(s)
