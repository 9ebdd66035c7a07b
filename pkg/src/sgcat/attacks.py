"""
Command-inject, denial-of-service and man-in-the-middle attacks on the
signal paths of the level control loop.

Every signal travels over a ``SignalBus`` with two sides. Sensor readings
originate on the plant side and are delivered to the operator side
(controller, operator displays, diagnostics). Valve commands and
controller parameters originate on the operator side and are delivered to
the plant side (actuator, live controller). An attack only ever rewrites
the downstream side of its target; the upstream value is left untouched.
"""

from __future__ import annotations

import bisect
import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .control import SensorKind

CONTROLLER_PARAMS = ("Kp1", "tau1", "Kp2", "tau2")
VALVE_SIGNAL = "valve_cmd"


class AttackConfigError(ValueError):
    """Invalid or conflicting attack schedule."""


class AttackClass(str, enum.Enum):
    COMMAND_INJECT = "CommandInject"
    DENIAL_OF_SERVICE = "DenialOfService"
    MAN_IN_THE_MIDDLE = "ManInTheMiddle"

    @classmethod
    def parse(cls, text: str) -> "AttackClass":
        aliases = {"ci": cls.COMMAND_INJECT, "dos": cls.DENIAL_OF_SERVICE, "mim": cls.MAN_IN_THE_MIDDLE}
        key = text.strip()
        if key.lower() in aliases:
            return aliases[key.lower()]
        try:
            return cls(key)
        except ValueError:
            raise AttackConfigError(f"unknown attack class {text!r}") from None


@dataclass(frozen=True)
class Target:
    """Signal addressed by an attack.

    ``kind`` is "sensor", "valve" or "param". Sensors carry ``sensor`` and a
    1-based ``id``; parameters carry ``param`` in ``CONTROLLER_PARAMS``.
    """

    kind: str
    sensor: SensorKind | None = None
    id: int | None = None
    param: str | None = None

    def __post_init__(self):
        if self.kind == "sensor":
            if self.sensor is None or self.id is None or self.id < 1:
                raise AttackConfigError("sensor target needs a kind and a 1-based channel id")
        elif self.kind == "param":
            if self.param not in CONTROLLER_PARAMS:
                raise AttackConfigError(f"param target must be one of {CONTROLLER_PARAMS}, got {self.param!r}")
        elif self.kind != "valve":
            raise AttackConfigError(f"unknown target kind {self.kind!r}")

    @classmethod
    def sensor_channel(cls, kind: SensorKind | str, id: int) -> "Target":
        return cls("sensor", sensor=SensorKind(kind), id=id)

    @classmethod
    def valve(cls) -> "Target":
        return cls("valve")

    @classmethod
    def controller_param(cls, name: str) -> "Target":
        return cls("param", param=name)

    @property
    def signal(self) -> str:
        if self.kind == "sensor":
            return f"{self.sensor.value}{self.id}"
        if self.kind == "valve":
            return VALVE_SIGNAL
        return self.param

    @property
    def upstream_is_plant(self) -> bool:
        return self.kind == "sensor"


@dataclass(frozen=True)
class AttackSpec:
    """One scheduled attack, values in internal units.

    Level spoofs are % span, flow spoofs kg/s, valve spoofs a position in
    [0, 1]. ``ramp`` (s, MiM only) blends the delivered value linearly from
    the true reading to the spoof over that interval; 0 applies the spoof
    as a step.
    """

    attack_class: AttackClass
    target: Target
    t_insertion: float
    spoof_value: float | None = None
    artificial_noise_sigma: float = 0.0
    delay: float | None = None
    t_end: float | None = None
    ramp: float = 0.0

    def __post_init__(self):
        if self.t_insertion < 0:
            raise AttackConfigError("t_insertion must be >= 0")
        if self.t_end is not None and not self.t_end > self.t_insertion:
            raise AttackConfigError("t_end must be later than t_insertion")
        if self.attack_class is AttackClass.DENIAL_OF_SERVICE:
            if self.delay is None or not self.delay > 0:
                raise AttackConfigError("DoS attack needs a positive delay")
        elif self.spoof_value is None:
            raise AttackConfigError(f"{self.attack_class.value} attack needs a spoof_value")
        if self.target.kind == "param" and self.attack_class is not AttackClass.COMMAND_INJECT:
            raise AttackConfigError("controller-parameter targets are only valid for CommandInject")
        if self.attack_class is AttackClass.MAN_IN_THE_MIDDLE and self.target.kind != "sensor":
            raise AttackConfigError("ManInTheMiddle attacks target sensor channels")
        if self.attack_class is AttackClass.COMMAND_INJECT and self.target.kind == "sensor":
            raise AttackConfigError("CommandInject attacks target the valve or controller parameters")
        if self.artificial_noise_sigma < 0 or self.ramp < 0:
            raise AttackConfigError("artificial_noise_sigma and ramp must be >= 0")

    def active(self, t: float) -> bool:
        return t >= self.t_insertion and (self.t_end is None or t < self.t_end)

    def _window_end(self) -> float:
        return float("inf") if self.t_end is None else self.t_end


def validate_schedule(attacks: list[AttackSpec]) -> list[AttackSpec]:
    """Sort by insertion time and reject overlapping attacks on one target."""
    ordered = sorted(attacks, key=lambda a: a.t_insertion)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if a.target.signal == b.target.signal and b.t_insertion < a._window_end():
                raise AttackConfigError(
                    f"overlapping attacks on {a.target.signal}: "
                    f"[{a.t_insertion}, {a._window_end()}) and [{b.t_insertion}, {b._window_end()})"
                )
    return ordered


def mim_composite(sensor_spoof: AttackSpec, actuator_spoof: AttackSpec | None = None) -> list[AttackSpec]:
    """Combine two spoofs into one simultaneous schedule.

    With no second component this degenerates to measurement injection.
    """
    if actuator_spoof is None:
        return validate_schedule([sensor_spoof])
    if sensor_spoof.target.signal == actuator_spoof.target.signal:
        raise AttackConfigError(f"composite attack needs distinct targets, both are {sensor_spoof.target.signal}")
    return validate_schedule([sensor_spoof, actuator_spoof])


@dataclass
class SignalBus:
    """Latest value of every signal on both sides of the network.

    ``history`` keeps timestamped upstream values so a delayed consumer can
    be served the value that was current ``delay`` seconds ago.
    """

    plant: dict[str, float] = field(default_factory=dict)
    operator: dict[str, float] = field(default_factory=dict)
    stamps: dict[str, float] = field(default_factory=dict)
    upstream_plant: dict[str, bool] = field(default_factory=dict)
    history: dict[str, deque] = field(default_factory=dict)
    horizon: float = 0.0

    def publish(self, name: str, value: float, t: float, from_plant: bool) -> None:
        self.plant[name] = value
        self.operator[name] = value
        self.stamps[name] = t
        self.upstream_plant[name] = from_plant
        if self.horizon > 0:
            h = self.history.setdefault(name, deque())
            h.append((t, value))
            while len(h) > 1 and h[1][0] <= t - self.horizon:
                h.popleft()

    def upstream(self, name: str) -> float:
        return self.plant[name] if self.upstream_plant[name] else self.operator[name]

    def deliver(self, name: str, value: float) -> None:
        if self.upstream_plant[name]:
            self.operator[name] = value
        else:
            self.plant[name] = value

    def delivered(self, name: str) -> float:
        return self.operator[name] if self.upstream_plant[name] else self.plant[name]

    def value_at(self, name: str, t: float) -> float:
        """Upstream value that was current at time ``t`` (oldest kept if earlier)."""
        h = self.history.get(name)
        if not h:
            return self.upstream(name)
        times = [s for s, _ in h]
        k = bisect.bisect_right(times, t + 1e-9) - 1
        return h[max(k, 0)][1]


def _needed_horizon(attacks: list[AttackSpec]) -> float:
    delays = [a.delay for a in attacks if a.attack_class is AttackClass.DENIAL_OF_SERVICE]
    return max(delays) + 1.0 if delays else 0.0


def apply_attacks(bus: SignalBus, attacks: list[AttackSpec], t: float,
                  rng: np.random.Generator | None = None, signals: set[str] | None = None) -> SignalBus:
    """Overwrite the downstream side of every targeted signal active at ``t``.

    Only signals present on the bus (and in ``signals`` when given) are
    touched. ``rng`` feeds the artificial noise of MiM spoofs.
    """
    for a in attacks:
        name = a.target.signal
        if name not in bus.plant or (signals is not None and name not in signals):
            continue
        if not a.active(t):
            continue
        if a.attack_class is AttackClass.DENIAL_OF_SERVICE:
            bus.deliver(name, bus.value_at(name, t - a.delay))
        elif a.attack_class is AttackClass.COMMAND_INJECT:
            bus.deliver(name, a.spoof_value)
        else:
            spoof = a.spoof_value
            if a.artificial_noise_sigma > 0:
                if rng is None:
                    raise ValueError("noisy MiM attack needs a random stream")
                spoof = spoof + a.artificial_noise_sigma * rng.standard_normal()
            if a.ramp > 0:
                w = min(1.0, (t - a.t_insertion) / a.ramp)
                spoof = (1.0 - w) * bus.upstream(name) + w * spoof
            bus.deliver(name, spoof)
    return bus


class AttackEngine:
    """Validated schedule plus the bus and noise streams for one run."""

    def __init__(self, attacks: list[AttackSpec], seed_seq: np.random.SeedSequence):
        self.attacks = validate_schedule(list(attacks))
        self.bus = SignalBus(horizon=_needed_horizon(self.attacks))
        self.rng = np.random.default_rng(seed_seq)

    @property
    def first_insertion(self) -> float | None:
        return self.attacks[0].t_insertion if self.attacks else None

    def deliver_sensors(self, readings: dict[str, float], t: float) -> dict[str, float]:
        for name, value in readings.items():
            self.bus.publish(name, value, t, from_plant=True)
        apply_attacks(self.bus, self.attacks, t, self.rng, signals=set(readings))
        return {name: self.bus.operator[name] for name in readings}

    def deliver_commands(self, commands: dict[str, float], t: float) -> dict[str, float]:
        for name, value in commands.items():
            self.bus.publish(name, value, t, from_plant=False)
        apply_attacks(self.bus, self.attacks, t, self.rng, signals=set(commands))
        return {name: self.bus.plant[name] for name in commands}
