"""
SG water level control system: redundant noisy transmitters, the cascaded
two-PI level/flow controller and the trip check.

The outer PI acts on level error (setpoint minus channel-3 level) and
produces a flow demand in % of nominal flow; the inner PI acts on that
demand plus the steam/feed mismatch and produces the regulating valve
command.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .thermal import PlantState


class SensorKind(str, enum.Enum):
    LT = "LT"
    FT = "FT"
    ST = "ST"


@dataclass
class SensorChannel:
    kind: SensorKind
    id: int
    sigma: float
    rng: np.random.Generator | None = None
    last_reading: float | None = None
    last_time: float | None = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"{self.name}: sigma must be >= 0")

    @property
    def name(self) -> str:
        return f"{self.kind.value}{self.id}"


def sample_sensor(true_value: float, ch: SensorChannel, rng: np.random.Generator | None = None,
                  t: float | None = None) -> float:
    """Return ``true_value`` plus one Gaussian draw of std ``ch.sigma``.

    The channel's own stream is used when ``rng`` is not given. A draw is
    consumed even for ``sigma == 0`` so stream positions do not depend on
    the noise level.
    """
    rng = rng if rng is not None else ch.rng
    if rng is None:
        raise ValueError(f"{ch.name}: no random stream attached")
    reading = true_value + ch.sigma * rng.standard_normal()
    ch.last_reading = reading
    ch.last_time = t
    return reading


@dataclass
class PiController:
    """Positional PI with output clamp and conditional-integration anti-windup.

    ``output = clamp(bias + Kp * (error + integral / tau_i))``. The
    integral is advanced before the output is formed and the advance is
    discarded whenever the output would leave the clamp band.
    """

    Kp: float
    tau_i: float
    out_min: float
    out_max: float
    bias: float = 0.0
    integral: float = 0.0
    clamped: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.tau_i > 0:
            raise ValueError("PiController.tau_i must be positive")
        if not self.out_min < self.out_max:
            raise ValueError("PiController needs out_min < out_max")


def pi_update(c: PiController, error: float, dt: float) -> float:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    candidate = c.integral + error * dt
    raw = c.bias + c.Kp * (error + candidate / c.tau_i)
    if raw > c.out_max:
        c.clamped = True
        return c.out_max
    if raw < c.out_min:
        c.clamped = True
        return c.out_min
    c.clamped = False
    c.integral = candidate
    return raw


def sglcs_step(level_reading_ch3: float, level_setpoint: float, feed_reading: float,
               steam_reading: float, c1: PiController, c2: PiController, dt: float,
               flow_scale: float) -> float:
    """One cascade update; returns the valve command in [0, 1].

    ``flow_scale`` converts a flow difference into the outer controller's
    output units (% of nominal flow), i.e. ``100 / ws_nominal``.
    """
    e1 = level_setpoint - level_reading_ch3
    u1 = pi_update(c1, e1, dt)
    e2 = u1 + (steam_reading - feed_reading) * flow_scale
    u2 = pi_update(c2, e2, dt)
    return min(1.0, max(0.0, u2))


class TripStatus(str, enum.Enum):
    RUNNING = "Running"
    TRIPPED_LEVEL = "TrippedLevel"
    OVER_TIME = "OverTime"


@dataclass(frozen=True)
class TripConfig:
    level_lo: float = 25.0
    level_hi: float = 75.0
    max_runtime: float = 180.0

    def __post_init__(self):
        if not self.level_lo < self.level_hi:
            raise ValueError("TripConfig needs level_lo < level_hi")
        if not self.max_runtime > 0:
            raise ValueError("TripConfig.max_runtime must be positive")


def check_trip(state: PlantState, trip: TripConfig) -> TripStatus:
    if not trip.level_lo <= state.level_nr <= trip.level_hi:
        return TripStatus.TRIPPED_LEVEL
    if state.t > trip.max_runtime:
        return TripStatus.OVER_TIME
    return TripStatus.RUNNING


@dataclass(frozen=True)
class ControlConfig:
    """Controller tuning, sensor suite and noise levels.

    Level quantities are in % narrow-range span; flow noise is given as a
    fraction of nominal flow. Channel ids are 1-based.
    """

    level_setpoint: float = 50.0
    Kp1: float = 3.0
    tau1: float = 150.0
    u1_limit: float = 10.0  # % nominal flow
    Kp2: float = 0.001
    tau2: float = 10.0
    n_lt: int = 3
    n_ft: int = 2
    n_st: int = 2
    controller_lt: int = 3
    controller_ft: int = 1
    controller_st: int = 1
    sigma_lt: float = 0.1  # % span
    sigma_ft: float = 0.001  # fraction of nominal flow
    sigma_st: float = 0.001
    trip: TripConfig = TripConfig()

    def __post_init__(self):
        if self.n_lt < 3:
            raise ValueError("at least 3 LT channels are required (controller reads channel 3)")
        if self.n_ft < 2 or self.n_st < 2:
            raise ValueError("at least 2 FT and 2 ST channels are required")
        if not 1 <= self.controller_lt <= self.n_lt:
            raise ValueError("controller_lt out of range")
        if not 1 <= self.controller_ft <= self.n_ft:
            raise ValueError("controller_ft out of range")
        if not 1 <= self.controller_st <= self.n_st:
            raise ValueError("controller_st out of range")
        for name in ("sigma_lt", "sigma_ft", "sigma_st", "u1_limit"):
            if getattr(self, name) < 0:
                raise ValueError(f"ControlConfig.{name} must be >= 0")

    def channel_counts(self) -> dict[SensorKind, int]:
        return {SensorKind.LT: self.n_lt, SensorKind.FT: self.n_ft, SensorKind.ST: self.n_st}

    def make_controllers(self, valve_bias: float) -> tuple[PiController, PiController]:
        c1 = PiController(self.Kp1, self.tau1, -self.u1_limit, self.u1_limit)
        c2 = PiController(self.Kp2, self.tau2, 0.0, 1.0, bias=valve_bias)
        return c1, c2


def make_sensor_suite(cfg: ControlConfig, ws_nominal: float,
                      seed_seq: np.random.SeedSequence) -> dict[str, SensorChannel]:
    """Build every transmitter channel with its own independent stream."""
    sigmas = {
        SensorKind.LT: cfg.sigma_lt,
        SensorKind.FT: cfg.sigma_ft * ws_nominal,
        SensorKind.ST: cfg.sigma_st * ws_nominal,
    }
    specs = [(kind, i) for kind, n in cfg.channel_counts().items() for i in range(1, n + 1)]
    children = seed_seq.spawn(len(specs))
    suite = {}
    for (kind, i), child in zip(specs, children):
        ch = SensorChannel(kind, i, sigmas[kind], np.random.default_rng(child))
        suite[ch.name] = ch
    return suite
