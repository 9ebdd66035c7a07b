"""
Reduced-order boiling-channel model of a U-tube steam generator.

A single vertical channel of length H is fed with subcooled water at
``Ts_in``. Heat flows from the primary coolant (held at ``Tp``) through an
effective coefficient ``U1`` over the wetted perimeter ``M``. Below the
boiling boundary ``z0`` the fluid is single phase:

    Ws Cs dTs/dz = M U1 (Tp - Ts(z))
    Ts(z)        = Tp + (Ts_in - Tp) exp(-gamma1 z / (Ws Cs)),  gamma1 = M U1
    z0           = -(Ws Cs / gamma1) ln((Tp - Tsat) / (Tp - Ts_in))

The overall energy balance ties feedwater flow to thermal power:

    P_sg = Ws [Cs (Tsat - Ts_in) + xe hfg]

``step_plant`` supplies the closure dynamics (valve lag, linear valve
characteristic, level mass balance) that turn these relations into a
closed-loop plant.

All quantities are SI: m, m^2, kg/s, K, J/kg, W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

LB_TO_KG = 0.45359237


class DomainError(ValueError):
    """Input outside the region where the model equations are defined."""


class LevelOutOfRange(ValueError):
    """Boiling boundary computed above the top of the channel."""

    def __init__(self, z0: float, H: float):
        super().__init__(f"boiling boundary z0={z0:.6g} m exceeds channel length H={H:.6g} m")
        self.z0 = z0
        self.H = H


@dataclass(frozen=True)
class SgParams:
    """Thermal and geometric constants of the boiling channel.

    Defaults are artifact choices representative of a ~800 MWt
    recirculating SG; they are config inputs, not fitted values.
    ``M`` is chosen so the nominal feedwater flow puts the boiling
    boundary at mid narrow range (about 10 m).
    """

    H: float = 20.0  # m
    A: float = 21.0  # m^2
    M: float = 52.65  # m
    U1: float = 5000.0  # W/(m^2 K)
    Cs: float = 5000.0  # J/(kg K)
    hfg: float = 1.51e6  # J/kg
    xe: float = 1.0
    Tp: float = 583.0  # K
    Tsat: float = 557.0  # K
    Ts_in: float = 500.0  # K
    rho_f: float = 740.0  # kg/m^3

    def __post_init__(self):
        for name in ("H", "A", "M", "U1", "Cs", "hfg", "rho_f"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SgParams.{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 <= self.xe <= 1.0:
            raise ValueError(f"SgParams.xe must lie in [0, 1], got {self.xe!r}")
        if not self.Ts_in < self.Tsat < self.Tp:
            raise ValueError(
                f"need Ts_in < Tsat < Tp, got Ts_in={self.Ts_in}, Tsat={self.Tsat}, Tp={self.Tp}"
            )

    @property
    def gamma1(self) -> float:
        return self.M * self.U1


@dataclass(frozen=True)
class ClosureConfig:
    """Actuator and inventory closure around the boiling-channel model.

    ``ws_nominal`` / ``valve_nominal`` fix the linear valve characteristic
    ``Ws = ws_max * v``. ``z_low``/``z_high`` define the narrow-range span
    mapped onto 0-100 %.
    """

    tau_v: float = 2.0  # s, valve first-order lag; 0 disables the lag
    ws_nominal: float = 1000.0 * LB_TO_KG  # kg/s
    valve_nominal: float = 0.5
    z_low: float = 8.0  # m
    z_high: float = 12.0  # m

    def __post_init__(self):
        if self.tau_v < 0:
            raise ValueError("ClosureConfig.tau_v must be >= 0")
        if self.ws_nominal <= 0:
            raise ValueError("ClosureConfig.ws_nominal must be positive")
        if not 0.0 < self.valve_nominal <= 1.0:
            raise ValueError("ClosureConfig.valve_nominal must lie in (0, 1]")
        if not self.z_low < self.z_high:
            raise ValueError("ClosureConfig needs z_low < z_high")

    @property
    def ws_max(self) -> float:
        return self.ws_nominal / self.valve_nominal

    def level_nr(self, z0: float) -> float:
        """Narrow-range level [% span] for a boiling-boundary height."""
        return 100.0 * (z0 - self.z_low) / (self.z_high - self.z_low)

    def z_from_level(self, level_nr: float) -> float:
        return self.z_low + level_nr / 100.0 * (self.z_high - self.z_low)


@dataclass(frozen=True)
class PlantState:
    t: float
    Ws: float
    Wst: float
    z0: float
    level_nr: float
    v: float
    P_sg: float
    tripped: bool = False


def fluid_temperature(z: float, Ws: float, p: SgParams) -> float:
    """Single-phase fluid temperature at height ``z`` [K]."""
    if not Ws > 0:
        raise DomainError(f"feedwater flowrate must be positive, got {Ws!r}")
    if z < 0:
        raise DomainError(f"height must be non-negative, got {z!r}")
    return p.Tp + (p.Ts_in - p.Tp) * math.exp(-p.gamma1 * z / (Ws * p.Cs))


def water_level(Ws: float, p: SgParams, check_range: bool = True) -> float:
    """Boiling-boundary height z0 [m] where the fluid reaches Tsat.

    Raises ``LevelOutOfRange`` when z0 > H unless ``check_range`` is off;
    the value is never clamped.
    """
    if not Ws > 0:
        raise DomainError(f"feedwater flowrate must be positive, got {Ws!r}")
    if p.Tsat >= p.Tp:
        raise DomainError("saturation temperature must be below primary temperature")
    z0 = -(Ws * p.Cs / p.gamma1) * math.log((p.Tp - p.Tsat) / (p.Tp - p.Ts_in))
    if check_range and z0 > p.H:
        raise LevelOutOfRange(z0, p.H)
    return z0


def _specific_duty(p: SgParams) -> float:
    return p.Cs * (p.Tsat - p.Ts_in) + p.xe * p.hfg


def sg_power(Ws: float, p: SgParams) -> float:
    """Total heat transfer rate [W] absorbed by feedwater flow ``Ws``."""
    if Ws < 0:
        raise DomainError(f"feedwater flowrate must be non-negative, got {Ws!r}")
    return Ws * _specific_duty(p)


def implied_flowrate(P: float, p: SgParams) -> float:
    """Feedwater flowrate [kg/s] that balances thermal power ``P``."""
    if P < 0:
        raise DomainError(f"power must be non-negative, got {P!r}")
    duty = _specific_duty(p)
    if not duty > 0:
        raise DomainError(f"specific duty Cs(Tsat-Ts_in)+xe*hfg must be positive, got {duty!r}")
    return P / duty


def nominal_power(p: SgParams, cfg: ClosureConfig) -> float:
    """Full-power core thermal power [W] consistent with ``cfg.ws_nominal``."""
    return sg_power(cfg.ws_nominal, p)


def initial_state(p: SgParams, cfg: ClosureConfig, P_core: float, level_nr: float) -> PlantState:
    """Steady state at power ``P_core`` with the level resting at ``level_nr``."""
    Ws = implied_flowrate(P_core, p)
    v = Ws / cfg.ws_max
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"power {P_core:.4g} W needs valve position {v:.4g} outside [0, 1]")
    z0 = cfg.z_from_level(level_nr)
    return PlantState(t=0.0, Ws=Ws, Wst=Ws, z0=z0, level_nr=level_nr, v=v, P_sg=sg_power(Ws, p))


def step_plant(
    s: PlantState, v_cmd: float, P_core: float, dt: float, p: SgParams, cfg: ClosureConfig
) -> PlantState:
    """Advance the plant one explicit step of length ``dt``.

    The valve lag uses the exact zero-order-hold discretisation so the
    first-order response is reproduced for any step size; the level
    integrates the mass balance with explicit Euler.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if s.tripped:
        raise ValueError("cannot advance a tripped plant")
    v_cmd = min(1.0, max(0.0, v_cmd))
    if cfg.tau_v > 0:
        v = v_cmd + (s.v - v_cmd) * math.exp(-dt / cfg.tau_v)
    else:
        v = v_cmd
    Ws = cfg.ws_max * v
    Wst = implied_flowrate(P_core, p)
    z0 = s.z0 + dt * (Ws - Wst) / (p.rho_f * p.A)
    return replace(
        s,
        t=s.t + dt,
        Ws=Ws,
        Wst=Wst,
        z0=z0,
        level_nr=cfg.level_nr(z0),
        v=v,
        P_sg=sg_power(Ws, p),
    )
