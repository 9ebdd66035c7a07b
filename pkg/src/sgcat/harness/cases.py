"""The nine-case MiM benchmark built from the bundled reference cases."""

from __future__ import annotations

import numpy as np

from ..attacks import AttackClass, AttackSpec, Target
from ..control import ControlConfig, SensorKind
from ..thermal import LB_TO_KG
from .batch import Design
from .bench import load_reference, transposed_cases
from .lhs import Parameter
from .scenario import Scenario

DEFAULT_RAMP = 12.0  # s, spoof blend-in time

BENCH_PARAMETERS = (
    Parameter("lt_spoof", 0.0, 100.0, "%"),
    Parameter("ft_spoof", 0.0, 3000.0, "lb/s"),
    Parameter("t_insertion_lt", 0.0, 180.0, "s"),
    Parameter("t_insertion_ft", 0.0, 180.0, "s"),
    Parameter("lt_noise", 0.0, 10.0, "%"),
    Parameter("ft_noise", 0.0, 100.0, "lb/s"),
)


def benchmark_template(ramp: float = DEFAULT_RAMP, seed: int = 0, control: ControlConfig | None = None,
                       lt_id: int = 3, ft_id: int = 1) -> Scenario:
    """Full-power scenario with MiM spoofs on the controller's LT and FT
    channels. Spoof values and insertion times are placeholders to be
    set by a design row."""
    control = control or ControlConfig()
    attacks = (
        AttackSpec(AttackClass.MAN_IN_THE_MIDDLE, Target.sensor_channel(SensorKind.LT, lt_id), 3.0, spoof_value=50.0, ramp=ramp),
        AttackSpec(AttackClass.MAN_IN_THE_MIDDLE, Target.sensor_channel(SensorKind.FT, ft_id), 3.0, spoof_value=453.59237,
                   ramp=ramp),
    )
    return Scenario(seed=seed, control=control, attacks=attacks, name="mim-bench")


def benchmark_design(control: ControlConfig | None = None, ws_nominal: float = 1000.0 * LB_TO_KG,
                     noisy_cases=("9",)) -> Design:
    """One row per reference case.

    Where the reference LT cell exceeds 100 % the LT and FT cells are
    swapped back. Cases in ``noisy_cases`` get artificial noise equal to
    the sensor noise of ``control``; the rest are noise free.
    """
    control = control or ControlConfig()
    ref = load_reference()
    swapped = set(transposed_cases(ref))
    rows = []
    for r in ref:
        lt, ft = r.number("lt_spoof"), r.number("ft_spoof")
        if r.case_id in swapped:
            lt, ft = ft, lt
        noisy = r.case_id in noisy_cases
        rows.append([lt, ft, r.number("t_insertion_lt"), r.number("t_insertion_ft"),
                     control.sigma_lt if noisy else 0.0,
                     control.sigma_ft * ws_nominal / LB_TO_KG if noisy else 0.0])
    return Design(BENCH_PARAMETERS, np.array(rows, dtype=float))
