"""
Batches of scenario runs over a parameter design.

A design row is applied to a template scenario by name. Recognised names:

    lt_spoof, ft_spoof, st_spoof          spoof value of every attack on that sensor kind
    lt_noise, ft_noise, st_noise          artificial noise sigma, same selection
    t_insertion_lt, t_insertion_ft, ...   insertion time, same selection
    attacks[i].<field>                    any numeric AttackSpec field of attack i

Level values are in % span, flows default to lb/s (override with ``unit``),
times in seconds. Run ``i`` uses seed ``SeedSequence([master, i])``, so the
results do not depend on worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..attacks import AttackConfigError
from ..control import SensorKind
from ..diagnostics.physics import Detector
from ..thermal import LB_TO_KG
from .lhs import LhsDesign, Parameter, parse_parameters
from .runner import Outcome, RunResult, run_scenario
from .scenario import OutputConfig, Scenario, ScenarioError

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["case_id", "lt_spoof", "ft_spoof", "t_insertion_lt", "t_insertion_ft", "t_trip",
                  "t_det_kf", "t_det_osv", "t_det_np", "t_det_svm", "t_det_qsvm", "outcome"]
DET_COLUMNS = {"t_det_kf": Detector.PBD_KF, "t_det_osv": Detector.OSV, "t_det_np": Detector.NP,
               "t_det_svm": Detector.SVM, "t_det_qsvm": Detector.QSVM}

DESIGN_UNITS = {"%": 1.0, "s": 1.0, "kg/s": 1.0, "lb/s": LB_TO_KG, "fraction": 1.0, "raw": 1.0}
_ATTACK_FIELDS = {"spoof_value", "t_insertion", "artificial_noise_sigma", "delay", "t_end", "ramp"}
_KIND_ALIASES = {"spoof": "spoof_value", "noise": "artificial_noise_sigma", "t_insertion": "t_insertion"}
_GENERIC = re.compile(r"^attacks\[(\d+)\]\.(\w+)$")
_ALIAS = re.compile(r"^(?:(lt|ft|st)_(spoof|noise)|(t_insertion)_(lt|ft|st))$")


@dataclass(frozen=True)
class Design:
    """Explicit list of parameter rows (need not be a Latin hypercube)."""

    parameters: tuple[Parameter, ...]
    samples: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    def to_dict(self) -> dict:
        return {"kind": "explicit",
                "parameters": [{"name": p.name, "lo": p.lo, "hi": p.hi, **({"unit": p.unit} if p.unit else {})}
                               for p in self.parameters],
                "samples": self.samples.tolist()}


def load_design(path) -> Design:
    data = json.loads(Path(path).read_text())
    params = parse_parameters(data)
    samples = np.asarray(data.get("samples", []), dtype=float).reshape(-1, len(params))
    return Design(params, samples)


def as_design(design) -> Design:
    if isinstance(design, LhsDesign):
        return Design(design.parameters, design.samples)
    return design


def derive_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def _selector(name: str, s: Scenario):
    """Return (attack indices, AttackSpec field, default unit) for a design name."""
    m = _GENERIC.match(name)
    if m:
        idx, fld = int(m.group(1)), m.group(2)
        if fld not in _ATTACK_FIELDS:
            raise ScenarioError(f"design parameter {name!r}: {fld!r} is not a numeric attack field")
        if idx >= len(s.attacks):
            raise ScenarioError(f"design parameter {name!r}: template has {len(s.attacks)} attacks")
        return [idx], fld, "raw"
    m = _ALIAS.match(name)
    if not m:
        raise ScenarioError(f"unknown design parameter {name!r}")
    if m.group(1):
        kind, what = m.group(1), m.group(2)
    else:
        what, kind = m.group(3), m.group(4)
    sensor = SensorKind(kind.upper())
    idx = [i for i, a in enumerate(s.attacks) if a.target.kind == "sensor" and a.target.sensor is sensor]
    if not idx:
        raise ScenarioError(f"design parameter {name!r}: template has no {sensor.value} attack")
    fld = _KIND_ALIASES[what]
    if fld == "t_insertion":
        unit = "s"
    else:
        unit = "%" if sensor is SensorKind.LT else "lb/s"
    return idx, fld, unit


def apply_row(template: Scenario, parameters, row, seed: int, name: str) -> Scenario:
    attacks = list(template.attacks)
    for p, value in zip(parameters, row):
        idx, fld, default_unit = _selector(p.name, template)
        unit = p.unit or default_unit
        if unit not in DESIGN_UNITS:
            raise ScenarioError(f"design parameter {p.name!r}: unsupported unit {unit!r}")
        v = float(value) * DESIGN_UNITS[unit]
        for i in idx:
            try:
                attacks[i] = dataclasses.replace(attacks[i], **{fld: v})
            except (AttackConfigError, ValueError) as exc:
                raise ScenarioError(f"design parameter {p.name!r}: {exc}") from exc
    return dataclasses.replace(template, attacks=tuple(attacks), seed=seed, name=name,
                               output=OutputConfig(telemetry=None))


def _run_one(task) -> tuple[Scenario | None, RunResult]:
    template, parameters, row, seed, name, telemetry = task
    try:
        s = apply_row(template, parameters, row, seed, name)
    except ScenarioError as exc:
        return None, RunResult(name=name, seed=seed, outcome=Outcome.ERROR, error=str(exc))
    return s, run_scenario(s, telemetry_path=telemetry, keep_telemetry=False)


def run_batch_pairs(template: Scenario, design, parallelism: int = 1, master_seed: int | None = None,
                    telemetry_dir=None) -> list[tuple[Scenario | None, RunResult]]:
    """Like ``run_batch`` but also returns the scenario each row produced
    (None where the row could not be applied)."""
    design = as_design(design)
    master = template.seed if master_seed is None else master_seed
    tasks = []
    for i, row in enumerate(design.samples):
        tel = None if telemetry_dir is None else str(Path(telemetry_dir) / f"run_{i + 1:04d}.csv")
        tasks.append((template, design.parameters, tuple(float(v) for v in row),
                      derive_seed(master, i), f"{template.name}#{i + 1}", tel))
    if parallelism <= 1 or len(tasks) <= 1:
        pairs = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as ex:
            pairs = list(ex.map(_run_one, tasks, chunksize=1))
    for _, r in pairs:
        if r.outcome is Outcome.ERROR:
            log.warning("run %s failed: %s", r.name, r.error)
    return pairs


def run_batch(template: Scenario, design, parallelism: int = 1, master_seed: int | None = None,
              results_path=None, telemetry_dir=None) -> list[RunResult]:
    """Run every design row; results come back in row order.

    Failed rows become ``Outcome.ERROR`` results and the batch carries on.
    """
    pairs = run_batch_pairs(template, design, parallelism, master_seed, telemetry_dir)
    if results_path is not None:
        write_results(results_path, pairs)
    return [r for _, r in pairs]


def _num(x) -> str:
    return repr(round(float(x), 6))


def _first(s: Scenario | None, kind: SensorKind):
    if s is None:
        return None
    for a in s.attacks:
        if a.target.kind == "sensor" and a.target.sensor is kind:
            return a
    return None


def result_row(case_id: int, s: Scenario | None, r: RunResult) -> list[str]:
    lt, ft = _first(s, SensorKind.LT), _first(s, SensorKind.FT)
    row = [str(case_id),
           "" if lt is None or lt.spoof_value is None else _num(lt.spoof_value),
           "" if ft is None or ft.spoof_value is None else _num(ft.spoof_value / LB_TO_KG),
           "" if lt is None else _num(lt.t_insertion),
           "" if ft is None else _num(ft.t_insertion)]
    if r.outcome is Outcome.TRIPPED:
        row.append(_num(r.t_trip))
    elif r.outcome is Outcome.OVER_TIME:
        row.append("OT")
    elif r.outcome is Outcome.ERROR:
        row.append("ERR")
    else:
        row.append("-")
    for det in DET_COLUMNS.values():
        t = r.t_first_alarm.get(det)
        if r.outcome is Outcome.ERROR or det not in r.enabled:
            row.append("")
        elif r.false_positive.get(det):
            row.append("FP")
        else:
            row.append("-" if t is None else _num(t))
    row.append(r.outcome.value)
    return row


def results_csv(pairs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for i, (s, r) in enumerate(pairs, start=1):
        w.writerow(result_row(i, s, r))
    return buf.getvalue()


def write_results(path, pairs) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(results_csv(pairs))
