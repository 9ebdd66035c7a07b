"""
Train the SVM (RBF, Classical4 features) and qSVM (quantum kernel,
Quantum3 features) detectors from simulated runs.

A training window is one telemetry step. Steps from attack-free runs are
labelled normal; steps of attacked runs are labelled anomalous once every
sensor spoof is fully blended in (insertion + ramp), and the blend-in
steps are dropped. The first ``burn_in_steps`` steps of every run are
skipped, matching the detector warm-up at inference time.

Dataset file (JSON)::

    {
      "seed": 7,
      "baseline": {"scenario": <path or object>, "runs": 4, "duration": 70},
      "attacked": {"scenario": <path or object>, "design": <path>},
      "samples": {"baseline": 200, "attacked": 200},
      "holdout_fraction": 0.25,
      "svm": {"C": 10.0, "gamma": 10.0},
      "qsvm": {"C": 10.0, "depth": 2},
      "output_dir": "models"
    }

``attacked.scenario`` and ``attacked.design`` default to the nine-case
MiM benchmark; ``baseline.scenario`` defaults to the nominal full-power
scenario.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..diagnostics.features import FeatureScaler, FeatureSchema, TelemetryStep, extract_features
from ..diagnostics.model_io import save_model
from ..diagnostics.quantum import QuantumFeatureMap
from ..diagnostics.svm import ANOMALOUS, NORMAL, KernelSpec, SvmTrainingError, smo_train, svm_predict
from ..thermal import nominal_power
from .batch import apply_row, as_design, load_design
from .cases import benchmark_design, benchmark_template
from .runner import Outcome, run_scenario
from .scenario import INITIAL_CONDITIONS, Scenario, ScenarioError, load_scenario, scenario_from_dict

MAX_IMBALANCE = 0.95
_DATASET_KEYS = {"seed", "baseline", "attacked", "samples", "holdout_fraction", "svm", "qsvm", "output_dir"}


@dataclass
class Windows:
    steps: list[TelemetryStep]
    labels: list[int]
    seeds: list[int]


def _seed(master: int, group: int, i: int) -> int:
    return int(np.random.SeedSequence([master, group, i]).generate_state(1)[0])


def _steps_from_run(s: Scenario, rows, columns, t_from: float | None) -> list[TelemetryStep]:
    c, cl = s.control, s.closure
    col = {n: i for i, n in enumerate(columns)}
    P_nom = nominal_power(s.plant, cl)
    P_core = INITIAL_CONDITIONS[s.initial_condition] * P_nom
    t_end = min((a.t_end for a in s.attacks if a.t_end is not None), default=math.inf)
    out = []
    for k, row in enumerate(rows):
        if k < s.detectors.pbd.burn_in_steps:
            continue
        t = row[col["t"]]
        if t_from is not None and not (t_from <= t < t_end):
            continue
        out.append(TelemetryStep(
            P_core, P_nom, cl.ws_nominal,
            tuple(row[col[f"LT{i}"]] for i in range(1, c.n_lt + 1)),
            tuple(row[col[f"FT{i}"]] for i in range(1, c.n_ft + 1)),
            tuple(row[col[f"ST{i}"]] for i in range(1, c.n_st + 1)),
            row[col["kf_ws"]], c.controller_lt, c.controller_ft, c.controller_st))
    return out


def collect_windows(baseline: list[Scenario], attacked: list[Scenario]) -> Windows:
    steps, labels, seeds = [], [], []
    for s in baseline:
        r = run_scenario(s, models={})
        if r.outcome is Outcome.ERROR:
            raise SvmTrainingError(f"baseline run {s.name} failed: {r.error}")
        got = _steps_from_run(s, r.telemetry, r.columns, None)
        steps += got
        labels += [NORMAL] * len(got)
        seeds.append(s.seed)
    for s in attacked:
        sensor = [a for a in s.attacks if a.target.kind == "sensor"]
        if not sensor:
            raise SvmTrainingError(f"attacked scenario {s.name} has no sensor attack")
        t_full = max(a.t_insertion + a.ramp for a in sensor)
        r = run_scenario(s, models={})
        if r.outcome is Outcome.ERROR:
            raise SvmTrainingError(f"attacked run {s.name} failed: {r.error}")
        got = _steps_from_run(s, r.telemetry, r.columns, t_full)
        steps += got
        labels += [ANOMALOUS] * len(got)
        seeds.append(s.seed)
    return Windows(steps, labels, seeds)


def _subsample(idx: np.ndarray, n: int | None, rng) -> np.ndarray:
    if n is None or n >= len(idx):
        return idx
    return np.sort(rng.choice(idx, size=n, replace=False))


def check_balance(labels) -> None:
    labels = np.asarray(labels)
    n = len(labels)
    n_att = int(np.sum(labels == ANOMALOUS))
    if n_att == 0:
        raise SvmTrainingError("attacked set is empty")
    if n_att == n:
        raise SvmTrainingError("baseline set is empty")
    if max(n_att, n - n_att) / n > MAX_IMBALANCE:
        raise SvmTrainingError(f"class imbalance {n - n_att}/{n_att} exceeds {MAX_IMBALANCE:.0%}")


def _resolve_scenario(ref, base_dir: Path) -> Scenario:
    if isinstance(ref, dict):
        return scenario_from_dict(ref, base_dir)
    path = Path(ref)
    return load_scenario(path if path.is_absolute() else base_dir / path)


def _fingerprint(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def train_models(spec: dict, base_dir=".") -> dict:
    """Run the dataset scenarios, train both models, write model files and a
    manifest into ``output_dir``. Returns the manifest."""
    base_dir = Path(base_dir)
    extra = set(spec) - _DATASET_KEYS
    if extra:
        raise ScenarioError(f"dataset: unknown field(s) {', '.join(sorted(extra))}")
    master = int(spec.get("seed", 0))

    b = spec.get("baseline", {})
    base_s = _resolve_scenario(b["scenario"], base_dir) if "scenario" in b else Scenario()
    base_s = dataclasses.replace(base_s, attacks=(), duration=float(b.get("duration", 70.0)))
    baseline = [dataclasses.replace(base_s, seed=_seed(master, 0, i), name=f"baseline#{i + 1}")
                for i in range(int(b.get("runs", 4)))]

    a = spec.get("attacked", {})
    template = _resolve_scenario(a["scenario"], base_dir) if "scenario" in a else benchmark_template()
    if "design" in a:
        dpath = Path(a["design"])
        design = load_design(dpath if dpath.is_absolute() else base_dir / dpath)
    else:
        design = benchmark_design(template.control)
    design = as_design(design)
    attacked = [apply_row(template, design.parameters, row, _seed(master, 1, i), f"attacked#{i + 1}")
                for i, row in enumerate(design.samples)]

    w = collect_windows(baseline, attacked)
    labels = np.asarray(w.labels)
    rng = np.random.default_rng(np.random.SeedSequence([master, 2]))
    want = spec.get("samples", {})
    keep = np.concatenate([
        _subsample(np.flatnonzero(labels == NORMAL), want.get("baseline"), rng),
        _subsample(np.flatnonzero(labels == ANOMALOUS), want.get("attacked"), rng),
    ])
    check_balance(labels[keep])
    keep = rng.permutation(keep)
    n_hold = int(round(float(spec.get("holdout_fraction", 0.25)) * len(keep)))
    hold, train = keep[:n_hold], keep[n_hold:]
    check_balance(labels[train])

    out_dir = Path(spec.get("output_dir", "models"))
    out_dir = out_dir if out_dir.is_absolute() else base_dir / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    svm_cfg = spec.get("svm", {})
    qsvm_cfg = spec.get("qsvm", {})
    jobs = [
        ("svm", FeatureSchema.CLASSICAL4, KernelSpec.rbf(float(svm_cfg.get("gamma", 10.0))),
         float(svm_cfg.get("C", 10.0)), 1.0),
        ("qsvm", FeatureSchema.QUANTUM3,
         KernelSpec.quantum(QuantumFeatureMap(depth=int(qsvm_cfg.get("depth", 2)))),
         float(qsvm_cfg.get("C", 10.0)), math.pi),
    ]
    manifest = {
        "format": "sgcat-training-manifest",
        "seed": master,
        "baseline_seeds": [s.seed for s in baseline],
        "attacked_seeds": [s.seed for s in attacked],
        "windows": {"normal": int(np.sum(labels[keep] == NORMAL)),
                    "anomalous": int(np.sum(labels[keep] == ANOMALOUS)),
                    "train": int(len(train)), "holdout": int(len(hold))},
        "models": {},
    }
    for name, schema, kernel, C, span in jobs:
        X = np.array([extract_features(w.steps[i], schema) for i in keep])
        pos = {int(i): k for k, i in enumerate(keep)}
        Xtr = X[[pos[int(i)] for i in train]]
        scaler = FeatureScaler.fit(Xtr, span=span)
        model = smo_train(scaler.transform(Xtr), labels[train], kernel, C=C,
                          schema=schema.value, scaler=scaler.to_dict())
        if len(hold):
            Xh = scaler.transform(X[[pos[int(i)] for i in hold]])
            acc = float(np.mean([svm_predict(model, x) == y for x, y in zip(Xh, labels[hold])]))
        else:
            acc = None
        path = out_dir / f"{name}.json"
        save_model(model, path)
        manifest["models"][name] = {
            "file": path.name, "sha256": _fingerprint(path), "schema": schema.value,
            "kernel": kernel.to_dict(), "C": C, "feature_bounds": scaler.to_dict(),
            "n_support": int(len(model.dual_coefs)), "holdout_accuracy": acc,
        }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest


def load_dataset(path) -> tuple[dict, Path]:
    path = Path(path)
    return json.loads(path.read_text()), path.parent
