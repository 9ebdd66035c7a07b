import csv
from dataclasses import replace

import pytest

from sgcat.attacks import AttackClass, AttackSpec, Target
from sgcat.control import ControlConfig, SensorKind
from sgcat.diagnostics.physics import Detector, OsvConfig
from sgcat.harness import runner
from sgcat.harness.runner import Outcome, run_scenario, steady_flow, telemetry_columns
from sgcat.harness.scenario import DetectorsConfig, Scenario
from sgcat.thermal import LB_TO_KG

MIM = AttackClass.MAN_IN_THE_MIDDLE
LT3 = Target.sensor_channel(SensorKind.LT, 3)
FT1 = Target.sensor_channel(SensorKind.FT, 1)
PHYSICS = (Detector.PBD_KF, Detector.OSV, Detector.NP)


def case1(**kw):
    attacks = (AttackSpec(MIM, LT3, 3.0, spoof_value=64.1, ramp=12.0),
               AttackSpec(MIM, FT1, 3.0, spoof_value=1327.5 * LB_TO_KG, ramp=12.0))
    return Scenario(seed=3, attacks=attacks, **kw)


def test_baseline_run_is_quiet():
    r = run_scenario(Scenario(seed=1, duration=70.0))
    assert r.outcome is Outcome.BASELINE
    assert r.steps == 700 and len(r.telemetry) == 700
    assert all(r.t_first_alarm[d] is None for d in PHYSICS)
    assert r.t_insertion is None and r.t_trip is None


def test_mim_case_trips_with_kf_before_osv():
    r = run_scenario(case1(), keep_telemetry=False)
    assert r.outcome is Outcome.TRIPPED
    assert 3.0 < r.t_trip < 180.0
    kf, osv = r.t_first_alarm[Detector.PBD_KF], r.t_first_alarm[Detector.OSV]
    assert 3.0 <= kf < osv
    assert r.detection_latency(Detector.PBD_KF) == pytest.approx(kf - 3.0)
    assert not any(r.false_positive.values())


def test_noise_matched_null_attack_is_invisible():
    c = ControlConfig()
    w = steady_flow(Scenario())
    attacks = (AttackSpec(MIM, LT3, 3.0, spoof_value=c.level_setpoint, artificial_noise_sigma=c.sigma_lt),
               AttackSpec(MIM, FT1, 3.0, spoof_value=w, artificial_noise_sigma=c.sigma_ft * 453.59237))
    r = run_scenario(Scenario(seed=2, attacks=attacks), keep_telemetry=False)
    assert r.outcome is Outcome.OVER_TIME
    assert all(r.t_first_alarm[d] is None for d in PHYSICS)


def test_noise_free_null_attack_only_trips_noise_profiler():
    w = steady_flow(Scenario())
    attacks = (AttackSpec(MIM, LT3, 3.0, spoof_value=50.0), AttackSpec(MIM, FT1, 3.0, spoof_value=w))
    r = run_scenario(Scenario(seed=2, attacks=attacks, max_runtime=30.0), keep_telemetry=False)
    assert r.t_first_alarm[Detector.PBD_KF] is None and r.t_first_alarm[Detector.OSV] is None
    assert r.alarm_detail[Detector.NP]["branch"] == "lower"


def test_over_time_when_limit_reached_first():
    r = run_scenario(case1(max_runtime=20.0), keep_telemetry=False)
    assert r.outcome is Outcome.OVER_TIME and r.t_trip is None
    assert r.steps == 200


def test_trip_accounting_matches_telemetry():
    r = run_scenario(case1())
    cols = r.columns
    t_idx, lvl = cols.index("t"), cols.index("level_true")
    assert all(25.0 <= row[lvl] <= 75.0 for row in r.telemetry)
    assert r.t_trip == pytest.approx(r.telemetry[-1][t_idx] + 0.1)


def test_valve_command_injection_fools_nobody_but_physics():
    attacks = (AttackSpec(AttackClass.COMMAND_INJECT, Target.valve(), 5.0, spoof_value=1.0),)
    r = run_scenario(Scenario(seed=4, attacks=attacks), keep_telemetry=False)
    assert r.outcome is Outcome.TRIPPED
    assert r.t_first_alarm[Detector.PBD_KF] is not None
    assert r.t_first_alarm[Detector.OSV] is None


def test_controller_parameter_attack_changes_trajectory():
    attacks = (AttackSpec(AttackClass.COMMAND_INJECT, Target.controller_param("Kp2"), 2.0, spoof_value=0.05),)
    base = run_scenario(Scenario(seed=5, duration=30.0))
    hit = run_scenario(Scenario(seed=5, duration=30.0, attacks=attacks))
    v = base.columns.index("valve_cmd")
    assert [row[v] for row in base.telemetry[:20]] == [row[v] for row in hit.telemetry[:20]]
    assert [row[v] for row in base.telemetry] != [row[v] for row in hit.telemetry]


def test_alarm_before_insertion_is_false_positive():
    det = DetectorsConfig(osv=OsvConfig(tau_lt=1e-4))
    r = run_scenario(replace(case1(), detectors=det, max_runtime=10.0), keep_telemetry=False)
    assert r.false_positive[Detector.OSV]
    assert r.detection_latency(Detector.OSV) is None


def test_telemetry_file_is_deterministic(tmp_path):
    s = replace(case1(), max_runtime=15.0)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_scenario(s, telemetry_path=a)
    run_scenario(s, telemetry_path=b)
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(a.open()))
    assert rows[0] == telemetry_columns(s)
    assert rows[0][:12] == ["t", "level_true", "LT1", "LT2", "LT3", "FT1", "FT2", "ST1", "ST2",
                            "valve_cmd", "valve_pos", "Ws"]
    assert len(rows) == 1 + 150


def test_seed_changes_noise():
    a = run_scenario(Scenario(seed=1, duration=2.0))
    b = run_scenario(Scenario(seed=2, duration=2.0))
    assert a.telemetry[0][2] != b.telemetry[0][2]


def test_reduced_power_initial_condition_is_steady():
    r = run_scenario(Scenario(seed=6, duration=70.0, initial_condition="power_75"))
    assert r.outcome is Outcome.BASELINE
    assert all(r.t_first_alarm[d] is None for d in PHYSICS)


def test_numerical_failure_gives_error_result(monkeypatch):
    calls = {"n": 0}
    real = runner.step_plant

    def flaky(*args, **kw):
        calls["n"] += 1
        if calls["n"] == 5:
            raise FloatingPointError("overflow in plant step")
        return real(*args, **kw)

    monkeypatch.setattr(runner, "step_plant", flaky)
    r = run_scenario(Scenario(duration=10.0))
    assert r.outcome is Outcome.ERROR
    assert "overflow" in r.error
