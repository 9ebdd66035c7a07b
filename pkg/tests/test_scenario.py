import json
from dataclasses import replace
from pathlib import Path

import pytest

from sgcat.attacks import AttackClass, AttackSpec, Target
from sgcat.control import SensorKind
from sgcat.harness.scenario import (
    Scenario, ScenarioError, attack_to_json, load_scenario, parse_attack, scenario_from_dict,
    scenario_to_dict,
)
from sgcat.thermal import LB_TO_KG

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_bundled_scenarios_load():
    for name in ("baseline.json", "mim_case1.json", "mim_template.json"):
        s = load_scenario(SCENARIOS / name)
        assert isinstance(s, Scenario)


def test_units_converted_at_parse_time():
    s = load_scenario(SCENARIOS / "mim_case1.json")
    lt, ft = sorted(s.attacks, key=lambda a: a.target.signal != "LT3")
    assert lt.target == Target.sensor_channel(SensorKind.LT, 3)
    assert lt.spoof_value == 64.1
    assert ft.spoof_value == pytest.approx(1327.5 * LB_TO_KG)
    assert ft.ramp == 12.0 and ft.attack_class is AttackClass.MAN_IN_THE_MIDDLE


def test_flow_field_units():
    s = scenario_from_dict({"plant": {"closure": {"ws_nominal": {"value": 1000, "unit": "lb/s"}}}})
    assert s.closure.ws_nominal == pytest.approx(453.59237)
    with pytest.raises(ScenarioError):
        scenario_from_dict({"plant": {"closure": {"ws_nominal": {"value": 1, "unit": "gpm"}}}})


@pytest.mark.parametrize("data", [
    {"bogus": 1},
    {"plant": {"params": {"H": 20, "height": 3}}},
    {"plant": {"extra": {}}},
    {"control": {"gain": 1}},
    {"control": {"trip": {"max_runtime": 100}}},
    {"detectors": {"pbd": {"tolerance": 1}}},
    {"detectors": {"svm": {"model": "x.json", "kind": "rbf"}}},
    {"output": {"plots": True}},
    {"attacks": [{"class": "MiM", "target": {"sensor": "LT", "id": 3}, "spoof_value": 1, "t_insertion": 0,
                  "colour": "red"}]},
    {"attacks": [{"class": "MiM", "target": {"sensor": "LT", "id": 3}, "spoof_value": 1, "t_insertion": 0,
                  "unit": "furlong"}]},
    {"attacks": [{"class": "MiM", "target": "pump", "spoof_value": 1, "t_insertion": 0}]},
    {"attacks": [{"class": "MiM", "target": {"sensor": "LT", "id": 3}, "t_insertion": 0}]},
    {"attacks": {"class": "MiM"}},
    {"initial_condition": "hot_standby"},
    {"dt": 0},
])
def test_malformed_scenarios_rejected(data):
    with pytest.raises(ScenarioError):
        scenario_from_dict(data)


def test_model_files_must_exist(tmp_path):
    with pytest.raises(ScenarioError, match="not found"):
        scenario_from_dict({"detectors": {"svm": {"model": "missing.json"}}}, tmp_path)
    (tmp_path / "m.json").write_text("{}")
    s = scenario_from_dict({"detectors": {"qsvm": {"model": "m.json"}}}, tmp_path)
    assert Path(s.detectors.qsvm.path) == tmp_path / "m.json"


def test_overlapping_attacks_rejected():
    a = {"class": "MiM", "target": {"sensor": "LT", "id": 3}, "spoof_value": 60, "t_insertion": 3}
    with pytest.raises(ScenarioError, match="overlapping"):
        scenario_from_dict({"attacks": [a, {**a, "t_insertion": 10}]})


def test_roundtrip_through_dict(tmp_path):
    s = load_scenario(SCENARIOS / "mim_case1.json")
    again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(s))))
    assert again == s


def test_parse_attack_forms():
    v = parse_attack({"class": "CI", "target": "valve", "spoof_value": 0.9, "unit": "fraction", "t_insertion": 5})
    assert v.target.kind == "valve" and v.spoof_value == 0.9
    p = parse_attack({"class": "CommandInject", "target": {"param": "Kp1"}, "spoof_value": 30, "t_insertion": 1})
    assert p.target.param == "Kp1"
    d = parse_attack({"class": "DoS", "target": {"sensor": "FT", "id": 2}, "delay": 2.5, "t_insertion": 1,
                      "t_end": 9})
    assert d.delay == 2.5 and d.t_end == 9.0
    for a in (v, p, d):
        assert parse_attack(attack_to_json(a)) == a


def test_run_duration_and_trip_limit():
    s = Scenario(duration=70.0)
    assert s.run_duration == 70.0 and s.trip.max_runtime == 180.0
    assert replace(s, duration=500.0).run_duration == 180.0
    assert Scenario(max_runtime=50.0).trip.max_runtime == 50.0
    with pytest.raises(ScenarioError):
        Scenario(attacks=(AttackSpec(AttackClass.MAN_IN_THE_MIDDLE, Target.sensor_channel("LT", 1), 1.0,
                                     spoof_value=1.0, t_end=5.0),
                          AttackSpec(AttackClass.MAN_IN_THE_MIDDLE, Target.sensor_channel("LT", 1), 2.0,
                                     spoof_value=1.0)))
