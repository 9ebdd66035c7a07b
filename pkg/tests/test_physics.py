import numpy as np
import pytest

from sgcat.control import SensorKind
from sgcat.diagnostics.physics import (
    Detector, NoiseProfiler, NpConfig, OsvConfig, PbdConfig, PhysicsDiagnostics, SensorValidator,
    np_detect, osv_detect, pbd_detect,
)
from sgcat.thermal import ClosureConfig, DomainError, SgParams, implied_flowrate, nominal_power, water_level

P = SgParams()
CL = ClosureConfig()
P_NOM = nominal_power(P, CL)
W_NOM = implied_flowrate(P_NOM, P)


def test_pbd_consistent_flow_is_quiet():
    v = pbd_detect(P_NOM, W_NOM, P)
    assert v.detector is Detector.PBD_KF
    assert not v.alarmed and v.residual == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("bias,alarmed", [(0.005, False), (0.0099, False), (0.0101, True), (-0.02, True)])
def test_pbd_tolerance(bias, alarmed):
    v = pbd_detect(P_NOM, W_NOM * (1 + bias), P, tol=1e-2, t=4.2)
    assert v.alarmed is alarmed
    assert v.residual == pytest.approx(abs(bias))
    assert v.t_first_alarm == (4.2 if alarmed else None)


def test_pbd_rejects_nonpositive_power():
    with pytest.raises(DomainError):
        pbd_detect(0.0, W_NOM, P)


def test_osv_consensus_and_disagreement():
    taus = {SensorKind.LT: 5.0, SensorKind.FT: 45.0}
    quiet = osv_detect({SensorKind.LT: [50.0, 50.2, 49.9], SensorKind.FT: [450.0, 452.0]}, taus)
    assert not quiet.alarmed and quiet.residual == pytest.approx(0.3 / 5.0)
    loud = osv_detect({SensorKind.LT: [50.0, 50.2, 64.1], SensorKind.FT: [450.0, 452.0]}, taus, t=3.0)
    assert loud.alarmed and loud.metadata["worst_kind"] == "LT"
    assert loud.residual == pytest.approx(14.1 / 5.0)


def test_osv_identical_attack_is_invisible():
    taus = {SensorKind.LT: 5.0}
    assert not osv_detect({SensorKind.LT: [64.1, 64.1, 64.1]}, taus).alarmed


def test_osv_single_channel_skipped():
    v = osv_detect({SensorKind.LT: [50.0], SensorKind.FT: [1.0, 1.0]}, {SensorKind.LT: 1.0, SensorKind.FT: 1.0})
    assert v.metadata["skipped"] == ["LT"]
    assert not v.alarmed


def test_np_branches():
    assert np_detect([5.0] * 5, 5.0).metadata["branch"] == "lower"
    assert np_detect([5.0] * 5, 7.0).metadata["branch"] == "upper"
    v = np_detect([5.0, 5.1, 4.9, 5.05, 4.95], 5.1)
    assert not v.alarmed and v.residual == pytest.approx(0.1)


def test_noise_profiler_lower_branch_needs_m_consecutive_steps():
    prof = NoiseProfiler(NpConfig(m=5), {"LT3": 1.0})
    verdicts = [prof.step({"LT3": 50.0}, 0.1 * k) for k in range(12)]
    assert verdicts[:5] == [None] * 5
    assert [v.alarmed for v in verdicts[5:]] == [False] * 4 + [True] * 3
    assert prof.latch.t_first_alarm == pytest.approx(0.9)
    assert prof.events["lower"][1] == "LT3"


def test_noise_profiler_quiet_on_gaussian_noise():
    rng = np.random.default_rng(3)
    prof = NoiseProfiler(NpConfig(), {"LT1": 1.0, "FT1": 100.0 / 450.0})
    for k in range(5000):
        v = prof.step({"LT1": 50.0 + 0.1 * rng.standard_normal(), "FT1": 450.0 + 0.45 * rng.standard_normal()},
                      0.1 * k)
    assert not prof.latch.alarmed and prof.events == {}
    assert v is not None


def test_noise_profiler_upper_branch_on_jump():
    prof = NoiseProfiler(NpConfig(), {"FT1": 1.0})
    for k in range(5):
        prof.step({"FT1": 10.0 + 0.1 * (-1) ** k}, k)
    v = prof.step({"FT1": 14.0}, 5.0)
    assert v.alarmed and v.metadata == {"branch": "upper", "channel": "FT1"}


def _diag():
    span = CL.z_high - CL.z_low
    return PhysicsDiagnostics(PbdConfig(), P, [W_NOM, water_level(W_NOM, P)], sigma_ws=0.45,
                              sigma_z0=0.001 * span)


def test_physics_diagnostics_burn_in_and_quiet_baseline():
    d = _diag()
    z = water_level(W_NOM, P)
    rng = np.random.default_rng(0)
    out = [d.step(W_NOM + 0.45 * rng.standard_normal(), z, P_NOM, 0.1 * k) for k in range(700)]
    assert out[:10] == [None] * 10
    assert not d.latch.alarmed
    assert abs(d.ws_estimate - W_NOM) / W_NOM < 1e-3


def test_physics_diagnostics_catches_flow_spoof():
    d = _diag()
    z = water_level(W_NOM, P)
    for k in range(30):
        d.step(W_NOM, z, P_NOM, 0.1 * k)
    for k in range(30, 200):
        d.step(W_NOM * 1.25, z, P_NOM, 0.1 * k)
    assert d.latch.alarmed
    assert 3.0 <= d.latch.t_first_alarm < 5.0


def test_sensor_validator_uses_fractional_tolerance():
    sv = SensorValidator(OsvConfig(tau_lt=0.1), {SensorKind.LT: 50.0, SensorKind.FT: 450.0, SensorKind.ST: 450.0})
    assert sv.taus[SensorKind.LT] == pytest.approx(5.0)
    assert not sv.step({SensorKind.LT: [50.0, 54.9]}, 0.0).alarmed
    assert sv.step({SensorKind.LT: [50.0, 55.1]}, 0.1).alarmed
    assert sv.latch.t_first_alarm == 0.1
