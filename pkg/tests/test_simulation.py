from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hairclip import simulation as sim
from hairclip.mechanics import EnergyLandscape
from hairclip.simulation import SUBSTRATES, GaitMode, RobotConfig, SubstrateFriction

WOOD = SUBSTRATES["wood"]


def cfg(**kw) -> RobotConfig:
    return dataclasses.replace(RobotConfig(), **kw)


@pytest.fixture(scope="module")
def wood_run():
    return sim.run_gait(RobotConfig(), 5.0)


# friction law


@given(n=st.floats(0.0, 10.0), v=st.floats(-1.0, 1.0))
def test_friction_opposes_slip_and_is_bounded(n, v):
    f = sim.friction_force(n, WOOD, v)
    assert f * v <= 0.0
    assert abs(f) <= n * max(WOOD.mu_plastic, WOOD.mu_rubber) + 1e-15


def test_friction_anisotropy():
    fwd = sim.friction_force(1.0, WOOD, 1.0)
    back = sim.friction_force(1.0, WOOD, -1.0)
    assert fwd == pytest.approx(-WOOD.mu_plastic) and back == pytest.approx(WOOD.mu_rubber)
    assert sim.friction_force(1.0, WOOD, 0.0) == 0.0


def test_friction_rejects_negative_normal():
    with pytest.raises(sim.ValidationError):
        sim.friction_force(-1.0, WOOD, 0.1)


def test_substrate_swap():
    sw = WOOD.swapped()
    assert (sw.mu_plastic, sw.mu_rubber) == (WOOD.mu_rubber, WOOD.mu_plastic)
    assert sw.anisotropy == pytest.approx(1 / WOOD.anisotropy)


# spine and actuation


def test_spine_force_wells_and_walls():
    c = RobotConfig()
    assert sim.spine_force(c, 0.0, 0.0) == 0.0
    assert sim.spine_force(c, c.stroke, 0.0) == pytest.approx(0.0, abs=1e-9)
    assert sim.spine_force(c, -1e-3, 0.0) > 0 and sim.spine_force(c, c.stroke + 1e-3, 0.0) < 0
    assert sim.spine_force(c, 0.0, 0.1) == pytest.approx(-c.spine_damping * 0.1)


def test_servo_square_wave():
    c = cfg(frequency=2.0)
    assert sim.servo_target(c, 0.0) is sim.SpineTarget.FLEXION
    assert sim.servo_target(c, 0.2499) is sim.SpineTarget.FLEXION
    assert sim.servo_target(c, 0.25) is sim.SpineTarget.EXTENSION
    assert sim.servo_target(c, 0.5) is sim.SpineTarget.FLEXION
    events = sim.actuate(c, 1.0)
    assert [e[0] for e in events] == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])
    assert [e[1] for e in events] == [1, 0, 1, 0, 1]


def test_rest_state_is_static():
    c = RobotConfig()
    s0 = sim.rest_state(c)
    s1 = sim.step(s0, cfg(actuated=False), 1e-4)
    assert abs(s1.vy_fore) < 1e-12 and abs(s1.vy_hind) < 1e-12
    assert s0.contact_fore and s0.contact_hind


def test_mode_selects_landscapes_and_kicks():
    g = RobotConfig()
    r = cfg(mode=GaitMode.REAR_ONLY)
    assert len(g.active_landscapes) == 2 and len(r.active_landscapes) == 1
    assert g.kicked == (True, True) and r.kicked == (False, True)
    assert r.active_barrier == pytest.approx(g.active_barrier / 2)


# configuration validation


@pytest.mark.parametrize(
    "kw",
    [
        dict(total_mass=0.0),
        dict(mass_split=1.0),
        dict(frequency=0.0),
        dict(flexion_length=0.3),
        dict(fore_landscape=EnergyLandscape(0.02, 0.01)),
        dict(servo_energy_limit=1e-3),
        dict(servo_rate=0.05),
    ],
)
def test_config_validation(kw):
    with pytest.raises(sim.ConfigError):
        cfg(**kw)


def test_dt_and_duration_checks():
    with pytest.raises(sim.ConfigError):
        sim.run_gait(RobotConfig(), 5.0, dt=0.01)
    with pytest.raises(sim.ConfigError):
        sim.run_gait(RobotConfig(), 1.0)


def test_instability_guard():
    with pytest.raises(sim.SimulationInstability):
        sim.run_gait(cfg(contact_stiffness=1e9), 1.5)


# whole-run properties


def test_reference_run_moves_forward(wood_run):
    assert wood_run.mean_speed > 0
    assert 0.1 <= wood_run.mean_speed / RobotConfig().body_length <= 3.0
    airborne = ~(wood_run.contact_fore | wood_run.contact_hind)
    assert 0.0 < airborne.mean() < 0.5


def test_energy_audit(wood_run):
    assert wood_run.audit_error() < 0.01
    assert wood_run.injected_energy > 0


def test_unactuated_robot_stays_put():
    tr = sim.run_gait(cfg(actuated=False), 1.5)
    assert tr.net_displacement == 0.0 and tr.injected_energy == 0.0


@pytest.mark.parametrize("mu", [0.3, 0.6])
def test_isotropic_friction_does_not_rectify(mu):
    tr = sim.run_gait(cfg(substrate=SubstrateFriction("iso", mu, mu)), 5.0)
    assert abs(tr.net_displacement) < 1e-3


def test_swapped_friction_reverses_motion(wood_run):
    tr = sim.run_gait(cfg(substrate=WOOD.swapped()), 5.0)
    assert tr.net_displacement == -wood_run.net_displacement


def test_time_step_convergence():
    a = sim.run_gait(RobotConfig(), 3.0, dt=1e-4)
    b = sim.run_gait(RobotConfig(), 3.0, dt=5e-5)
    assert b.net_displacement == pytest.approx(a.net_displacement, rel=0.02)


def test_speed_grows_with_anisotropy():
    speeds = [sim.run_gait(cfg(substrate=SubstrateFriction("s", 0.25, mr)), 3.0).mean_speed for mr in (0.4, 0.6, 0.8)]
    assert speeds[0] < speeds[1] < speeds[2]


def test_determinism():
    a = sim.run_gait(RobotConfig(), 3.0)
    b = sim.run_gait(RobotConfig(), 3.0)
    assert sim.write_trajectory_csv(a) == sim.write_trajectory_csv(b)


def test_trajectory_csv_round_trip(wood_run):
    text = sim.write_trajectory_csv(wood_run)
    back = sim.read_trajectory_csv(text)
    assert list(back) == list(sim.TRAJECTORY_HEADER)
    np.testing.assert_allclose(back["x_fore_m"], wood_run.x_fore, rtol=1e-9, atol=1e-15)
    np.testing.assert_array_equal(back["contact_hind"], wood_run.contact_hind)
    np.testing.assert_allclose(back["t_s"], wood_run.t, atol=5e-7)


def test_sampling_grid(wood_run):
    assert len(wood_run) == 5001
    assert wood_run.t[-1] == pytest.approx(5.0)
    assert wood_run.sample_period == pytest.approx(1e-3)


def test_suite_preserves_order_and_reports_failures():
    entries = [
        sim.SuiteEntry("b", cfg(frequency=2.0), duration=2.0),
        sim.SuiteEntry("short", cfg(frequency=0.5), duration=2.0),
        sim.SuiteEntry("a", cfg(frequency=3.0), duration=2.0),
    ]
    rows = sim.experiment_suite(entries)
    assert [r.label for r in rows] == ["b", "short", "a"]
    assert rows[1].error and math.isnan(rows[1].speed_mm_s)
    assert rows[0].error is None and rows[0].speed_mm_s > 0
    parallel = sim.experiment_suite(entries, workers=2)
    assert sim.write_suite_csv(parallel) == sim.write_suite_csv(rows)


def test_suite_csv_round_trip():
    rows = sim.experiment_suite([sim.SuiteEntry("x", RobotConfig(), duration=2.0)])
    text = sim.write_suite_csv(rows)
    assert text.splitlines()[0] == ",".join(sim.SUITE_HEADER)
    back = sim.read_suite_csv(text)
    assert back[0].speed_mm_s == pytest.approx(rows[0].speed_mm_s, rel=1e-5)


def test_empty_suite_rejected():
    with pytest.raises(sim.ConfigError):
        sim.experiment_suite([])


def test_rear_only_distinct_from_gallop_with_asymmetric_landscapes():
    c = RobotConfig()
    fore = EnergyLandscape(15e-3, c.stroke)
    rear = EnergyLandscape(30e-3, c.stroke)
    gallop = sim.run_gait(cfg(fore_landscape=fore, rear_landscape=rear), 5.0)
    rear_only = sim.run_gait(cfg(fore_landscape=fore, rear_landscape=rear, mode=GaitMode.REAR_ONLY), 5.0)
    diff = abs(rear_only.net_displacement - gallop.net_displacement)
    assert diff > 0.05 * abs(gallop.net_displacement)
    assert rear_only.audit_error() < 0.01 and gallop.audit_error() < 0.01
