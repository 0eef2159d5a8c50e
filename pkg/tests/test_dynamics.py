import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atdm import arm, dynamics as dyn, sim, spatial

MODEL = dyn.AmsModel()
SERIAL = MODEL.with_placement(dyn.SERIAL_PLACEMENT)
ONE_ROW = arm.ArmChain(rows=(arm.MdhRow(0.0, 0.0, 0.0, 0.0, driver=1),),
                       base_offset=np.eye(4))


def point_model(coms, masses, links=None, chain=ONE_ROW):
    links = links or [0] * len(coms)
    bodies = tuple(dyn.BodySpec(f"b{i}", m, np.zeros(3), k, c)
                   for i, (c, m, k) in enumerate(zip(coms, masses, links)))
    return dyn.AmsModel(chain=chain, bodies=bodies, actuators=(), placement=())


def random_qs(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(arm.JOINT_LIMITS[:, 0], arm.JOINT_LIMITS[:, 1], size=(n, 4))


# --- bodies and placement ---

def test_body_validation():
    with pytest.raises(ValueError):
        dyn.BodySpec("x", -1.0, np.eye(3))
    with pytest.raises(ValueError):
        dyn.BodySpec("x", 1.0, [[1, 0.1, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        dyn.BodySpec("x", 1.0, np.diag([1.0, -1.0, 1.0]))
    with pytest.warns(dyn.InertiaWarning):
        dyn.BodySpec("x", 1.0, np.diag([1.0, 1.0, 3.0]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dyn.BodySpec("ok", 1.0, np.diag([1.0, 1.0, 1.5]))


def test_placement_validation():
    with pytest.raises(ValueError):
        MODEL.with_placement((0, 0, 0))
    with pytest.raises(ValueError):
        MODEL.with_placement((0, 0, 0, 9))


def test_total_mass_conserved_across_placements():
    assert MODEL.total_mass == SERIAL.total_mass
    assert MODEL.man_mass == pytest.approx(1.899 + sum(m for _, m, _ in dyn.LINK_TABLE))
    assert sorted(MODEL.elements()[0]) == sorted(SERIAL.elements()[0])


def test_base_mounted_actuators_do_not_move():
    qs = random_qs(50)
    _, pos = dyn.element_poses(MODEL, qs)
    act = pos[:, -4:]
    assert np.array_equal(act, np.broadcast_to(act[0], act.shape))
    _, pos_s = dyn.element_poses(SERIAL, qs)
    assert np.ptp(pos_s[:, -3:], axis=0).max() > 1e-3


# --- COM and inertia ---

def test_system_com_trivial_cases():
    m = point_model([(0, 0, 0)], [1.0])
    assert np.allclose(dyn.system_com(m, np.zeros(4)), 0)
    m = point_model([(0.3, 0, 0), (-0.3, 0, 0)], [1.0, 1.0])
    assert np.allclose(dyn.system_com(m, np.zeros(4)), 0, atol=1e-15)
    m = point_model([(0.3, 0, 0)], [1.0])
    total = m.total_mass
    assert np.allclose(dyn.system_com(m, np.zeros(4)), [0.3 / total, 0, 0])


def test_point_mass_parallel_axis():
    m = point_model([(0.2, 0, 0)], [1.5])
    inertia = dyn.manipulator_inertia(m, np.zeros(4))
    assert np.allclose(inertia, np.diag([0, 1.5 * 0.04, 1.5 * 0.04]))


def test_inertia_symmetric_psd():
    for inertia in dyn.manipulator_inertia(MODEL, random_qs(100, 1)):
        assert np.allclose(inertia, inertia.T, atol=1e-15)
        assert np.linalg.eigvalsh(inertia)[0] >= -1e-12


@given(st.floats(-np.pi / 4, np.pi / 4))
def test_self_inertia_eigenvalues_rotation_invariant(angle):
    tensor = np.diag([1e-3, 2e-3, 2.5e-3])
    body = dyn.BodySpec("b", 0.0, tensor, link=1)
    m = dyn.AmsModel(chain=ONE_ROW, bodies=(body,), actuators=(), placement=())
    inertia = dyn.manipulator_inertia(m, [angle, 0, 0, 0])
    assert np.allclose(np.linalg.eigvalsh(inertia), [1e-3, 2e-3, 2.5e-3])


# --- derivatives ---

def test_com_derivatives_static():
    traj = sim.TrajectorySpec(amplitudes=(0, 0, 0, 0))
    c = dyn.com_derivatives(MODEL, traj, np.array([0.0, 1.3]))
    for arr in (c.r_dot, c.r_ddot, c.inertia_dot, c.accel_moment):
        assert np.abs(arr).max() < 1e-10


def test_com_derivative_richardson():
    traj = sim.TrajectorySpec(amplitudes=(0.6, 0.5, 0.4, 1.0), periods=(1.0, 1.5, 2.0, 3.0))
    t = np.array([0.37])
    ref = dyn.com_derivatives(SERIAL, traj, t, h=1e-3 / 4)
    errs = [np.abs(dyn.com_derivatives(SERIAL, traj, t, h=h).r_dot - ref.r_dot).max()
            for h in (4e-3, 2e-3)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_com_velocity_shares_joint_period():
    traj = sim.TrajectorySpec(amplitudes=(0.5, 0, 0, 0), periods=(5.0, 10, 10, 10),
                              duration=20.0, dt=0.01)
    t = traj.times[:-1]
    rd = dyn.com_derivatives(SERIAL, traj, t).r_dot
    spectrum = np.abs(np.fft.rfft(rd - rd.mean(axis=0), axis=0)).sum(axis=1)
    freq = np.fft.rfftfreq(len(t), 0.01)
    strong = freq[spectrum > 0.1 * spectrum.max()]
    assert strong.min() == pytest.approx(0.2)
    shift = int(round(5.0 / 0.01))
    assert np.allclose(rd[shift:], rd[:-shift], atol=1e-9)
    assert not np.allclose(rd[shift // 2:], rd[:-shift // 2], atol=1e-6)


# --- coupling disturbance ---

def static_com(model, q):
    return dyn.com_derivatives(model, lambda t: np.broadcast_to(q, np.shape(t) + (4,)), 0.0)


def test_static_wrench_is_gravity_moment():
    q = np.array([0.2, -0.3, 0.1, 0.0])
    c = static_com(SERIAL, q)
    w = dyn.coupling_disturbance(SERIAL, dyn.AmsState(), c)
    assert np.allclose(w.force, 0)
    expected = SERIAL.total_mass * np.cross(c.r, dyn.GRAVITY * dyn.E3)
    assert np.allclose(w.torque, expected, atol=1e-9)
    oracle = dyn.disturbance_oracle(SERIAL, lambda t: np.broadcast_to(q, np.shape(t) + (4,)), 0.0)
    assert np.allclose(oracle.force, 0, atol=1e-6)
    assert np.allclose(oracle.torque, w.torque, atol=1e-6)


def test_literal_force_vanishes_for_fixed_uav():
    traj = sim.condition_trajectory(1)
    t = np.linspace(0, 5, 11)
    force, _ = sim.fixed_base_wrench(SERIAL, traj, t, extended=False)
    assert np.array_equal(force, np.zeros_like(force))


@pytest.mark.parametrize("condition", [1, 2, 3])
@pytest.mark.parametrize("placement", [dyn.ATDM_PLACEMENT, dyn.SERIAL_PLACEMENT])
def test_extended_wrench_matches_momentum_oracle(condition, placement):
    model = MODEL.with_placement(placement)
    traj = sim.condition_trajectory(condition)
    t = traj.times
    force, torque = sim.fixed_base_wrench(model, traj, t, extended=True)
    ref = dyn.disturbance_oracle(model, traj, t)
    for got, want in ((force, ref.force), (torque, ref.torque)):
        rms_err = np.sqrt(np.mean(np.sum((got - want) ** 2, axis=1)))
        rms = np.sqrt(np.mean(np.sum(want**2, axis=1)))
        if rms > 1e-9:
            assert rms_err < 0.02 * rms
        else:
            assert rms_err < 1e-9


def test_pendulum_reaction_amplitude():
    mass, length, amp, period = 0.5, 0.3, 0.01, 1.0
    model = point_model([(length, 0, 0)], [mass], links=[1])
    traj = sim.TrajectorySpec(amplitudes=(amp, 0, 0, 0), periods=(period, 1, 1, 1),
                              duration=2.0, dt=0.001)
    w = dyn.disturbance_oracle(model, traj, traj.times)
    peak = np.abs(w.force).max()
    assert peak == pytest.approx(mass * length * amp * (2 * np.pi / period) ** 2, rel=0.02)


# --- integrator ---

def hover_thrust(model=MODEL):
    return model.total_mass * dyn.GRAVITY


def no_wrench():
    return dyn.DisturbanceWrench(np.zeros(3), np.zeros(3))


def test_free_fall():
    dt = 0.01
    s = dyn.step_dynamics(MODEL, dyn.AmsState(), 0.0, np.zeros(3), no_wrench(), dt)
    assert np.allclose(s.v, [0, 0, dyn.GRAVITY * dt], rtol=1e-14)
    assert np.allclose(s.p, [0, 0, 0.5 * dyn.GRAVITY * dt**2], rtol=1e-12)
    state = dyn.AmsState()
    for _ in range(1000):
        state = dyn.step_dynamics(MODEL, state, 0.0, np.zeros(3), no_wrench(), 1e-3)
    assert state.v[2] == pytest.approx(dyn.GRAVITY, rel=1e-12)
    assert state.p[2] == pytest.approx(0.5 * dyn.GRAVITY, rel=1e-12)


def test_hover_is_stationary():
    state = dyn.AmsState()
    one = dyn.step_dynamics(MODEL, state, hover_thrust(), np.zeros(3), no_wrench(), 1e-3)
    assert np.abs(one.p).max() < 1e-9 and np.abs(one.v).max() < 1e-9
    for _ in range(10000):
        state = dyn.step_dynamics(MODEL, state, hover_thrust(), np.zeros(3), no_wrench(), 1e-3)
    assert np.linalg.norm(state.p) < 1e-6
    assert spatial.is_rotation(state.R)


def test_torque_free_energy_conserved():
    inertia = np.diag([0.11, 0.14, 0.22])
    model = dyn.AmsModel(uav_inertia=inertia)
    state = dyn.AmsState(omega=np.array([0.3, 2.0, 0.2]))
    energy = 0.5 * state.omega @ inertia @ state.omega
    for _ in range(10000):
        state = dyn.step_dynamics(model, state, 0.0, np.zeros(3), no_wrench(), 1e-3)
    assert 0.5 * state.omega @ inertia @ state.omega == pytest.approx(energy, rel=1e-6)
    assert spatial.is_rotation(state.R)


def test_fourth_order_convergence():
    inertia = np.diag([0.11, 0.14, 0.22])
    model = dyn.AmsModel(uav_inertia=inertia)
    start = dyn.AmsState(R=spatial.rpy_to_rot(0.1, -0.2, 0.3), omega=np.array([0.5, 1.5, -0.4]))
    torque = np.array([0.02, -0.01, 0.03])

    def run(dt, t_end=1.0):
        s = start
        for _ in range(int(round(t_end / dt))):
            s = dyn.step_dynamics(model, s, hover_thrust(model), torque, no_wrench(), dt)
        return s

    ref = run(1e-3)
    errs = []
    for dt in (0.04, 0.02):
        s = run(dt)
        errs.append(np.linalg.norm(s.p - ref.p) + np.linalg.norm(s.R - ref.R))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.5)


def test_step_errors():
    with pytest.raises(ValueError):
        dyn.step_dynamics(MODEL, dyn.AmsState(), 0.0, np.zeros(3), no_wrench(), 0.0)
    bad = dyn.DisturbanceWrench(np.array([np.nan, 0, 0]), np.zeros(3))
    with pytest.raises(dyn.DivergenceError):
        dyn.step_dynamics(MODEL, dyn.AmsState(), 0.0, np.zeros(3), bad, 1e-3)
