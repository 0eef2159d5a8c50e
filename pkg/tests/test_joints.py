import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atdm import joints as J
from atdm import spatial
from oracles import elbow_chord_lengths, elbow_stiffness_virtual_work

D_E = 48 * np.sqrt(2)
bend = st.floats(-np.pi / 4, np.pi / 4, allow_nan=False)
phis = st.floats(-np.pi, np.pi, allow_nan=False)


# --- tension amplification ---

def test_tat_force():
    assert J.tat_output_force(0.0, 6, 11.0) == 0.0
    assert J.tat_output_force(1100.0, 6, 11.0) == pytest.approx(600.0)
    assert J.tat_output_force(1100.0, 12, 11.0) == pytest.approx(1200.0)
    with pytest.raises(ValueError):
        J.tat_output_force(-1.0, 6, 11.0)


def test_tat_stiffness_is_n_squared():
    assert J.tat_stiffness(2.8e4, 1) == 2.8e4
    assert J.tat_stiffness(2.8e4, 6) == 36 * 2.8e4
    vals = [J.tat_stiffness(1.0, n) for n in range(1, 9)]
    assert vals == [n**2 for n in range(1, 9)]
    with pytest.raises(ValueError):
        J.tat_stiffness(1.0, 0)


# --- elbow ---

def test_elbow_lengths_examples():
    ago, ant = J.elbow_tendon_lengths(0.0)
    assert ago == ant == pytest.approx(540.0)
    d_ago, d_ant = J.elbow_tendon_deltas(np.pi / 2)
    assert d_ago == pytest.approx(-288.0) and d_ant == pytest.approx(288.0)


@given(bend)
def test_elbow_lengths_match_chord_oracle(theta):
    ref = elbow_chord_lengths(theta, 45.0, D_E, 6)
    assert np.allclose(J.elbow_tendon_lengths(theta), ref, rtol=1e-12)


@given(bend)
def test_elbow_compensation_exact(theta):
    d_ago, d_ant = J.elbow_tendon_deltas(theta)
    assert d_ago + d_ant == 0.0


def test_elbow_design_validation():
    with pytest.raises(J.GeometryError):
        J.ElbowDesign(R=10.0, d_e=40.0)
    with pytest.raises(J.GeometryError):
        J.ElbowDesign(N_e=0)


def test_elbow_transform_examples():
    assert np.allclose(J.elbow_transform(0.0), spatial.trans_x(90.0))
    t = J.elbow_transform(np.pi / 2)
    assert np.allclose(t[:3, 3], [63.63961030678928, 63.63961030678928, 0.0], atol=1e-12)


@given(st.floats(-np.pi, np.pi))
def test_elbow_transform_closed_form_vs_composed(theta):
    assert np.allclose(J.elbow_transform(theta), J.elbow_transform_composed(theta),
                       atol=1e-12, rtol=0)


def test_elbow_torque_examples():
    # 6 * 67.882 / 2 * 300
    assert J.elbow_torque(0.0, 1e5) == pytest.approx(61094.02, rel=1e-6)
    assert J.elbow_torque(0.0, 0.0) == 0.0
    assert J.elbow_torque(0.6, 1000.0) == pytest.approx(np.cos(0.3) * J.elbow_torque(0.0, 1000.0))
    with pytest.raises(ValueError):
        J.elbow_torque(0.0, -5.0)


def test_elbow_stiffness_zero_angle():
    d = J.ElbowDesign()
    ref = (6 * D_E) ** 2 * d.cable.axial_stiffness / (4 * 45.0)
    assert J.elbow_stiffness(0.0) == pytest.approx(ref, rel=1e-14)


# frozen from the virtual-work oracle (chord lengths, springs EA/l_i)
@pytest.mark.parametrize("theta, frozen", [
    (0.0, 25804800.001501825),
    (0.3, 25553168.316433866),
    (-0.6, 24782460.206812695),
    (np.pi / 4, 24027554.524686467),
])
def test_elbow_stiffness_virtual_work(theta, frozen):
    assert J.elbow_stiffness(theta) == pytest.approx(frozen, rel=1e-8)


@given(bend)
def test_elbow_stiffness_vs_oracle_live(theta):
    ref = elbow_stiffness_virtual_work(theta, 45.0, D_E, 6, 2.8e4)
    assert J.elbow_stiffness(theta) == pytest.approx(ref, rel=1e-2)


@given(bend, st.integers(1, 8))
def test_elbow_stiffness_scales_n_squared(theta, n):
    one = J.elbow_stiffness(theta, J.ElbowDesign(N_e=1))
    assert J.elbow_stiffness(theta, J.ElbowDesign(N_e=n)) == pytest.approx(n**2 * one, rel=1e-14)


def test_elbow_stiffness_guard():
    # legal design whose denominator still vanishes past the joint range
    d = J.ElbowDesign(R=45.0, d_e=120.0)
    with pytest.raises(J.GeometryError):
        J.elbow_stiffness(np.pi, d)


# --- wrist ---

def test_wrist_transform_examples():
    assert np.allclose(J.wrist_transform(0.7, 0.0), spatial.trans_z(80.0))
    t = J.wrist_transform(0.0, 0.8)
    assert np.allclose(t[:3, 3], [80 * np.sin(0.4), 0.0, 80 * np.cos(0.4)])


@given(phis, st.floats(-np.pi / 2, np.pi / 2))
def test_wrist_transform_closed_form(phi, theta):
    t = J.wrist_transform(phi, theta)
    assert np.allclose(t, J.wrist_transform_composed(phi, theta), atol=1e-12)
    assert spatial.is_rotation(t[:3, :3], 1e-12)
    assert np.allclose(t, J.wrist_transform(phi + 2 * np.pi, theta), atol=1e-12)


def test_wrist_tendon_delta_examples():
    assert J.wrist_tendon_deltas(0.3, 0.0) == (0.0, 0.0)
    p, y = J.wrist_tendon_deltas(0.0, np.pi / 2)
    assert p == pytest.approx(226.27416997969522) and y == 0.0
    p, y = J.wrist_tendon_deltas(np.pi / 4, 0.5)
    assert p == pytest.approx(y, rel=1e-15)


def test_wrist_geometric_straight():
    assert np.allclose(J.wrist_tendon_lengths_geometric(1.1, 0.0), 4 * 80.0)


@given(phis, st.floats(0, np.pi / 4))
def test_wrist_chord_model_reproduces_deltas(phi, theta):
    d = J.WristDesign()
    lengths = J.wrist_tendon_lengths_geometric(phi, theta, d)
    rest = d.N_w * d.h
    pitch, yaw = J.wrist_tendon_deltas(phi, theta, d)
    # +x/+y anchors shorten by the pair delta, their antagonists lengthen by it
    assert np.allclose(lengths - rest, [-pitch, pitch, -yaw, yaw], atol=1e-9)


@given(phis, st.floats(0, np.pi / 4))
def test_wrist_lengths_half_turn_swaps_pairs(phi, theta):
    a = J.wrist_tendon_lengths_geometric(phi, theta)
    b = J.wrist_tendon_lengths_geometric(phi + np.pi, theta)
    assert np.allclose(a, b[[1, 0, 3, 2]], atol=1e-9)


def test_wrist_torque_examples():
    assert J.wrist2dof_torque(0.4, 0.2, (0.0, 0.0)) == 0.0
    only_yaw = J.wrist2dof_torque(0.0, 0.2, (1e5, 500.0))
    assert only_yaw == pytest.approx(J.wrist2dof_torque(0.0, 0.2, (0.0, 500.0)))
    sat = J.wrist2dof_torque(np.pi / 4, 0.0, (1e5, 1e5))
    assert sat == pytest.approx(4 * 40 * 300 * np.sqrt(2), rel=1e-12)
    assert sat == pytest.approx(67882.25, rel=1e-6)


# frozen from the chord oracle at theta = 0.5 for three bend directions
@pytest.mark.parametrize("phi, frozen", [
    (0.0, 1345851180.627832),
    (np.pi / 3, 1345851180.3456178),
    (1.0, 1345851180.490712),
])
def test_wrist_stiffness_matches_chord_oracle(phi, frozen):
    assert J.wrist2dof_stiffness(0.5) == pytest.approx(frozen, rel=1e-9)


@given(st.floats(0, np.pi / 4), phis)
def test_wrist_stiffness_phi_independent(theta, phi):
    from oracles import wrist_stiffness_from_chords
    live = wrist_stiffness_from_chords(phi, theta, 40.0, 80.0, 4, 2.8e4)
    assert live == pytest.approx(J.wrist2dof_stiffness(theta), rel=1e-6)
    assert J.wrist2dof_stiffness(0.0) == 2 * 16 * 1600 * 2.8e4
    half = J.WristDesign(w=20.0)
    assert J.wrist2dof_stiffness(theta, half) == pytest.approx(J.wrist2dof_stiffness(theta) / 4)


def test_roll_examples():
    torque, stiff = J.wrist_roll_torque_stiffness(1e5)
    assert torque == pytest.approx(37500.0)
    t0, s0 = J.wrist_roll_torque_stiffness(0.0)
    assert t0 == 0.0 and s0 == stiff > 0


@given(st.floats(0, 1e4))
def test_roll_reduces_to_capstan(tau):
    d = J.WristDesign(N_r=1.0)
    assert J.wrist_roll_torque_stiffness(tau, d) == pytest.approx(
        J.capstan_drive(tau, d.R_capstan, d.R_capstan_roll, d.cable))


@given(bend)
def test_stiffness_even_torque_nonnegative(theta):
    assert J.elbow_stiffness(theta) == pytest.approx(J.elbow_stiffness(-theta), rel=1e-14)
    assert J.wrist2dof_stiffness(theta) == pytest.approx(J.wrist2dof_stiffness(-theta), rel=1e-14)
    assert J.elbow_torque(theta, 800.0) >= 0
    assert J.wrist2dof_torque(0.3, theta, (800.0, 200.0)) >= 0


@given(bend, st.integers(1, 8), st.floats(0, 3000))
def test_tat_amplification_in_joints(theta, n, tau):
    one = J.ElbowDesign(N_e=1)
    many = J.ElbowDesign(N_e=n)
    assert J.elbow_torque(theta, tau, many) == pytest.approx(n * J.elbow_torque(theta, tau, one))


def test_design_validation():
    with pytest.raises(ValueError):
        J.CableSpec(max_tension=0)
    with pytest.raises(J.GeometryError):
        J.WristDesign(w=0)
    with pytest.raises(J.GeometryError):
        J.WristDesign(N_r=0.5)
    with pytest.raises(ValueError):
        J.check_range("elbow", 1.0, J.ELBOW_RANGE)
