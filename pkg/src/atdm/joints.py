"""Tendon mechanics of the rolling elbow and the 3-DOF wrist.

Lengths are in millimetres, forces in newtons, torques in N*mm and
stiffness in N*mm/rad.  A tension-amplification tendon (TAT) is a single
cable wound ``N`` times between pulley groups; it multiplies the output
force by ``N`` and the stiffness by ``N**2``.
"""

from dataclasses import dataclass

import numpy as np

from . import spatial

ELBOW_RANGE = (-np.pi / 4, np.pi / 4)
WRIST_BEND_RANGE = (-np.pi / 4, np.pi / 4)
ROLL_RANGE = (-np.pi, np.pi)


class GeometryError(ValueError):
    """A joint design violates its geometric assumptions."""


@dataclass(frozen=True)
class CableSpec:
    """Steel cable properties.

    ``max_tension`` caps the usable tension difference (N).
    ``axial_stiffness`` is EA, force per unit strain (N).
    """
    max_tension: float = 300.0
    axial_stiffness: float = 2.8e4

    def __post_init__(self):
        if self.max_tension <= 0 or self.axial_stiffness <= 0:
            raise ValueError("cable limits must be positive")


@dataclass(frozen=True)
class ElbowDesign:
    R: float = 45.0
    d_e: float = 48.0 * np.sqrt(2.0)
    N_e: int = 6
    R_capstan: float = 11.0
    cable: CableSpec = CableSpec()

    def __post_init__(self):
        if self.R <= 0:
            raise GeometryError("rolling radius R must be positive")
        if not 0 < self.d_e < 2 * self.R * np.sqrt(2.0):
            raise GeometryError("tendon separation d_e must lie in (0, 2*sqrt(2)*R)")
        if self.N_e < 1 or int(self.N_e) != self.N_e:
            raise GeometryError("winding count N_e must be a positive integer")


@dataclass(frozen=True)
class WristDesign:
    w: float = 40.0
    h: float = 80.0
    N_w: int = 4
    N_r: float = 5.0
    R_capstan: float = 11.0
    R_capstan_roll: float = 25.0
    cable: CableSpec = CableSpec()

    def __post_init__(self):
        if self.w <= 0:
            raise GeometryError("tendon offset w must be positive")
        if self.N_w < 1 or int(self.N_w) != self.N_w:
            raise GeometryError("winding count N_w must be a positive integer")
        if self.N_r < 1:
            raise GeometryError("roll gear ratio N_r must be >= 1")


def check_range(name, value, bounds):
    lo, hi = bounds
    if not lo - 1e-12 <= value <= hi + 1e-12:
        raise ValueError(f"{name}={value:.6g} rad outside [{lo:.6g}, {hi:.6g}]")


def _tension(tau_motor, r_capstan, cable):
    if np.any(np.asarray(tau_motor) < 0):
        raise ValueError("motor torque must be non-negative")
    return np.minimum(cable.max_tension, np.asarray(tau_motor, dtype=float) / r_capstan)


# --- tension amplification ---------------------------------------------------

def tat_output_force(tau_motor, n_windings, r_capstan):
    """Pulling force of an N-times wound tendon driven by ``tau_motor``."""
    if tau_motor < 0:
        raise ValueError("motor torque must be non-negative")
    return n_windings * tau_motor / r_capstan


def tat_stiffness(cable_stiffness, n_windings):
    if n_windings < 1:
        raise ValueError("winding count must be >= 1")
    return n_windings**2 * cable_stiffness


# --- elbow -------------------------------------------------------------------

def elbow_tendon_lengths(theta, d=ElbowDesign()):
    """Agonist and antagonist tendon lengths; positive theta shortens the agonist."""
    s = d.d_e * np.sin(theta / 2)
    l_ago = d.N_e * (2 * d.R - s)
    l_ant = d.N_e * (2 * d.R + s)
    if np.any(l_ago <= 0) or np.any(l_ant <= 0):
        raise GeometryError("tendon length would become non-positive")
    return l_ago, l_ant


def elbow_tendon_deltas(theta, d=ElbowDesign()):
    s = d.N_e * d.d_e * np.sin(theta / 2)
    return -s, s


def elbow_transform(theta, R=45.0):
    """Fixed-side to moving-side frame of the rolling elbow (closed form)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [c, -s, 0.0, 2 * R * np.cos(theta / 2)],
        [s, c, 0.0, 2 * R * np.sin(theta / 2)],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])


def elbow_transform_composed(theta, R=45.0):
    half = spatial.transform(spatial.rot_z(theta / 2))
    return spatial.compose(half, spatial.trans_x(2 * R), half)


def elbow_torque(theta, tau_motor, d=ElbowDesign()):
    dT = _tension(tau_motor, d.R_capstan, d.cable)
    return d.N_e * d.d_e / 2 * np.cos(theta / 2) * dT


def elbow_stiffness(theta, d=ElbowDesign()):
    s = np.sin(theta / 2)
    den = 4 * d.R**2 - d.d_e**2 * s**2
    if np.any(den <= 0):
        raise GeometryError("elbow stiffness denominator 4R^2 - d_e^2 sin^2(theta/2) <= 0")
    return (d.N_e * d.d_e * np.cos(theta / 2))**2 * d.cable.axial_stiffness * d.R / den


# --- wrist -------------------------------------------------------------------

def wrist_transform(phi, theta, h=80.0):
    """Proximal to distal wrist frame for bend ``theta`` in direction ``phi`` (closed form)."""
    cf, sf = np.cos(phi), np.sin(phi)
    s2 = np.sin(theta / 2) ** 2
    st, ct = np.sin(theta), np.cos(theta)
    return np.array([
        [1 - 2 * cf**2 * s2, -np.sin(2 * phi) * s2, cf * st, h * cf * np.sin(theta / 2)],
        [-np.sin(2 * phi) * s2, 1 - 2 * sf**2 * s2, sf * st, h * sf * np.sin(theta / 2)],
        [-cf * st, -sf * st, ct, h * np.cos(theta / 2)],
        [0.0, 0.0, 0.0, 1.0],
    ])


def wrist_transform_composed(phi, theta, h=80.0):
    rz = spatial.transform(spatial.rot_z(phi))
    ry = spatial.transform(spatial.rot_y(theta / 2))
    return spatial.compose(rz, ry, spatial.trans_z(h), ry, spatial.transform(spatial.rot_z(-phi)))


def wrist_tendon_deltas(phi, theta, d=WristDesign()):
    """Total length change of the pitch and yaw antagonistic tendon pairs."""
    k = 2 * d.N_w * d.w * np.sin(theta / 2)
    return k * np.cos(phi), k * np.sin(phi)


WRIST_ANCHORS = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0],
                          [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]])


def wrist_tendon_lengths_geometric(phi, theta, d=WristDesign()):
    """Straight-chord tendon lengths ``(L_p1, L_p2, L_y1, L_y2)`` between matching anchors."""
    anchors = WRIST_ANCHORS * d.w
    moved = spatial.apply(wrist_transform(phi, theta, d.h), anchors)
    return d.N_w * np.linalg.norm(anchors - moved, axis=1)


def wrist2dof_torque(phi, theta, motor_torques, d=WristDesign()):
    t_pitch, t_yaw = motor_torques
    dT_pitch = _tension(t_pitch, d.R_capstan, d.cable)
    dT_yaw = _tension(t_yaw, d.R_capstan, d.cable)
    return d.N_w * d.w * np.cos(theta / 2) * (dT_pitch * np.abs(np.sin(phi))
                                              + dT_yaw * np.abs(np.cos(phi)))


def wrist2dof_stiffness(theta, d=WristDesign()):
    return 2 * d.N_w**2 * d.w**2 * np.cos(theta / 2)**2 * d.cable.axial_stiffness


def wrist_roll_torque_stiffness(tau_motor, d=WristDesign()):
    dT = _tension(tau_motor, d.R_capstan, d.cable)
    lever = d.N_r * d.R_capstan_roll
    return lever * dT, 2 * lever**2 * d.cable.axial_stiffness


def capstan_drive(tau_motor, r_capstan, r_output, cable=CableSpec()):
    """Plain single-cable capstan drive: torque and stiffness at the output drum."""
    dT = _tension(tau_motor, r_capstan, cable)
    return r_output * dT, 2 * r_output**2 * cable.axial_stiffness
