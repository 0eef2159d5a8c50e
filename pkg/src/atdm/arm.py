"""Arm kinematics: a 7-row modified D-H chain driven by 4 independent angles.

Pairs of rows share one angle ("virtual coupled joints"), which is how the
rolling elbow and the rolling wrist are expressed as ordinary revolute
rows.  Lengths are millimetres in the arm frame.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import spatial


class JointRangeError(ValueError):
    pass


@dataclass(frozen=True)
class MdhRow:
    """One modified (Craig) D-H row: ``RotX(alpha_prev) TransX(a_prev) RotZ(theta) TransZ(d)``.

    ``theta = theta_offset + driver_sign * q[driver - 1]``.
    """
    theta_offset: float
    d: float
    a_prev: float
    alpha_prev: float
    driver: int
    driver_sign: float = 1.0

    def __post_init__(self):
        if self.driver not in (1, 2, 3, 4):
            raise ValueError(f"driver index must be in 1..4, got {self.driver}")


MDH_ROWS = (
    MdhRow(0.0, 0.0, 200.0, 0.0, driver=1),
    MdhRow(np.pi / 2, 0.0, 80.0, 0.0, driver=1),
    MdhRow(0.0, 300.0, 1.0, np.pi / 2, driver=2),
    MdhRow(-np.pi / 2, 0.0, 0.0, -np.pi / 2, driver=3),
    MdhRow(np.pi / 2, 0.0, 90.0, 0.0, driver=3),
    MdhRow(0.0, 0.0, 0.0, np.pi / 2, driver=2),
    MdhRow(0.0, 100.0, 0.0, 0.0, driver=4),
)

JOINT_LIMITS = np.array([
    [-np.pi / 4, np.pi / 4],
    [-np.pi / 4, np.pi / 4],
    [-np.pi / 4, np.pi / 4],
    [-np.pi, np.pi],
])

DEFAULT_BASE_OFFSET = (0.0, 0.0, 90.0)  # mm, UAV COM -> arm base, NED (below)


@dataclass(frozen=True)
class ArmChain:
    rows: tuple = MDH_ROWS
    base_offset: np.ndarray = field(
        default_factory=lambda: spatial.transform(trans=DEFAULT_BASE_OFFSET))
    limits: np.ndarray = field(default_factory=lambda: JOINT_LIMITS.copy())

    def reach_bound(self):
        """Upper bound on ||^B p|| of any chain frame (triangle inequality)."""
        return (np.linalg.norm(self.base_offset[:3, 3])
                + sum(abs(r.a_prev) + abs(r.d) for r in self.rows))


def check_joints(q, limits=JOINT_LIMITS):
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 4:
        raise JointRangeError(f"expected 4 joint angles, got shape {q.shape}")
    for i in range(4):
        lo, hi = limits[i]
        bad = (q[..., i] < lo - 1e-12) | (q[..., i] > hi + 1e-12)
        if np.any(bad):
            worst = np.asarray(q[..., i])[bad].flat[0]
            raise JointRangeError(
                f"joint {i + 1} angle {worst:.6g} rad outside [{lo:.6g}, {hi:.6g}]")
    return q


def expand_joints(q, chain=None, check=True):
    """Map the 4 independent angles onto the per-row chain angles (batched over leading axes)."""
    chain = chain or ArmChain()
    q = np.asarray(q, dtype=float)
    if check:
        check_joints(q, chain.limits)
    return np.stack([r.theta_offset + r.driver_sign * q[..., r.driver - 1] for r in chain.rows],
                    axis=-1)


def _mdh(alpha, a, theta, d):
    """Batched modified D-H link transform; ``theta`` may carry leading axes."""
    theta = np.asarray(theta, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    t = np.zeros(theta.shape + (4, 4))
    t[..., 0, 0] = ct
    t[..., 0, 1] = -st
    t[..., 0, 3] = a
    t[..., 1, 0] = st * ca
    t[..., 1, 1] = ct * ca
    t[..., 1, 2] = -sa
    t[..., 1, 3] = -sa * d
    t[..., 2, 0] = st * sa
    t[..., 2, 1] = ct * sa
    t[..., 2, 2] = ca
    t[..., 2, 3] = ca * d
    t[..., 3, 3] = 1.0
    return t


def link_frames(chain, q, check=True):
    """All chain frames in the UAV body frame: shape ``(..., n_rows + 1, 4, 4)``.

    Frame 0 is the arm base; frame ``i`` is the frame attached to row ``i``.
    """
    angles = expand_joints(q, chain, check)
    lead = angles.shape[:-1]
    frames = np.empty(lead + (len(chain.rows) + 1, 4, 4))
    cur = np.broadcast_to(chain.base_offset, lead + (4, 4)).copy()
    frames[..., 0, :, :] = cur
    for i, row in enumerate(chain.rows):
        cur = cur @ _mdh(row.alpha_prev, row.a_prev, angles[..., i], row.d)
        frames[..., i + 1, :, :] = cur
    return frames


def forward_kinematics(chain, q, check=True):
    """End-effector pose ``^B T_E`` (mm)."""
    return link_frames(chain, q, check)[..., -1, :, :]


def jacobians(chain, q, check=True):
    """Geometric Jacobians ``(J_v, J_w)``, each 3x4, from joint rates to ^B end-effector rates.

    A coupled angle drives several rows, so its column is the sum of those rows' columns.
    """
    frames = link_frames(chain, q, check)
    p_e = frames[-1, :3, 3]
    j_v = np.zeros((3, 4))
    j_w = np.zeros((3, 4))
    for i, row in enumerate(chain.rows):
        z = frames[i + 1, :3, 2]
        o = frames[i + 1, :3, 3]
        col = row.driver - 1
        j_v[:, col] += row.driver_sign * np.cross(z, p_e - o)
        j_w[:, col] += row.driver_sign * z
    return j_v, j_w


def end_effector_inertial(uav_position, uav_rot, uav_velocity, uav_omega, chain, q, qdot,
                          check=True):
    """End-effector position, velocity and angular velocity in the inertial frame.

    ``uav_omega`` is the inertial-frame angular velocity of the body.  Arm
    quantities are converted from mm to m.
    """
    t_be = forward_kinematics(chain, q, check)
    j_v, j_w = jacobians(chain, q, check)
    p_be = t_be[:3, 3] / 1000.0
    qdot = np.asarray(qdot, dtype=float)
    rp = uav_rot @ p_be
    position = np.asarray(uav_position, dtype=float) + rp
    velocity = (np.asarray(uav_velocity, dtype=float) - spatial.skew(rp) @ uav_omega
                + uav_rot @ (j_v @ qdot / 1000.0))
    omega = np.asarray(uav_omega, dtype=float) + uav_rot @ (j_w @ qdot)
    return position, velocity, omega


class WorkspaceMode(Enum):
    HOVER = "hover"
    HOVER_YAW = "hover-yaw"
    YAW_VERTICAL = "yaw-vertical"


def workspace_sample(chain=None, mode=WorkspaceMode.HOVER, resolution=17, yaw_samples=25,
                     vertical_samples=11, vertical_range=0.5):
    """End-effector positions (m, UAV-centred world frame) over a joint grid.

    The roll angle does not move the tool point and is held at zero.  Modes
    add UAV yaw in [-pi, pi] and, for ``YAW_VERTICAL``, a vertical offset
    in [-vertical_range, vertical_range].  Every grid contains zero so the
    clouds nest.
    """
    chain = chain or ArmChain()
    mode = WorkspaceMode(mode)
    if resolution < 2:
        raise ValueError("resolution must be >= 2 samples per axis")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in chain.limits[:3]]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    q = np.hstack([grid, np.zeros((len(grid), 1))])
    pts = forward_kinematics(chain, q)[:, :3, 3] / 1000.0
    if mode is WorkspaceMode.HOVER:
        return pts
    yaws = np.linspace(-np.pi, np.pi, yaw_samples)
    pts = np.concatenate([pts @ spatial.rot_z(y).T for y in yaws])
    if mode is WorkspaceMode.HOVER_YAW:
        return pts
    if vertical_range <= 0:
        raise ValueError("vertical_range must be positive")
    dz = np.linspace(-vertical_range, vertical_range, vertical_samples)
    return np.concatenate([pts + [0.0, 0.0, z] for z in dz])
