"""Rigid-body dynamics of the UAV + arm system and the arm's coupling disturbance.

SI units throughout (m, kg, s).  Arm geometry comes from :mod:`atdm.arm` in
millimetres and is converted here, the single unit boundary.  Frames are
NED: gravity is ``+9.81`` along inertial z and thrust acts along body -z.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import spatial
from .spatial import cross
from .arm import ArmChain, link_frames

GRAVITY = 9.81
E3 = np.array([0.0, 0.0, 1.0])


class InertiaWarning(UserWarning):
    """An inertia tensor that no physical rigid body can have."""


@dataclass(frozen=True)
class BodySpec:
    """A rigid mass element fixed to chain frame ``link`` (0 = arm base).

    ``com`` is the centre of mass in that frame (m); ``inertia`` is about the
    COM with axes parallel to the link frame (kg m^2).
    """
    name: str
    mass: float
    inertia: np.ndarray
    link: int = 0
    com: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape == (3,):
            inertia = np.diag(inertia)
        object.__setattr__(self, "inertia", inertia)
        if self.mass < 0:
            raise ValueError(f"{self.name}: negative mass")
        if not np.allclose(inertia, inertia.T):
            raise ValueError(f"{self.name}: inertia tensor not symmetric")
        ev = np.linalg.eigvalsh(inertia)
        if ev[0] < -1e-15:
            raise ValueError(f"{self.name}: inertia tensor not positive semidefinite")
        a, b, c = ev
        if a + b < c * (1 - 1e-9) - 1e-15:
            # the default link table has one such entry; keep it, but say so
            warnings.warn(f"{self.name}: principal moments violate the triangle inequality",
                          InertiaWarning, stacklevel=3)


def diag(*v):
    return np.diag(np.asarray(v, dtype=float))


# Table of masses and inertias; link bodies sit at their frame origins.
UAV_MASS = 2.711
UAV_INERTIA = diag(1.1e-1, 1.1e-1, 2.2e-1)
BASE_MASS_WITH_ACTUATORS = 1.899

QDD_NE30_36 = (0.25, diag(1.7e-4, 1.7e-4, 1.2e-4))
XM430_W350 = (0.08, diag(2.2e-5, 1.3e-5, 1.9e-5))

LINK_TABLE = (
    ("joint1", 2.35e-2, diag(2.2e-5, 2.4e-5, 1.5e-6)),
    ("joint2", 5.36e-1, diag(6.2e-3, 6.4e-3, 5.1e-4)),
    ("joint3", 1.11e-3, diag(1.7e-9, 1.7e-9, 2.9e-9)),
    ("joint4", 2.4e-2, diag(1.7e-5, 1.7e-5, 4.3e-6)),
    ("joint5", 1.11e-3, diag(1.7e-9, 1.7e-9, 2.9e-9)),
    ("joint6", 6.26e-2, diag(6.7e-5, 6.7e-5, 1.0e-4)),
    ("joint7", 1.70e-1, diag(3.0e-4, 6.3e-4, 5.8e-4)),
)
BASE_INERTIA = diag(1.1e-2, 1.6e-2, 8.5e-3)

# actuator order: elbow, wrist pitch, wrist yaw, roll
ACTUATORS = (
    ("elbow_qdd", *QDD_NE30_36),
    ("pitch_qdd", *QDD_NE30_36),
    ("yaw_qdd", *QDD_NE30_36),
    ("roll_xm430", *XM430_W350),
)

# Placement = one chain-frame index per actuator; 0 means base-mounted.
ATDM_PLACEMENT = (0, 0, 0, 0)
# each actuator sits on the link preceding the first row its angle drives
SERIAL_PLACEMENT = (0, 2, 3, 6)


def default_bodies():
    actuator_mass = sum(m for _, m, _ in ACTUATORS)
    base = BodySpec("base", BASE_MASS_WITH_ACTUATORS - actuator_mass, BASE_INERTIA, 0)
    links = [BodySpec(name, m, inertia, i + 1) for i, (name, m, inertia) in enumerate(LINK_TABLE)]
    return (base, *links)


def default_actuators():
    return tuple(BodySpec(name, m, inertia, 0) for name, m, inertia in ACTUATORS)


@dataclass(frozen=True)
class AmsModel:
    chain: ArmChain = field(default_factory=ArmChain)
    uav_mass: float = UAV_MASS
    uav_inertia: np.ndarray = field(default_factory=lambda: UAV_INERTIA.copy())
    bodies: tuple = field(default_factory=default_bodies)
    actuators: tuple = field(default_factory=default_actuators)
    placement: tuple = ATDM_PLACEMENT

    def __post_init__(self):
        if len(self.placement) != len(self.actuators):
            raise ValueError("placement must assign every actuator exactly once")
        n = len(self.chain.rows)
        for k in self.placement:
            if not 0 <= k <= n:
                raise ValueError(f"actuator placement {k} outside chain frames 0..{n}")

    @property
    def man_mass(self):
        return sum(b.mass for b in self.bodies) + sum(a.mass for a in self.actuators)

    @property
    def total_mass(self):
        return self.uav_mass + self.man_mass

    def with_placement(self, placement):
        return replace(self, placement=tuple(placement))

    def elements(self):
        """Flattened mass elements: ``(masses, links, coms, inertias)``.

        An actuator placed on frame ``k`` takes the COM of the first body on
        that frame (the base for ``k == 0``).
        """
        masses, links, coms, inertias = [], [], [], []
        for b in self.bodies:
            masses.append(b.mass)
            links.append(b.link)
            coms.append(b.com)
            inertias.append(b.inertia)
        for act, k in zip(self.actuators, self.placement):
            host = next((b for b in self.bodies if b.link == k), None)
            masses.append(act.mass)
            links.append(k)
            coms.append(host.com if host is not None else (0.0, 0.0, 0.0))
            inertias.append(act.inertia)
        return (np.array(masses), np.array(links, dtype=int),
                np.array(coms, dtype=float), np.array(inertias))


def element_poses(model, q):
    """Rotation ``(..., n, 3, 3)`` and COM position ``(..., n, 3)`` of each element in the body frame.

    Joint ranges are not checked here; scenarios validate their trajectories.
    """
    _, links, coms, _ = model.elements()
    frames = link_frames(model.chain, q, check=False)
    sel = frames[..., links, :, :]
    rot = sel[..., :3, :3]
    pos = sel[..., :3, 3] / 1000.0 + np.einsum("...ij,...j->...i", rot, coms)
    return rot, pos


def system_com(model, q):
    """System COM ``^B r_oc`` (UAV COM at the origin contributes zero)."""
    masses = model.elements()[0]
    total = model.total_mass
    if total <= 0:
        raise ValueError("total mass must be positive")
    _, pos = element_poses(model, q)
    return np.einsum("i,...ij->...j", masses, pos) / total


def manipulator_inertia(model, q):
    """Arm inertia about the UAV COM in the body frame, ``^B I_MAN``."""
    masses, _, _, inertias = model.elements()
    rot, pos = element_poses(model, q)
    rotated = np.einsum("...nij,njk,...nlk->...il", rot, inertias, rot)
    sq = np.einsum("...ni,...ni->...n", pos, pos)
    pp = np.einsum("n,...ni,...nj->...ij", masses, pos, pos)
    return rotated + np.einsum("n,...n->...", masses, sq)[..., None, None] * np.eye(3) - pp


@dataclass(frozen=True)
class ComDerivatives:
    r: np.ndarray
    r_dot: np.ndarray
    r_ddot: np.ndarray
    inertia: np.ndarray
    inertia_dot: np.ndarray
    # sum_i m_i p_i x p_ddot_i, the point-mass moment of the arm's accelerations
    accel_moment: np.ndarray = None


def com_derivatives(model, trajectory, t, h=1e-4):
    """COM and arm inertia with their time derivatives along ``q = trajectory(t)``.

    Central differences with step ``h``; ``t`` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=float)
    stencil = t[..., None] + np.array([-h, 0.0, h])
    q = trajectory(stencil)
    r = system_com(model, q)
    inertia = manipulator_inertia(model, q)
    masses = model.elements()[0]
    _, pos = element_poses(model, q)
    acc = (pos[..., 2, :, :] - 2 * pos[..., 1, :, :] + pos[..., 0, :, :]) / h**2
    return ComDerivatives(
        accel_moment=np.einsum("n,...ni->...i", masses, np.cross(pos[..., 1, :, :], acc)),
        r=r[..., 1, :],
        r_dot=(r[..., 2, :] - r[..., 0, :]) / (2 * h),
        r_ddot=(r[..., 2, :] - 2 * r[..., 1, :] + r[..., 0, :]) / h**2,
        inertia=inertia[..., 1, :, :],
        inertia_dot=(inertia[..., 2, :, :] - inertia[..., 0, :, :]) / (2 * h),
    )


@dataclass(frozen=True)
class AmsState:
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass(frozen=True)
class DisturbanceWrench:
    force: np.ndarray  # inertial frame, N
    torque: np.ndarray  # body frame, N m

    def as_array(self):
        return np.concatenate([self.force, self.torque])


def coupling_disturbance(model, state, com, v_dot=np.zeros(3), omega_dot=np.zeros(3),
                         extended=True, g=GRAVITY):
    """Coupling force (inertial) and torque (body) exerted by the moving arm on the UAV.

    The literal force carries only terms in the body rate, so it vanishes
    for a non-rotating UAV.  ``extended=True`` adds the reaction of the
    accelerating COM, ``-M R r_ddot``, and replaces the relative-motion
    torque ``(M^2/m_man) r x r_ddot`` with ``sum m_i p_i x p_ddot_i``
    (``com.accel_moment``); the two agree only for a single moving mass.
    """
    m_tot = model.total_mass
    m_man = model.man_mass
    R, w = state.R, state.omega
    r, rd, rdd = com.r, com.r_dot, com.r_ddot
    i_man, i_dot = com.inertia, com.inertia_dot

    inner = cross(w, cross(w, r)) + cross(omega_dot, r) + 2 * cross(w, rd)
    if extended:
        inner = inner + rdd
    force = -m_tot * R @ inner

    # R @ p_dot kept in this form; body and inertial frames coincide near hover
    rp = R @ state.v
    if extended:
        relative = com.accel_moment
    else:
        relative = m_tot**2 / m_man * cross(r, rdd)
    torque = (m_tot * (cross(r, R.T @ (g * E3 - v_dot)) + cross(rdd, rp))
              - model.uav_inertia @ omega_dot
              - cross(w, i_man @ w)
              - i_dot @ w
              - relative
              - m_tot**2 / m_man * (cross(w, cross(r, rd))
                                    + cross(rp, rd) + cross(rp, cross(w, rd))))
    return DisturbanceWrench(force, torque)


def disturbance_oracle(model, trajectory, t, R=np.eye(3), h=1e-4, g=GRAVITY):
    """Reaction wrench of the arm on a UAV held still at attitude ``R``.

    Independent of the COM model: each element's linear and angular momentum
    about the body origin is differentiated numerically from forward
    kinematics, ``F = -d/dt sum(m v)`` and
    ``tau = sum(p x m g) - d/dt sum(p x m v + I_B omega)``.
    """
    masses, _, _, inertias = model.elements()
    t = np.asarray(t, dtype=float)
    stencil = t[..., None] + h * np.arange(-2, 3)
    rot, pos = element_poses(model, trajectory(stencil))  # (..., 5, n, ...)

    vel = (pos[..., 2:, :, :] - pos[..., :-2, :, :]) / (2 * h)  # at t-h, t, t+h
    rdot = (rot[..., 2:, :, :, :] - rot[..., :-2, :, :, :]) / (2 * h)
    mid = rot[..., 1:-1, :, :, :]
    w_hat = rdot @ np.swapaxes(mid, -1, -2)
    omega = 0.5 * np.stack([w_hat[..., 2, 1] - w_hat[..., 1, 2],
                            w_hat[..., 0, 2] - w_hat[..., 2, 0],
                            w_hat[..., 1, 0] - w_hat[..., 0, 1]], axis=-1)
    inertia_b = np.einsum("...nij,njk,...nlk->...nil", mid, inertias, mid)
    p_mid = pos[..., 1:-1, :, :]

    lin = np.einsum("n,...ni->...i", masses, vel)
    ang = (np.einsum("n,...ni->...i", masses, np.cross(p_mid, vel))
           + np.einsum("...nij,...nj->...i", inertia_b, omega))
    lin_dot = (lin[..., 2, :] - lin[..., 0, :]) / (2 * h)
    ang_dot = (ang[..., 2, :] - ang[..., 0, :]) / (2 * h)

    g_b = R.T @ (g * E3)
    moment_sum = np.einsum("n,...ni->...i", masses, pos[..., 2, :, :])
    force = -lin_dot @ R.T
    torque = np.cross(moment_sum, g_b) - ang_dot
    return DisturbanceWrench(force, torque)


class DivergenceError(RuntimeError):
    def __init__(self, message, last_time=None):
        super().__init__(message)
        self.last_time = last_time


def _derivs(model, inertia, thrust, torque, wrench, p, v, R, w, g):
    m = model.total_mass
    v_dot = g * E3 - (R @ np.array([0.0, 0.0, thrust]) - wrench.force) / m
    w_dot = np.linalg.solve(inertia, torque - cross(w, inertia @ w) + wrench.torque)
    return v, v_dot, w_dot


def _dexpinv(u, w):
    """Right-trivialised inverse dexp on so(3), truncated at second order."""
    c = cross(u, w)
    return w + 0.5 * c + cross(u, c) / 12.0


def step_dynamics(model, state, thrust, torque, wrench, dt, i_man=None, g=GRAVITY):
    """Advance the UAV state by one RK4 step (Munthe-Kaas form for the attitude).

    ``i_man`` is the arm inertia about the UAV COM (defaults to zero); the
    wrench is held constant across the step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    inertia = model.uav_inertia + (np.zeros((3, 3)) if i_man is None else i_man)
    torque = np.asarray(torque, dtype=float)
    p0, v0, R0, w0 = state.p, state.v, state.R, state.omega

    def f(p, v, R, w):
        return _derivs(model, inertia, thrust, torque, wrench, p, v, R, w, g)

    k1p, k1v, k1w = f(p0, v0, R0, w0)
    u1 = dt * w0

    u = 0.5 * u1
    p2, v2, w2 = p0 + 0.5 * dt * k1p, v0 + 0.5 * dt * k1v, w0 + 0.5 * dt * k1w
    R2 = R0 @ spatial.exp_so3(u)
    k2p, k2v, k2w = f(p2, v2, R2, w2)
    u2 = dt * _dexpinv(u, w2)

    u = 0.5 * u2
    p3, v3, w3 = p0 + 0.5 * dt * k2p, v0 + 0.5 * dt * k2v, w0 + 0.5 * dt * k2w
    R3 = R0 @ spatial.exp_so3(u)
    k3p, k3v, k3w = f(p3, v3, R3, w3)
    u3 = dt * _dexpinv(u, w3)

    u = u3
    p4, v4, w4 = p0 + dt * k3p, v0 + dt * k3v, w0 + dt * k3w
    R4 = R0 @ spatial.exp_so3(u)
    k4p, k4v, k4w = f(p4, v4, R4, w4)
    u4 = dt * _dexpinv(u, w4)

    p = p0 + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
    v = v0 + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    w = w0 + dt / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
    u = (u1 + 2 * u2 + 2 * u3 + u4) / 6

    if not all(np.all(np.isfinite(x)) for x in (p, v, w, u)):
        raise DivergenceError("non-finite state after integration step")
    return AmsState(p, v, spatial.project_to_so3(R0 @ spatial.exp_so3(u)), w)
