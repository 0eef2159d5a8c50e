"""Scenario harness: arm trajectories, a hover controller, and ATDM-vs-serial metrics.

Three working conditions are provided:

1. the UAV is held still and the coupling wrench is logged while the elbow
   and wrist oscillate;
2. the UAV hovers under closed-loop control while only the wrist moves;
3. as 2, with the elbow and wrist moving as in condition 1.

Both actuator placements run on identical trajectories, so every metric
can be reported as an ATDM/serial ratio.
"""

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from . import dynamics, spatial
from .arm import JOINT_LIMITS, JointRangeError

NOMINAL_AMPLITUDE = np.pi / 2


class Condition(IntEnum):
    FIXED_BASE_DISTURBANCE = 1
    HOVER_WRIST_MOTION = 2
    HOVER_WIDE_RAPID = 3


@dataclass(frozen=True)
class TrajectorySpec:
    """Per-joint sinusoids ``q_i(t) = A_i sin(2 pi t / T_i + phase_i)``."""
    amplitudes: tuple = (0.0, 0.0, 0.0, 0.0)
    periods: tuple = (5.0, 10.0, 10.0, 10.0)
    phases: tuple = (0.0, 0.0, 0.0, 0.0)
    duration: float = 20.0
    dt: float = 0.01

    def __post_init__(self):
        if any(p <= 0 for p in self.periods):
            raise ValueError("periods must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        steps = self.duration / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError("duration must be a multiple of dt")

    @property
    def times(self):
        return np.arange(int(round(self.duration / self.dt)) + 1) * self.dt

    def check_range(self, limits=JOINT_LIMITS):
        """Raise when an oscillation would leave the joint range."""
        for i, a in enumerate(self.amplitudes):
            lo, hi = limits[i]
            if abs(a) > min(-lo, hi) + 1e-12:
                raise JointRangeError(
                    f"joint {i + 1} amplitude {a:.6g} rad exceeds range [{lo:.6g}, {hi:.6g}];"
                    " use allow_overrange to run it anyway")

    def __call__(self, t):
        """Joint angles at time(s) ``t``; output shape ``t.shape + (4,)``."""
        w = 2 * np.pi / np.asarray(self.periods, dtype=float)
        t = np.asarray(t, dtype=float)[..., None]
        return np.asarray(self.amplitudes) * np.sin(w * t + np.asarray(self.phases))


def sinusoid_trajectory(spec, t):
    """Joint angles, rates and accelerations of ``spec`` at time(s) ``t``."""
    a = np.asarray(spec.amplitudes, dtype=float)
    w = 2 * np.pi / np.asarray(spec.periods, dtype=float)
    arg = w * np.asarray(t, dtype=float)[..., None] + np.asarray(spec.phases)
    q = a * np.sin(arg)
    return q, a * w * np.cos(arg), -(w**2) * q


def condition_trajectory(condition, allow_overrange=False, duration=20.0, dt=0.01):
    """Sinusoids of the three working conditions.

    Elbow period 5 s, wrist periods 10 s, amplitude pi/2.  Without
    ``allow_overrange`` each amplitude is capped to its joint range, which
    for the coupled joints is the full travel (chain angle pi/4 is half the
    physical rolling angle pi/2).
    """
    condition = Condition(condition)
    amps = np.full(4, NOMINAL_AMPLITUDE)
    if condition is Condition.HOVER_WRIST_MOTION:
        amps[0] = 0.0
    if not allow_overrange:
        amps = np.minimum(amps, np.min(np.abs(JOINT_LIMITS), axis=1))
    return TrajectorySpec(tuple(amps), (5.0, 10.0, 10.0, 10.0), (0.0,) * 4, duration, dt)


# --- control -----------------------------------------------------------------

@dataclass(frozen=True)
class ControllerGains:
    """Cascaded PD gains.

    Position gains are accelerations per metre (per m/s); attitude gains
    are angular accelerations per radian (per rad/s) and get multiplied by
    the nominal inertia.
    """
    kp_pos: float = 4.0
    kd_pos: float = 4.0
    kp_att: float = 144.0
    kd_att: float = 24.0
    max_thrust: float = 120.0
    max_torque: float = 10.0


def hover_controller(state, target, gains, mass, inertia, target_yaw=0.0, g=dynamics.GRAVITY):
    """Thrust (N) and body torque (N m) holding ``target`` position.

    Returns ``(thrust, torque, saturated)``; saturation clamps and is only reported.
    """
    e_p = state.p - np.asarray(target, dtype=float)
    a_des = -gains.kp_pos * e_p - gains.kd_pos * state.v
    f_des = mass * (g * dynamics.E3 - a_des)  # NED: thrust pushes along -body z
    b3 = f_des / np.linalg.norm(f_des)
    b1c = np.array([np.cos(target_yaw), np.sin(target_yaw), 0.0])
    b2 = spatial.cross(b3, b1c)
    b2 /= np.linalg.norm(b2)
    r_des = np.column_stack([spatial.cross(b2, b3), b2, b3])

    R, w = state.R, state.omega
    thrust = float(f_des @ R[:, 2])
    e_r = spatial.vee(r_des.T @ R - R.T @ r_des)
    torque = inertia @ (-gains.kp_att * e_r - gains.kd_att * w) + spatial.cross(w, inertia @ w)

    saturated = False
    if not 0.0 <= thrust <= gains.max_thrust:
        thrust = min(max(thrust, 0.0), gains.max_thrust)
        saturated = True
    if np.any(np.abs(torque) > gains.max_torque):
        torque = np.clip(torque, -gains.max_torque, gains.max_torque)
        saturated = True
    return thrust, torque, saturated


# --- results -----------------------------------------------------------------

CSV_COLUMNS = ("t", "q1", "q2", "q3", "q4", "Fx", "Fy", "Fz", "Tx", "Ty", "Tz",
               "px", "py", "pz", "roll", "pitch", "yaw")


@dataclass
class SimResult:
    t: np.ndarray
    q: np.ndarray
    force: np.ndarray
    torque: np.ndarray
    position: np.ndarray
    attitude: np.ndarray
    saturated_steps: int = 0

    def table(self):
        return np.column_stack([self.t, self.q, self.force, self.torque,
                                self.position, self.attitude])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in self.table():
                writer.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1:5], data[:, 5:8], data[:, 8:11],
                   data[:, 11:14], data[:, 14:17])


def mav(series):
    """Mean absolute value; vector series use the per-sample Euclidean norm."""
    y = _norms(series)
    return float(np.mean(np.abs(y)))


def rmsv(series):
    """Root mean square value; vector series use the per-sample Euclidean norm."""
    y = _norms(series)
    return float(np.sqrt(np.mean(y**2)))


def _norms(series):
    y = np.asarray(series, dtype=float)
    if y.size == 0:
        raise ValueError("empty series")
    return np.linalg.norm(y, axis=1) if y.ndim == 2 else y


def _ratio(a, b):
    return a / b if b != 0 else None


def ratio_table(atdm, serial, condition):
    """MAV and RMSV ratios ATDM/serial; an undefined ratio (serial metric 0) is ``None``."""
    if Condition(condition) is Condition.FIXED_BASE_DISTURBANCE:
        rows = {"F_dis": "force", "tau_dis": "torque"}
    else:
        rows = {"Position": "position", "Attitude": "attitude"}
    return {
        name: {
            "MAV": _ratio(mav(getattr(atdm, attr)), mav(getattr(serial, attr))),
            "RMSV": _ratio(rmsv(getattr(atdm, attr)), rmsv(getattr(serial, attr))),
        }
        for name, attr in rows.items()
    }


# --- scenarios ---------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    condition: Condition = Condition.FIXED_BASE_DISTURBANCE
    trajectory: TrajectorySpec = None
    gains: ControllerGains = field(default_factory=ControllerGains)
    model: dynamics.AmsModel = field(default_factory=dynamics.AmsModel)
    placements: tuple = (dynamics.ATDM_PLACEMENT, dynamics.SERIAL_PLACEMENT)
    extended: bool = True
    allow_overrange: bool = False
    sim_dt: float = 1e-3
    target: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "condition", Condition(self.condition))
        if self.trajectory is None:
            object.__setattr__(self, "trajectory",
                               condition_trajectory(self.condition, self.allow_overrange))
        if not self.allow_overrange:
            self.trajectory.check_range(self.model.chain.limits)
        ratio = self.trajectory.dt / self.sim_dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("logging dt must be a whole multiple of sim_dt")


def fixed_base_wrench(model, trajectory, t, extended=True):
    """Coupling wrench on a UAV held level at rest, evaluated at times ``t``."""
    com = dynamics.com_derivatives(model, trajectory, t)
    state = dynamics.AmsState()
    force = np.empty((len(t), 3))
    torque = np.empty((len(t), 3))
    for k in range(len(t)):
        w = dynamics.coupling_disturbance(model, state, _com_at(com, k), extended=extended)
        force[k] = w.force
        torque[k] = w.torque
    return force, torque


def _com_at(com, k):
    return dynamics.ComDerivatives(com.r[k], com.r_dot[k], com.r_ddot[k], com.inertia[k],
                                   com.inertia_dot[k], com.accel_moment[k])


def _run_fixed(cfg, model):
    traj = cfg.trajectory
    t = traj.times
    force, torque = fixed_base_wrench(model, traj, t, cfg.extended)
    zeros = np.zeros((len(t), 3))
    return SimResult(t, traj(t), force, torque, zeros, zeros.copy())


def _run_hover(cfg, model):
    traj = cfg.trajectory
    dt = cfg.sim_dt
    every = int(round(traj.dt / dt))
    n_steps = int(round(traj.duration / dt))
    t_sim = np.arange(n_steps + 1) * dt
    com = dynamics.com_derivatives(model, traj, t_sim)
    target = np.asarray(cfg.target, dtype=float)
    nominal_inertia = model.uav_inertia + com.inertia[0]
    mass = model.total_mass

    state = dynamics.AmsState(p=target.copy())
    v_dot = np.zeros(3)
    w_dot = np.zeros(3)
    n_log = n_steps // every + 1
    force = np.empty((n_log, 3))
    torque = np.empty((n_log, 3))
    position = np.empty((n_log, 3))
    attitude = np.empty((n_log, 3))
    saturated = 0
    for k in range(n_steps + 1):
        c = _com_at(com, k)
        # acceleration terms lag one step (explicit coupling of the algebraic loop)
        wrench = dynamics.coupling_disturbance(model, state, c, v_dot, w_dot, cfg.extended)
        if k % every == 0:
            j = k // every
            force[j] = wrench.force
            torque[j] = wrench.torque
            position[j] = state.p - target
            attitude[j] = spatial.rot_to_rpy(state.R)
        if k == n_steps:
            break
        thrust, tau, sat = hover_controller(state, target, cfg.gains, mass, nominal_inertia)
        saturated += sat
        try:
            new = dynamics.step_dynamics(model, state, thrust, tau, wrench, dt, i_man=c.inertia)
        except dynamics.DivergenceError as exc:
            raise dynamics.DivergenceError(str(exc), last_time=k * dt) from exc
        v_dot = (new.v - state.v) / dt
        w_dot = (new.omega - state.omega) / dt
        state = new
    t_log = np.arange(n_log) * traj.dt
    return SimResult(t_log, traj(t_log), force, torque, position, attitude, saturated)


def run_placement(cfg, placement):
    model = cfg.model.with_placement(placement)
    if cfg.condition is Condition.FIXED_BASE_DISTURBANCE:
        return _run_fixed(cfg, model)
    return _run_hover(cfg, model)


def max_workers():
    try:
        return max(1, int(os.environ.get("ATDM_THREADS", "2")))
    except ValueError:
        return 2


def run_scenario(cfg):
    """Run both placements of ``cfg``; returns ``(atdm_result, serial_result)``."""
    with ThreadPoolExecutor(max_workers=min(2, max_workers())) as pool:
        futures = [pool.submit(run_placement, cfg, p) for p in cfg.placements]
        return tuple(f.result() for f in futures)

