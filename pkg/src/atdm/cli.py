"""``atdm`` command-line tool: analyses and scenario runs that write plot-ready CSV/JSON.

Exit status: 0 on success, 1 on a numerical failure, 2 on a bad
configuration or argument (in which case nothing is written).
"""

import argparse
import csv
import json
import os
import sys
import warnings

import numpy as np

from . import arm, dynamics, joints, linkage, sim
from .config import ConfigError, RunManifest, load

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

NUMERIC_ERRORS = (dynamics.DivergenceError, linkage.FitError, linkage.DegeneratePoseError,
                  linkage.PolarDomainError, joints.GeometryError, np.linalg.LinAlgError,
                  FloatingPointError)


class _Outputs:
    """Collects the files one command writes and records them in its manifest."""

    def __init__(self, out_dir, command, cfg):
        self.dir = out_dir
        self.manifest = RunManifest(command, cfg.digest)

    def path(self, name):
        self.manifest.outputs.append(name)
        return os.path.join(self.dir, name)

    def write_csv(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(x)) for x in row])

    def write_json(self, name, data):
        with open(self.path(name), "w", newline="\n") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self):
        name = f"{self.manifest.command}_manifest.json"
        self.manifest.write(os.path.join(self.dir, name))


# --- commands ------------------------------------------------------------------

def _parse_sweep(text):
    key, _, value = text.partition("=")
    if key != "joint" or value not in ("1", "2", "3", "4"):
        raise ConfigError(f"--sweep expects joint=1..4, got {text!r}")
    return int(value) - 1


def cmd_fk(cfg, args, out):
    q = np.asarray(args.q, dtype=float)
    try:
        t = arm.forward_kinematics(cfg.chain, q)
    except arm.JointRangeError as exc:
        raise ConfigError(str(exc)) from None
    with np.printoptions(precision=6, suppress=True):
        print("end-effector pose in the body frame (mm):")
        print(t)
    if args.sweep is None:
        return
    idx = _parse_sweep(args.sweep)
    lo, hi = cfg.chain.limits[idx]
    qs = np.repeat(q[None, :], args.resolution + 1, axis=0)
    qs[:, idx] = np.linspace(lo, hi, args.resolution + 1)
    poses = arm.forward_kinematics(cfg.chain, qs)
    header = ["q1", "q2", "q3", "q4", "x", "y", "z"] + [f"r{i}{j}" for i in (1, 2, 3)
                                                        for j in (1, 2, 3)]
    rows = np.hstack([qs, poses[:, :3, 3], poses[:, :3, :3].reshape(-1, 9)])
    out.write_csv(f"fk_sweep_joint{idx + 1}.csv", header, rows)


def cmd_workspace(cfg, args, out):
    ws = cfg.document["arm"]["workspace"]
    mode = arm.WorkspaceMode(args.mode)
    pts = arm.workspace_sample(cfg.chain, mode, ws["resolution"], ws["yaw_samples"],
                               ws["vertical_samples"], ws["vertical_range"])
    out.write_csv(f"workspace_{mode.value}.csv", ["x", "y", "z"], pts)
    print(f"{len(pts)} points, mode {mode.value}")


def cmd_joint_analysis(cfg, args, out):
    j = cfg.document["joints"]
    tau, n = j["motor_torque"], j["samples"]
    elbow, wrist = cfg.elbow, cfg.wrist

    theta = np.linspace(*joints.ELBOW_RANGE, n)
    d_ago, d_ant = joints.elbow_tendon_deltas(theta, elbow)
    out.write_csv("elbow.csv", ["theta", "torque_Nmm", "stiffness_Nmm_per_rad",
                                "dL_agonist", "dL_antagonist"],
                  np.column_stack([theta, joints.elbow_torque(theta, tau, elbow),
                                   joints.elbow_stiffness(theta, elbow), d_ago, d_ant]))

    theta = np.linspace(*joints.WRIST_BEND_RANGE, n)
    cols = [theta]
    header = ["theta"]
    for deg in (0, 15, 30, 45):
        phi = np.radians(deg)
        cols.append(joints.wrist2dof_torque(phi, theta, (tau, tau), wrist))
        header.append(f"torque_phi{deg}_Nmm")
    cols.append(joints.wrist2dof_stiffness(theta, wrist))
    header.append("stiffness_Nmm_per_rad")
    out.write_csv("wrist2dof.csv", header, np.column_stack(cols))

    motor = np.linspace(0.0, tau, n)
    torque, stiff = joints.wrist_roll_torque_stiffness(motor, wrist)
    out.write_csv("roll.csv", ["motor_torque_Nmm", "torque_Nmm", "stiffness_Nmm_per_rad"],
                  np.column_stack([motor, torque, np.broadcast_to(stiff, motor.shape)]))
    print("wrote elbow.csv, wrist2dof.csv, roll.csv")


def cmd_simulate(cfg, args, out):
    try:
        scenario = cfg.scenario(args.condition, args.allow_overrange or None,
                                False if args.literal_disturbance else None)
    except (ValueError, arm.JointRangeError) as exc:
        raise ConfigError(str(exc)) from None
    atdm_res, serial_res = sim.run_scenario(scenario)
    c = int(scenario.condition)
    atdm_res.to_csv(out.path(f"sim_c{c}_atdm.csv"))
    serial_res.to_csv(out.path(f"sim_c{c}_serial.csv"))
    ratios = sim.ratio_table(atdm_res, serial_res, c)
    out.write_json(f"ratios_c{c}.json", {
        "condition": c,
        "extended_disturbance": scenario.extended,
        "amplitudes": [float(a) for a in scenario.trajectory.amplitudes],
        "saturated_steps": {"atdm": atdm_res.saturated_steps,
                            "serial": serial_res.saturated_steps},
        "ratios": ratios,
    })
    for name, row in ratios.items():
        print(f"{name:9s} MAV {row['MAV']}  RMSV {row['RMSV']}")


def cmd_antipar_fit(cfg, args, out):
    f = cfg.document["fit"]
    try:
        res = linkage.fit_circle_approx(f["r_c"], f["w"], f["grid"], tuple(f["h_range"]),
                                        f["l_halfwidth"])
    except ValueError as exc:
        if isinstance(exc, NUMERIC_ERRORS):
            raise
        raise ConfigError(str(exc)) from None
    out.write_json("antipar_fit.json", {"r_c": f["r_c"], "w": f["w"], "h": res.h, "l": res.l,
                                        "max_radial_error": res.max_radial_error,
                                        "objective": res.objective})
    theta, err = linkage.radial_error_curve(res.h, res.l, f["r_c"], f["w"])
    out.write_csv("antipar_error_curve.csv", ["theta", "radial_error_mm"],
                  np.column_stack([theta, err]))
    print(f"h = {res.h:.5f} mm, l = {res.l:.5f} mm, max |r_e - r_c| = "
          f"{res.max_radial_error:.5f} mm")


COMMANDS = {
    "fk": cmd_fk,
    "workspace": cmd_workspace,
    "joint-analysis": cmd_joint_analysis,
    "simulate": cmd_simulate,
    "antipar-fit": cmd_antipar_fit,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config document (defaults when omitted)")
    common.add_argument("--out", default=".", help="output directory")

    p = argparse.ArgumentParser(prog="atdm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    fk = sub.add_parser("fk", parents=[common], help="forward kinematics")
    fk.add_argument("--q", nargs=4, type=float, default=[0.0] * 4,
                    metavar=("Q1", "Q2", "Q3", "Q4"), help="joint angles, rad")
    fk.add_argument("--sweep", metavar="joint=I", help="sweep joint I over its range to CSV")
    fk.add_argument("--resolution", type=int, default=100, help="sweep intervals")

    ws = sub.add_parser("workspace", parents=[common], help="end-effector point cloud")
    ws.add_argument("--mode", choices=[m.value for m in arm.WorkspaceMode], default="hover")

    sub.add_parser("joint-analysis", parents=[common], help="torque and stiffness curves")

    sm = sub.add_parser("simulate", parents=[common], help="ATDM vs serial scenario")
    sm.add_argument("--condition", type=int, choices=(1, 2, 3))
    sm.add_argument("--allow-overrange", action="store_true",
                    help="keep the pi/2 amplitudes even where they exceed the joint range")
    sm.add_argument("--literal-disturbance", action="store_true",
                    help="use the disturbance model without the COM-acceleration terms")

    sub.add_parser("antipar-fit", parents=[common], help="antiparallelogram circle fit")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    if args.command == "fk" and args.resolution < 1:
        print("error: --resolution must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", dynamics.InertiaWarning)
            cfg = load(args.config)
        for msg in dict.fromkeys(str(w.message) for w in caught):
            print(f"warning: {msg}", file=sys.stderr)
        if args.command == "fk" and args.sweep is not None:
            _parse_sweep(args.sweep)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    out = _Outputs(args.out, args.command, cfg)
    try:
        COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        _discard(out)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        _discard(out)
        where = getattr(exc, "last_time", None)
        suffix = f" (last valid time {where:.3f} s)" if where is not None else ""
        print(f"numerical failure: {exc}{suffix}", file=sys.stderr)
        return EXIT_NUMERIC
    out.finish()
    return EXIT_OK


def _discard(out):
    for name in out.manifest.outputs:
        try:
            os.remove(os.path.join(out.dir, name))
        except FileNotFoundError:
            pass


if __name__ == "__main__":
    sys.exit(main())
