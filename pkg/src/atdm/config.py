"""JSON configuration documents and run manifests for the command-line tool.

A document may give any subset of the sections below; missing keys take
the built-in defaults, unknown keys are rejected.  Lengths in ``arm`` and
``joints`` are millimetres, everything in ``bodies`` is SI.
"""

import copy
import datetime
import hashlib
import json
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import __version__, arm, dynamics, joints, sim


class ConfigError(ValueError):
    pass


def _row_dict(r):
    return {"theta_offset": r.theta_offset, "d": r.d, "a_prev": r.a_prev,
            "alpha_prev": r.alpha_prev, "driver": r.driver, "driver_sign": r.driver_sign}


def _body_dict(b):
    return {"name": b.name, "mass": b.mass, "inertia": np.diag(b.inertia).tolist(),
            "link": b.link, "com": list(b.com)}


def default_document():
    """The full default document: MD-H table, joint designs, mass table and scenario settings."""
    elbow, wrist, cable = joints.ElbowDesign(), joints.WristDesign(), joints.CableSpec()
    gains = sim.ControllerGains()
    return {
        "arm": {
            "rows": [_row_dict(r) for r in arm.MDH_ROWS],
            "base_offset": list(arm.DEFAULT_BASE_OFFSET),
            "limits": arm.JOINT_LIMITS.tolist(),
            "workspace": {"resolution": 17, "yaw_samples": 25, "vertical_samples": 11,
                          "vertical_range": 0.5},
        },
        "joints": {
            "elbow": {"R": elbow.R, "d_e": elbow.d_e, "N_e": elbow.N_e,
                      "R_capstan": elbow.R_capstan},
            "wrist": {"w": wrist.w, "h": wrist.h, "N_w": wrist.N_w, "N_r": wrist.N_r,
                      "R_capstan": wrist.R_capstan, "R_capstan_roll": wrist.R_capstan_roll},
            "cable": {"max_tension": cable.max_tension,
                      "axial_stiffness": cable.axial_stiffness},
            # saturates the cable on an 11 mm capstan
            "motor_torque": cable.max_tension * elbow.R_capstan,
            "samples": 91,
        },
        "bodies": {
            "uav_mass": dynamics.UAV_MASS,
            "uav_inertia": np.diag(dynamics.UAV_INERTIA).tolist(),
            "links": [_body_dict(b) for b in dynamics.default_bodies()],
            "actuators": [_body_dict(b) for b in dynamics.default_actuators()],
        },
        "placement": {"atdm": list(dynamics.ATDM_PLACEMENT),
                      "serial": list(dynamics.SERIAL_PLACEMENT)},
        "scenario": {
            "condition": 1,
            "duration": 20.0,
            "log_dt": 0.01,
            "sim_dt": 1e-3,
            "allow_overrange": False,
            "extended": True,
            "amplitudes": None,
            "periods": [5.0, 10.0, 10.0, 10.0],
            "phases": [0.0, 0.0, 0.0, 0.0],
            "target": [0.0, 0.0, 0.0],
        },
        "controller": {"kp_pos": gains.kp_pos, "kd_pos": gains.kd_pos,
                       "kp_att": gains.kp_att, "kd_att": gains.kd_att,
                       "max_thrust": gains.max_thrust, "max_torque": gains.max_torque},
        "fit": {"r_c": 40.0, "w": 12.0, "grid": 5, "h_range": [0.0, 10.0], "l_halfwidth": 10.0},
    }


def _obj(props, required=()):
    return {"type": "object", "properties": props, "additionalProperties": False,
            "required": list(required)}


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_VEC4 = {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}
_PLACEMENT = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}
_BODY = _obj({"name": {"type": "string"}, "mass": {"type": "number", "minimum": 0},
              "inertia": _VEC3, "link": {"type": "integer", "minimum": 0}, "com": _VEC3},
             required=("name", "mass", "inertia"))

SCHEMA = _obj({
    "arm": _obj({
        "rows": {"type": "array", "minItems": 1, "items": _obj(
            {"theta_offset": _NUM, "d": _NUM, "a_prev": _NUM, "alpha_prev": _NUM,
             "driver": {"type": "integer", "minimum": 1, "maximum": 4},
             "driver_sign": _NUM},
            required=("theta_offset", "d", "a_prev", "alpha_prev", "driver"))},
        "base_offset": _VEC3,
        "limits": {"type": "array", "items": {"type": "array", "items": _NUM,
                                              "minItems": 2, "maxItems": 2},
                   "minItems": 4, "maxItems": 4},
        "workspace": _obj({"resolution": {"type": "integer", "minimum": 2},
                           "yaw_samples": {"type": "integer", "minimum": 1},
                           "vertical_samples": {"type": "integer", "minimum": 1},
                           "vertical_range": _POS}),
    }),
    "joints": _obj({
        "elbow": _obj({"R": _POS, "d_e": _POS, "N_e": {"type": "integer", "minimum": 1},
                       "R_capstan": _POS}),
        "wrist": _obj({"w": _POS, "h": _POS, "N_w": {"type": "integer", "minimum": 1},
                       "N_r": {"type": "number", "minimum": 1}, "R_capstan": _POS,
                       "R_capstan_roll": _POS}),
        "cable": _obj({"max_tension": _POS, "axial_stiffness": _POS}),
        "motor_torque": {"type": "number", "minimum": 0},
        "samples": {"type": "integer", "minimum": 2},
    }),
    "bodies": _obj({"uav_mass": _POS, "uav_inertia": _VEC3,
                    "links": {"type": "array", "items": _BODY},
                    "actuators": {"type": "array", "items": _BODY}}),
    "placement": _obj({"atdm": _PLACEMENT, "serial": _PLACEMENT}),
    "scenario": _obj({
        "condition": {"type": "integer", "enum": [1, 2, 3]},
        "duration": _POS, "log_dt": _POS, "sim_dt": _POS,
        "allow_overrange": {"type": "boolean"}, "extended": {"type": "boolean"},
        "amplitudes": {"anyOf": [_VEC4, {"type": "null"}]},
        "periods": _VEC4, "phases": _VEC4, "target": _VEC3,
    }),
    "controller": _obj({k: _POS for k in ("kp_pos", "kd_pos", "kp_att", "kd_att",
                                          "max_thrust", "max_torque")}),
    "fit": _obj({"r_c": _POS, "w": {"type": "number", "minimum": 0},
                 "grid": {"type": "integer", "minimum": 1},
                 "h_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                 "l_halfwidth": _POS}),
})


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def canonical_json(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(doc):
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


@dataclass(frozen=True)
class Config:
    """A validated, fully populated document and the domain objects built from it."""
    document: dict
    chain: arm.ArmChain
    elbow: joints.ElbowDesign
    wrist: joints.WristDesign
    model: dynamics.AmsModel
    gains: sim.ControllerGains
    placements: tuple

    @property
    def digest(self):
        return config_hash(self.document)

    def scenario(self, condition=None, allow_overrange=None, extended=None):
        """ScenarioConfig with optional flag overrides (flags win over the document)."""
        s = self.document["scenario"]
        condition = sim.Condition(s["condition"] if condition is None else condition)
        overrange = s["allow_overrange"] if allow_overrange is None else allow_overrange
        extended = s["extended"] if extended is None else extended
        if s["amplitudes"] is None:
            base = sim.condition_trajectory(condition, overrange, s["duration"], s["log_dt"])
            amps = base.amplitudes
        else:
            amps = tuple(s["amplitudes"])
        traj = sim.TrajectorySpec(amps, tuple(s["periods"]), tuple(s["phases"]),
                                  s["duration"], s["log_dt"])
        return sim.ScenarioConfig(condition=condition, trajectory=traj, gains=self.gains,
                                  model=self.model, placements=self.placements,
                                  extended=extended, allow_overrange=overrange,
                                  sim_dt=s["sim_dt"], target=tuple(s["target"]))


def build(document):
    """Validate a (partial) document, fill defaults and construct the domain objects."""
    try:
        jsonschema.validate(document, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    doc = _merge(default_document(), document)
    try:
        a, j, b = doc["arm"], doc["joints"], doc["bodies"]
        rows = tuple(arm.MdhRow(**r) for r in a["rows"])
        chain = arm.ArmChain(rows, arm.spatial.transform(trans=a["base_offset"]),
                             np.asarray(a["limits"], dtype=float))
        cable = joints.CableSpec(**j["cable"])
        elbow = joints.ElbowDesign(**j["elbow"], cable=cable)
        wrist = joints.WristDesign(**j["wrist"], cable=cable)

        def body(d):
            return dynamics.BodySpec(d["name"], d["mass"], d["inertia"], d.get("link", 0),
                                     tuple(d.get("com", (0.0, 0.0, 0.0))))

        placements = (tuple(doc["placement"]["atdm"]), tuple(doc["placement"]["serial"]))
        model = dynamics.AmsModel(chain, b["uav_mass"], np.diag(b["uav_inertia"]),
                                  tuple(body(d) for d in b["links"]),
                                  tuple(body(d) for d in b["actuators"]), placements[0])
        model.with_placement(placements[1])  # validates the serial placement too
        gains = sim.ControllerGains(**doc["controller"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return Config(doc, chain, elbow, wrist, model, gains, placements)


def load(path=None):
    """Read and build a config file; ``None`` gives the defaults."""
    if path is None:
        return build({})
    try:
        with open(path) as fh:
            document = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigError("config document must be a JSON object")
    return build(document)


@dataclass
class RunManifest:
    command: str
    config_hash: str
    outputs: list = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.datetime.now(
        datetime.timezone.utc).isoformat(timespec="seconds"))

    def as_dict(self):
        return {"command": self.command, "config_hash": self.config_hash,
                "version": self.version, "timestamp": self.timestamp,
                "outputs": sorted(self.outputs)}

    def write(self, path):
        with open(path, "w", newline="\n") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
