"""Scenario configuration, runs, DMD/non-DMD comparison and file emitters.

Random streams: the master seed feeds ``numpy.random.SeedSequence(seed)``,
whose first four spawned children drive, in order, the leader's step noise,
the camera, the follower's motors and its encoders.  Both prediction modes use
the same children, so a DMD run and a non-DMD run with one seed see the same
noise sequences for as long as their draws line up.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .control import (DMD, NON_DMD, ControllerConfig, ControllerState, Plant, SensorSuite,
                      run_timestep)
from .formation import (FormationSpec, LeaderTrajectory, ReferenceTrajectory, build_leader,
                        build_reference, formation_error, orthogonal_unit)
from .geometry import GeodesicState, SurfaceSpec, metric_at, normalize, shoot_geodesic
from .sensors import CameraModel, EncoderModel, MotorModel

log = logging.getLogger(__name__)

STEPS_COLUMNS = ["step", "leader_q1", "leader_q2", "follower_q1", "follower_q2", "pred_v",
                 "pred_u", "corr_v", "corr_u", "corrdist_v", "corrdist_u", "zone", "lost",
                 "formation_error"]
REFERENCE_COLUMNS = ["step", "leader_q1", "leader_q2", "follower_index", "ref_q1", "ref_q2"]

TRACKS = {
    "one": {"leader_start": (76.3, 15.8), "leader_heading": (0.0, 1.0), "steps": 15},
    "two": {"leader_start": (141.2, 11.1),
            "leader_heading": (-1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)), "steps": 20},
}
MODES = {"dmd": DMD, "nondmd": NON_DMD, DMD.lower(): DMD, NON_DMD.lower(): NON_DMD}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ScenarioConfig:
    surface: SurfaceSpec = field(default_factory=SurfaceSpec)
    track: str = "one"
    leader_start: tuple = TRACKS["one"]["leader_start"]
    leader_heading: tuple = TRACKS["one"]["leader_heading"]
    steps: int = TRACKS["one"]["steps"]
    step_length: float = 5.0
    leader_sigma: float = 0.02
    formation: FormationSpec = field(default_factory=FormationSpec)
    mode: str = DMD
    seed: int = 1
    camera: CameraModel = field(default_factory=CameraModel)
    motor: MotorModel = field(default_factory=MotorModel)
    encoder: EncoderModel = field(default_factory=EncoderModel)
    control: ControllerConfig = field(default_factory=ControllerConfig)

    @classmethod
    def for_track(cls, track: str, **overrides) -> "ScenarioConfig":
        if track not in TRACKS:
            raise ConfigError("scenario.track", f"unknown track {track!r}")
        return cls(track=track, **{**TRACKS[track], **overrides})

    def with_track(self, track: str) -> "ScenarioConfig":
        if track not in TRACKS:
            raise ConfigError("scenario.track", f"unknown track {track!r}")
        return dataclasses.replace(self, track=track, **TRACKS[track])

    def with_mode(self, mode: str) -> "ScenarioConfig":
        return dataclasses.replace(self, mode=mode)

    def without_noise(self) -> "ScenarioConfig":
        """Every noise source, dropout and encoder quantisation switched off."""
        return dataclasses.replace(
            self,
            leader_sigma=0.0,
            camera=dataclasses.replace(self.camera, position_sigma=0.0, side_sigma=0.0,
                                       dropout_prob=0.0),
            motor=dataclasses.replace(self.motor, actuation_sigma=0.0, slip_gain=0.0,
                                      rotation_sigma=0.0),
            encoder=dataclasses.replace(self.encoder, noise_sigma=0.0, quantization=0.0),
        )


# ---------------------------------------------------------------- config file

_SECTIONS = {"surface": "surface", "formation": "formation", "camera": "camera",
             "motor": "motor", "encoder": "encoder", "control": "control"}
_SCENARIO_KEYS = {"track", "leader_start", "leader_heading", "steps", "step_length",
                  "leader_sigma", "mode", "seed"}


def _coerce(path: str, raw: str, default):
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw, 0)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            parts = tuple(float(x) for x in raw.split(","))
            if len(parts) != len(default):
                raise ValueError(f"expected {len(default)} comma-separated numbers")
            return parts
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(path, f"bad value {raw!r} ({exc})") from None


def parse_config_text(text: str) -> dict:
    """``key=value`` lines with dotted section prefixes; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def config_from_mapping(items: dict) -> ScenarioConfig:
    items = dict(items)
    if "noise.zero" in items:
        zero = _coerce("noise.zero", items.pop("noise.zero"), False)
    else:
        zero = False
    track = items.pop("scenario.track", "one")
    if track == "custom":
        cfg = ScenarioConfig(track="custom")
    else:
        try:
            cfg = ScenarioConfig.for_track(track)
        except ConfigError:
            raise ConfigError("scenario.track", f"unknown track {track!r}") from None
    if zero:
        cfg = cfg.without_noise()

    scenario = {}
    blocks = {name: {} for name in _SECTIONS}
    for key, raw in items.items():
        section, _, name = key.partition(".")
        if section == "scenario" and name in _SCENARIO_KEYS:
            if name == "mode":
                if raw.lower() not in MODES:
                    raise ConfigError(key, f"mode must be dmd or nondmd, got {raw!r}")
                scenario[name] = MODES[raw.lower()]
            else:
                scenario[name] = _coerce(key, raw, getattr(cfg, name))
        elif section in _SECTIONS:
            target = getattr(cfg, _SECTIONS[section])
            fields = {f.name for f in dataclasses.fields(target)} - {"field", "mode"}
            if name not in fields:
                raise ConfigError(key, "unknown key")
            blocks[section][name] = _coerce(key, raw, getattr(target, name))
        else:
            raise ConfigError(key, "unknown key")

    if blocks["surface"].get("kind", "paraboloid") != "paraboloid":
        raise ConfigError("surface.kind", "only paraboloid surfaces can be configured from text")
    try:
        replaced = {name: dataclasses.replace(getattr(cfg, name), **vals)
                    for name, vals in blocks.items() if vals}
        mode = scenario.get("mode", cfg.mode)
        replaced["control"] = dataclasses.replace(
            replaced.get("control", cfg.control), mode=mode,
            separation_d=replaced.get("formation", cfg.formation).separation_d)
        cfg = dataclasses.replace(cfg, **scenario, **replaced)
    except (TypeError, ValueError) as exc:
        raise ConfigError("config", str(exc)) from None
    if cfg.steps < 1:
        raise ConfigError("scenario.steps", "must be >= 1")
    if cfg.step_length <= 0:
        raise ConfigError("scenario.step_length", "must be positive")
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    return config_from_mapping(parse_config_text(text))


# ------------------------------------------------------------------- running

def rng_streams(seed: int) -> dict:
    children = np.random.SeedSequence(seed).spawn(4)
    names = ("leader", "camera", "motor", "encoder")
    return {n: np.random.Generator(np.random.PCG64(c)) for n, c in zip(names, children)}


def _place_follower(s: SurfaceSpec, leader: GeodesicState, spec: FormationSpec):
    """Follower start at the formation distance with heading transported from the leader."""
    p = leader.point
    v = orthogonal_unit(metric_at(s, p), leader.velocity, spec.side)
    end = shoot_geodesic(s, GeodesicState(p, v), spec.separation_d)
    other = "left" if spec.side == "right" else "right"
    heading = orthogonal_unit(metric_at(s, end.point), end.velocity, other)
    return end.point, heading


def setup_scenario(cfg: ScenarioConfig):
    """Initial ``(plant, sensors, controller_state, streams)`` for a config."""
    s = cfg.surface
    streams = rng_streams(cfg.seed)
    control = dataclasses.replace(cfg.control, mode=cfg.mode,
                                  separation_d=cfg.formation.separation_d)
    leader = GeodesicState(cfg.leader_start, normalize(s, cfg.leader_start, cfg.leader_heading))
    fq, fh = _place_follower(s, leader, cfg.formation)
    plant = Plant(s, leader, fq, fh, cfg.formation.side)
    sensors = SensorSuite(cfg.camera, cfg.motor, cfg.encoder, streams["camera"],
                          streams["motor"], streams["encoder"])
    return plant, sensors, ControllerState(control), streams


def advance_leader(cfg: ScenarioConfig, leader: GeodesicState, rng) -> GeodesicState:
    length = cfg.step_length
    if cfg.leader_sigma > 0:
        length *= 1.0 + rng.normal(0.0, cfg.leader_sigma)
    return shoot_geodesic(cfg.surface, leader, length)


def run_scenario(cfg: ScenarioConfig, observer=None):
    """Run one scenario; returns ``(step_logs, summary)``.

    ``observer`` replaces the camera model, for fault-injection tests.
    """
    plant, sensors, cs, streams = setup_scenario(cfg)
    sensors.observer = observer
    leader_states = [plant.leader]
    logs = []
    for k in range(1, cfg.steps + 1):
        plant.leader = advance_leader(cfg, plant.leader, streams["leader"])
        leader_states.append(plant.leader)
        cs, entry = run_timestep(cs, plant, sensors, k)
        logs.append(entry)

    ref = build_reference(cfg.surface, LeaderTrajectory(leader_states[1:], cfg.step_length),
                          cfg.formation)
    errors = formation_error([e.follower_q for e in logs], ref, 1) if logs else []
    for entry, err in zip(logs, errors):
        entry.formation_error = float(err)
    return logs, summarize(cfg, logs)


def summarize(cfg: ScenarioConfig, logs) -> dict:
    cv = sum(e.corrdist[0] for e in logs)
    cu = sum(e.corrdist[1] for e in logs)
    post = sum(e.corrdist[0] + e.corrdist[1] for e in logs[4:])
    errs = [e.formation_error for e in logs]
    return {
        "track": cfg.track,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "steps": cfg.steps,
        "completed_steps": len(logs),
        "total_correction_v": round(cv, 6),
        "total_correction_u": round(cu, 6),
        "total_correction": round(cv + cu, 6),
        "post_collection_correction": round(post, 6),
        "lost_count": sum(1 for e in logs if e.lost),
        "max_iter_count": sum(1 for e in logs if e.max_iter_exceeded),
        "mean_formation_error": round(float(np.mean(errs)), 6) if errs else None,
        "max_formation_error": round(float(np.max(errs)), 6) if errs else None,
    }


def compare_modes(cfg: ScenarioConfig, seeds=range(1, 11)) -> dict:
    """Total-correction ratio DMD / non-DMD per seed, paired by seed."""
    per_seed = []
    for seed in seeds:
        row = {"seed": seed}
        for mode in (DMD, NON_DMD):
            _, summ = run_scenario(dataclasses.replace(cfg, mode=mode, seed=seed))
            row[mode] = summ
        dmd_total = row[DMD]["total_correction"]
        non_total = row[NON_DMD]["total_correction"]
        row["ratio"] = _ratio(dmd_total, non_total)
        per_seed.append(row)
    ratios = [r["ratio"] for r in per_seed if r["ratio"] is not None]
    dmd_sum = sum(r[DMD]["total_correction"] for r in per_seed)
    non_sum = sum(r[NON_DMD]["total_correction"] for r in per_seed)
    return {
        "track": cfg.track,
        "seeds": list(seeds),
        "per_seed": [{"seed": r["seed"], "dmd_total": r[DMD]["total_correction"],
                      "nondmd_total": r[NON_DMD]["total_correction"], "ratio": r["ratio"],
                      "dmd_lost": r[DMD]["lost_count"], "nondmd_lost": r[NON_DMD]["lost_count"]}
                     for r in per_seed],
        "mean_ratio": float(np.mean(ratios)) if ratios else None,
        "pooled_ratio": _ratio(dmd_sum, non_sum),
    }


def _ratio(num: float, den: float):
    if den == 0:
        return 1.0 if num == 0 else None  # 0/0 reported as the 1.0 sentinel
    return num / den


# ------------------------------------------------------------------ emitters

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def emit_steps_csv(logs, path):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(STEPS_COLUMNS)
            for e in logs:
                w.writerow([e.step, *map(_fmt, e.leader_q), *map(_fmt, e.follower_q),
                            *map(_fmt, e.pred), *map(_fmt, e.corrected), *map(_fmt, e.corrdist),
                            e.zone, int(e.lost), _fmt(e.formation_error)])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def emit_metrics_json(summary: dict, path):
    path = Path(path)
    try:
        path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def reference_rows(cfg: ScenarioConfig):
    lt = build_leader(cfg.surface, cfg.leader_start, cfg.leader_heading, cfg.steps,
                      cfg.step_length)
    ref: ReferenceTrajectory = build_reference(cfg.surface, lt, cfg.formation)
    rows = []
    for k, st in enumerate(lt.states):
        for j in range(1, cfg.formation.follower_count + 1):
            p = ref.follower(j)[k]
            rows.append((k, st.point[0], st.point[1], j, p[0], p[1]))
    return rows


def generate_reference_csv(cfg: ScenarioConfig, path):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REFERENCE_COLUMNS)
            for k, l1, l2, j, r1, r2 in reference_rows(cfg):
                w.writerow([k, _fmt(l1), _fmt(l2), j, _fmt(r1), _fmt(r2)])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
