"""Follower loop: velocity prediction, movement, visual correction, DMD update.

Each timestep the follower executes its predicted velocity, then lets the
visual state machine issue micro-moves until the beacon sits at the set-point,
and finally feeds the encoder-measured displacement of the whole timestep
(the corrected velocity) back into the predictor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dmd as dmd_mod
from .formation import orthogonal_unit
from .geometry import (GeodesicState, SurfaceSpec, inner, metric_at, normalize,
                       potential_gradient, shoot_geodesic)
from .sensors import (FRONT, REAR, TARGET, CameraModel, EncoderModel, MotorModel, RelativePose,
                      actuate, encode, observe, zone_of)

DMD, NON_DMD = "DMD", "NonDMD"
COLLECTING, PREDICTING = "DataCollecting", "Predicting"
COLLECTION_SAMPLES = 4

ALONG_V, ALONG_U = "AlongV", "AlongU"
ROTATE_CW, ROTATE_CCW, STOP = "RotateCW", "RotateCCW", "Stop"
DONE, LOST_SIGNAL = "Done", "LostSignal"

PLANT_STEP = 0.05  # geodesic step for robot moves, cm


@dataclass(frozen=True)
class MicroMove:
    kind: str
    magnitude: float = 0.0  # signed cm for translations, degrees for rotations

    def __post_init__(self):
        limit = {ALONG_V: 20.0, ALONG_U: 10.0}.get(self.kind)
        if limit is not None and abs(self.magnitude) > limit:
            raise ValueError(f"{self.kind} of {self.magnitude} cm exceeds the calibrated range")
        if self.kind in (ROTATE_CW, ROTATE_CCW) and self.magnitude < 0:
            raise ValueError("rotation magnitude must be >= 0")


@dataclass(frozen=True)
class ControllerConfig:
    mode: str = DMD
    separation_d: float = 32.0
    focal_px: float = 800.0 / 3.0
    marker_side: float = 7.0
    center_px: float = 135.0
    pan_window: tuple = (110.0, 160.0)
    v_tol_px: float = 5.0
    side_tol_px: float = 4.0
    u_tol_cm: float = 1.5
    rot_threshold_deg: float = 5.0
    flicker_px: float = 1.0
    rot_min_frames: int = 5
    rot_window: int = 8
    rot_sigmas: float = 3.0
    transit_step: float = 5.0
    fine_step: float = 1.0
    max_iter: int = 40
    lost_patience: int = 5
    ridge: float = dmd_mod.DEFAULT_RIDGE
    initial_velocity: tuple = (5.0, 0.0)

    def __post_init__(self):
        if self.mode not in (DMD, NON_DMD):
            raise ValueError(f"mode must be {DMD!r} or {NON_DMD!r}")
        if self.transit_step > 10.0 or self.fine_step > 10.0:
            raise ValueError("micro-move steps must stay within the u-axis range")

    @property
    def setpoint_side_px(self) -> float:
        return self.focal_px * self.marker_side / self.separation_d


@dataclass
class ControllerState:
    config: ControllerConfig
    phase: str = COLLECTING
    dmd: Optional[dmd_mod.DmdState] = None
    last_velocity: np.ndarray = None
    velocity_history: list = field(default_factory=list)
    correction_accum: list = field(default_factory=list)
    # rotation servo memory
    rot_direction: str = ROTATE_CCW
    ratio_samples: list = field(default_factory=list)
    last_rot_estimate: Optional[float] = None

    def __post_init__(self):
        if self.last_velocity is None:
            self.last_velocity = np.array(self.config.initial_velocity, dtype=float)

    @property
    def mode(self) -> str:
        return self.config.mode


@dataclass
class StepLog:
    step: int
    leader_q: tuple
    follower_q: tuple
    pred: tuple
    corrected: tuple
    corrdist: tuple
    zone: str
    lost: bool
    max_iter_exceeded: bool = False
    micro_moves: list = field(default_factory=list)
    formation_error: float = float("nan")


class Plant:
    """Leader and follower poses on the surface.

    Robots drive along geodesics; the follower's heading is parallel
    transported along every translation.  ``side`` is the follower's side of
    the leader, which is also the follower's "away from beacon" u-direction.
    """

    def __init__(self, surface: SurfaceSpec, leader: GeodesicState, follower_q, follower_heading,
                 side: str, h: float = PLANT_STEP):
        self.surface = surface
        self.leader = leader
        self.q = np.asarray(follower_q, dtype=float)
        self.heading = normalize(surface, self.q, follower_heading)
        self.side = side
        self.h = h

    @property
    def other_side(self) -> str:
        return "left" if self.side == "right" else "right"

    def gradient(self) -> np.ndarray:
        return potential_gradient(self.surface, self.q)

    def _translate(self, direction, distance: float, direction_is_u: bool):
        if distance == 0:
            return
        sign = 1.0 if distance > 0 else -1.0
        end = shoot_geodesic(self.surface, GeodesicState(self.q, sign * direction), abs(distance),
                             self.h)
        self.q = end.point
        tangent = sign * end.velocity
        if direction_is_u:
            g = metric_at(self.surface, self.q)
            self.heading = orthogonal_unit(g, tangent, self.other_side)
        else:
            self.heading = tangent

    def frame(self):
        g = metric_at(self.surface, self.q)
        ev = normalize(self.surface, self.q, self.heading)
        return ev, orthogonal_unit(g, ev, self.side)

    def move_v(self, distance: float):
        ev, _ = self.frame()
        self._translate(ev, distance, False)

    def move_u(self, distance: float):
        _, eu = self.frame()
        self._translate(eu, distance, True)

    def rotate(self, degrees_cw: float):
        g = metric_at(self.surface, self.q)
        ev = normalize(self.surface, self.q, self.heading)
        el = orthogonal_unit(g, ev, "left")
        t = math.radians(degrees_cw)
        self.heading = math.cos(t) * ev - math.sin(t) * el

    def relative_pose(self) -> RelativePose:
        """Follower pose in the beacon frame, Euclidean at the midpoint metric."""
        s = self.surface
        lp = self.leader.point
        g = metric_at(s, 0.5 * (lp + self.q))
        ev = self.leader.velocity / math.sqrt(inner(g, self.leader.velocity, self.leader.velocity))
        es = orthogonal_unit(g, ev, self.side)
        el = orthogonal_unit(g, ev, "left")
        r = self.q - lp
        hf = self.heading
        dtheta = -math.degrees(math.atan2(inner(g, hf, el), inner(g, hf, ev)))
        return RelativePose(du=inner(g, r, es), dv=inner(g, r, ev), dtheta=dtheta)


@dataclass
class SensorSuite:
    camera: CameraModel
    motor: MotorModel
    encoder: EncoderModel
    camera_rng: Optional[np.random.Generator] = None
    motor_rng: Optional[np.random.Generator] = None
    encoder_rng: Optional[np.random.Generator] = None
    observer: Optional[object] = None  # overrides camera observation, for tests

    def look(self, pose: RelativePose):
        if self.observer is not None:
            return self.observer(pose)
        return observe(self.camera, pose, self.camera_rng)


def predict_velocity(cs: ControllerState) -> np.ndarray:
    if cs.mode == DMD and cs.phase == PREDICTING:
        return dmd_mod.predict(cs.dmd, cs.last_velocity)
    return np.array(cs.last_velocity, dtype=float)


def _rotation_check(cs: ControllerState, cfg: ControllerConfig, side_px: float):
    """Rotation implied by width foreshortening over recent frames, or None.

    Foreshortening only gives |dtheta|; the direction is remembered and flipped
    when a rotation made the estimate grow.
    """
    n = len(cs.ratio_samples)
    if n == 0 or (cfg.flicker_px > 0 and n < cfg.rot_min_frames):
        return None
    ratio = float(np.mean(cs.ratio_samples))
    est = math.degrees(math.acos(min(ratio, 1.0)))
    sigma = math.sqrt(2.0) * cfg.flicker_px / side_px
    if est <= cfg.rot_threshold_deg or 1.0 - ratio <= cfg.rot_sigmas * sigma / math.sqrt(n):
        cs.last_rot_estimate = None
        return None
    if cs.last_rot_estimate is not None and est > cs.last_rot_estimate:
        cs.rot_direction = ROTATE_CW if cs.rot_direction == ROTATE_CCW else ROTATE_CCW
    cs.last_rot_estimate = est
    cs.ratio_samples.clear()
    return MicroMove(cs.rot_direction, est)


def visual_step(cs: ControllerState, obs):
    """Next visual action for the blocks in ``obs``."""
    cfg = cs.config
    if len(obs) == 0:
        return LOST_SIGNAL
    sigs = {b.signature for b in obs}
    if len(obs) > 2 or (FRONT in sigs and REAR in sigs):
        return MicroMove(ALONG_U, cfg.transit_step)
    if FRONT in sigs:
        return MicroMove(ALONG_V, -cfg.transit_step)
    if REAR in sigs:
        return MicroMove(ALONG_V, cfg.transit_step)

    # fine-tuning on the target block
    b = next(b for b in obs if b.signature == TARGET)
    cs.ratio_samples.append(b.width / b.height)
    del cs.ratio_samples[:-cfg.rot_window]
    offset = b.center_x - cfg.center_px
    lo, hi = cfg.pan_window
    if not lo <= b.center_x <= hi or abs(offset) > cfg.v_tol_px:
        return MicroMove(ALONG_V, -math.copysign(cfg.fine_step, offset))
    du_est = cfg.focal_px * cfg.marker_side / b.height
    side_err = b.height - cfg.setpoint_side_px
    if abs(side_err) > cfg.side_tol_px or abs(du_est - cfg.separation_d) > cfg.u_tol_cm:
        return MicroMove(ALONG_U, math.copysign(cfg.fine_step, cfg.separation_d - du_est))
    rot = _rotation_check(cs, cfg, b.height)
    if rot is not None:
        return rot
    return DONE


def _execute(plant: Plant, sensors: SensorSuite, commanded):
    """Actuate a (dv, du, drot) command; returns encoder-measured (dv, du)."""
    grad = plant.gradient()
    av, au, arot = actuate(sensors.motor, commanded, grad, sensors.motor_rng)
    plant.move_v(av)
    plant.move_u(au)
    if arot:
        plant.rotate(arot)
    return encode(sensors.encoder, (av, au), sensors.encoder_rng)


def run_timestep(cs: ControllerState, plant: Plant, sensors: SensorSuite, step: int):
    """One follower timestep after the leader has moved to ``plant.leader``."""
    cfg = cs.config
    pred = predict_velocity(cs)
    moved = np.array(_execute(plant, sensors, (pred[0], pred[1], 0.0)))

    corr = np.zeros(2)
    moves = []
    empty = 0
    lost = False
    exceeded = True
    for _ in range(cfg.max_iter):
        action = visual_step(cs, sensors.look(plant.relative_pose()))
        if action == DONE:
            exceeded = False
            break
        if action == LOST_SIGNAL:
            empty += 1
            if empty >= cfg.lost_patience:
                lost = True
                exceeded = False
                break
            continue
        empty = 0
        if action.kind == STOP:
            continue
        moves.append(action)
        if action.kind == ALONG_V:
            corr[0] += abs(action.magnitude)
            moved += _execute(plant, sensors, (action.magnitude, 0.0, 0.0))
        elif action.kind == ALONG_U:
            corr[1] += abs(action.magnitude)
            moved += _execute(plant, sensors, (0.0, action.magnitude, 0.0))
        elif action.kind in (ROTATE_CW, ROTATE_CCW):
            sign = 1.0 if action.kind == ROTATE_CW else -1.0
            _execute(plant, sensors, (0.0, 0.0, sign * action.magnitude))

    corrected = moved
    _absorb(cs, corrected)
    cs.correction_accum.append((float(corr[0]), float(corr[1])))
    log = StepLog(
        step=step,
        leader_q=tuple(float(x) for x in plant.leader.point),
        follower_q=tuple(float(x) for x in plant.q),
        pred=(float(pred[0]), float(pred[1])),
        corrected=(float(corrected[0]), float(corrected[1])),
        corrdist=(float(corr[0]), float(corr[1])),
        zone=zone_of(sensors.camera, plant.relative_pose()),
        lost=lost,
        max_iter_exceeded=exceeded,
        micro_moves=moves,
    )
    return cs, log


def _absorb(cs: ControllerState, corrected: np.ndarray):
    """Record a corrected velocity and advance the predictor."""
    prev = cs.last_velocity
    cs.velocity_history.append(corrected.copy())
    if cs.phase == COLLECTING:
        if len(cs.velocity_history) == COLLECTION_SAMPLES:
            X = np.array(cs.velocity_history).T
            if cs.mode == DMD:
                cs.dmd = dmd_mod.init_online(X[:, :-1], X[:, 1:], cs.config.ridge)
            cs.phase = PREDICTING
    elif cs.mode == DMD:
        cs.dmd = dmd_mod.update(cs.dmd, prev, corrected)
    cs.last_velocity = corrected.copy()
