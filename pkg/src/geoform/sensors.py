"""Simulated camera, motors and external encoders of a follower robot.

Randomness always comes from an explicitly passed ``numpy.random.Generator``.
Relative poses are expressed in the beacon's frame: ``du`` is the lateral
distance from the beacon towards the follower's side, ``dv`` how far the
follower is ahead of the beacon, ``dtheta`` the follower's heading relative to
the beacon's, positive clockwise.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

FRONT, REAR, TARGET = "Front", "Rear", "Target"
UNATTAINABLE, LOST = "Unattainable", "Lost"


class RangeClamped(UserWarning):
    """A commanded distance was outside the calibrated range and got clipped."""


@dataclass(frozen=True)
class RelativePose:
    du: float
    dv: float
    dtheta: float = 0.0


@dataclass(frozen=True)
class BlockObservation:
    signature: str
    center_x: float
    center_y: float
    width: float
    height: float


@dataclass(frozen=True)
class CameraModel:
    resolution: tuple = (316, 208)
    # 800/3 puts dv = +-3 cm at du = 32 cm exactly on pixels 160 / 110
    focal_px: float = 800.0 / 3.0
    center_px: float = 135.0
    marker_side: float = 7.0
    fov_half_deg: float = 30.0
    sensing_range: float = 45.0
    max_angle_deg: float = 60.0
    unattainable_du: float = 24.0
    unattainable_dv: float = 40.0
    target_dv: float = 10.0
    target_visible_dv: float = 15.0
    beacon_half_length: float = 18.25  # front/rear marker offset from the beacon centre
    position_sigma: float = 1.5
    side_sigma: float = 1.0
    dropout_prob: float = 0.01

    def __post_init__(self):
        if self.focal_px <= 0:
            raise ValueError("focal_px must be positive")
        if self.marker_side <= 0:
            raise ValueError("marker_side must be positive")
        if not 0 <= self.dropout_prob <= 1:
            raise ValueError("dropout_prob must be a probability")
        if self.unattainable_du > self.sensing_range:
            raise ValueError("unattainable band wider than the sensing range")

    @property
    def center_y(self) -> float:
        return self.resolution[1] / 2.0

    def side_px(self, du: float) -> float:
        return self.focal_px * self.marker_side / du

    def pan_px(self, du: float, dv: float) -> float:
        return self.center_px + self.focal_px * dv / du


@dataclass(frozen=True)
class MotorModel:
    # rotations = alpha * |d| + beta per axis (v and u)
    alpha_v: float = 0.053
    beta_v: float = 0.02
    alpha_u: float = 0.060
    beta_u: float = 0.03
    range_v: float = 20.0
    range_u: float = 10.0
    actuation_sigma: float = 0.02
    slip_gain: float = 0.05
    rotation_sigma: float = 0.5

    def __post_init__(self):
        if self.alpha_v <= 0 or self.alpha_u <= 0:
            raise ValueError("calibration slopes must be positive")
        if self.beta_v < 0 or self.beta_u < 0:
            raise ValueError("calibration offsets must be >= 0")


@dataclass(frozen=True)
class EncoderModel:
    noise_sigma: float = 0.02
    quantization: float = 3.8 * math.pi / 512  # cm per tick, 38 mm wheel at 512 counts

    def __post_init__(self):
        if self.noise_sigma < 0 or self.quantization < 0:
            raise ValueError("noise_sigma and quantization must be >= 0")


def zone_of(cam: CameraModel, pose: RelativePose) -> str:
    du, dv = pose.du, pose.dv
    if abs(du) > cam.sensing_range or abs(dv) > cam.sensing_range:
        return LOST
    if abs(pose.dtheta) > cam.max_angle_deg:
        return LOST
    if abs(du) < cam.unattainable_du and abs(dv) < cam.unattainable_dv:
        return UNATTAINABLE
    if du <= -cam.unattainable_du and abs(dv) <= cam.target_dv:
        # beacon's far side carries no target marker
        return LOST
    if abs(dv) <= cam.target_dv:
        return TARGET
    return FRONT if dv > 0 else REAR


def _block(cam: CameraModel, sig: str, du: float, dv: float, dtheta: float, rng, noisy: bool):
    du = max(abs(du), 1.0)
    side = cam.side_px(du)
    cx = cam.pan_px(du, dv)
    width = side * math.cos(math.radians(dtheta))
    height = side
    cy = cam.center_y
    if noisy:
        cx += rng.normal(0.0, cam.position_sigma)
        cy += rng.normal(0.0, cam.position_sigma)
        width += rng.normal(0.0, cam.side_sigma)
        height += rng.normal(0.0, cam.side_sigma)
    xmax = np.nextafter(cam.resolution[0], 0)
    ymax = np.nextafter(cam.resolution[1], 0)
    return BlockObservation(sig, float(min(max(cx, 0.0), xmax)), float(min(max(cy, 0.0), ymax)),
                            max(width, 1.0), max(height, 1.0))


def observe(cam: CameraModel, pose: RelativePose, rng=None) -> list:
    """Blocks the follower's camera reports for ``pose``; empty when lost."""
    zone = zone_of(cam, pose)
    if zone == LOST:
        return []
    noisy = rng is not None
    du, dv, th = pose.du, pose.dv, pose.dtheta
    half = cam.beacon_half_length
    if zone == TARGET:
        specs = [(TARGET, dv)]
    elif zone == FRONT:
        specs = [(FRONT, dv - half)]
        if abs(dv) <= cam.target_visible_dv:
            specs.append((TARGET, dv))
    elif zone == REAR:
        specs = [(REAR, dv + half)]
        if abs(dv) <= cam.target_visible_dv:
            specs.append((TARGET, dv))
    else:
        specs = [(FRONT, dv - half), (TARGET, dv), (REAR, dv + half)]
    blocks = []
    for sig, off in specs:
        b = _block(cam, sig, du, off, th, rng, noisy)
        if noisy and cam.dropout_prob > 0 and rng.random() < cam.dropout_prob:
            continue
        blocks.append(b)
    return blocks


def _axis(mm: MotorModel, axis: str):
    if axis == "v":
        return mm.alpha_v, mm.beta_v, mm.range_v
    if axis == "u":
        return mm.alpha_u, mm.beta_u, mm.range_u
    raise ValueError(f"unknown axis {axis!r}")


def clamp_distance(mm: MotorModel, distance: float, axis: str) -> float:
    lim = _axis(mm, axis)[2]
    if abs(distance) > lim:
        warnings.warn(f"{axis}-axis distance {distance} clamped to +-{lim} cm", RangeClamped,
                      stacklevel=2)
        return math.copysign(lim, distance)
    return distance


def convert_to_rotations(mm: MotorModel, distance: float, axis: str) -> float:
    """Wheel rotations for a signed distance; zero distance needs no rotation."""
    alpha, beta, _ = _axis(mm, axis)
    distance = clamp_distance(mm, distance, axis)
    if distance == 0:
        return 0.0
    return math.copysign(alpha * abs(distance) + beta, distance)


def rotations_to_distance(mm: MotorModel, rotations: float, axis: str) -> float:
    alpha, beta, _ = _axis(mm, axis)
    if rotations == 0:
        return 0.0
    return math.copysign((abs(rotations) - beta) / alpha, rotations)


def actuate(mm: MotorModel, commanded, grad, rng=None):
    """Displacement ``(dv, du, drot)`` actually produced for a command.

    Translations fall short by ``slip_gain * |grad F|`` and carry
    multiplicative noise; rotations carry additive noise when issued.
    """
    cv, cu, crot = commanded
    cv = rotations_to_distance(mm, convert_to_rotations(mm, cv, "v"), "v")
    cu = rotations_to_distance(mm, convert_to_rotations(mm, cu, "u"), "u")
    slip = 1.0 - mm.slip_gain * float(np.hypot(grad[0], grad[1]))
    av, au, arot = cv * slip, cu * slip, float(crot)
    if rng is not None:
        if mm.actuation_sigma > 0:
            av *= 1.0 + rng.normal(0.0, mm.actuation_sigma)
            au *= 1.0 + rng.normal(0.0, mm.actuation_sigma)
        if crot != 0 and mm.rotation_sigma > 0:
            arot += rng.normal(0.0, mm.rotation_sigma)
    return (av, au, arot)


def encode(em: EncoderModel, actual, rng=None):
    out = []
    for x in actual:
        if rng is not None and em.noise_sigma > 0:
            x = x * (1.0 + rng.normal(0.0, em.noise_sigma))
        if em.quantization > 0:
            x = round(x / em.quantization) * em.quantization
        out.append(float(x))
    return tuple(out)
