"""Leader geodesics, follower reference trajectories and formation error."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (DEFAULT_STEP, GeodesicState, SurfaceSpec, inner, metric_at, normalize,
                       shoot_geodesic)


class ZeroHeading(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FormationSpec:
    separation_d: float = 32.0
    side: str = "right"
    follower_count: int = 1

    def __post_init__(self):
        if self.separation_d < 0:
            raise ValueError("separation_d must be >= 0")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.follower_count < 1:
            raise ValueError("follower_count must be positive")


@dataclass
class LeaderTrajectory:
    states: list
    step_length: float

    @property
    def points(self) -> np.ndarray:
        return np.array([st.point for st in self.states])


@dataclass
class ReferenceTrajectory:
    # points[j] is the (steps+1, 2) array for follower j+1
    points: list

    def follower(self, j: int) -> np.ndarray:
        return self.points[j - 1]


def orthogonal_unit(g, heading, side: str) -> np.ndarray:
    """Unit vector g-orthogonal to ``heading`` on the requested side.

    ``left`` means the chart cross product ``heading x v`` is positive.
    """
    g = np.asarray(g, dtype=float)
    h = np.asarray(heading, dtype=float)
    hh = inner(g, h, h)
    if hh < 1e-12:
        raise ZeroHeading("heading has zero g-speed")
    w = np.array([-h[1], h[0]])
    v = w - inner(g, w, h) / hh * h
    v /= math.sqrt(inner(g, v, v))
    return v if side == "left" else -v


def build_leader(s: SurfaceSpec, start, heading, steps: int, step_length: float = 5.0,
                 h: float = DEFAULT_STEP) -> LeaderTrajectory:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    st = GeodesicState(start, normalize(s, start, heading))
    states = [st]
    for _ in range(steps):
        st = shoot_geodesic(s, st, step_length, h)
        states.append(st)
    return LeaderTrajectory(states, step_length)


def reference_point(s: SurfaceSpec, leader_state: GeodesicState, distance: float, side: str,
                    h: float = DEFAULT_STEP) -> np.ndarray:
    """End of the g-orthogonal geodesic of length ``distance`` from a leader state."""
    p = leader_state.point
    v = orthogonal_unit(metric_at(s, p), leader_state.velocity, side)
    return shoot_geodesic(s, GeodesicState(p, v), distance, h).point


def build_reference(s: SurfaceSpec, lt: LeaderTrajectory, spec: FormationSpec,
                    h: float = DEFAULT_STEP) -> ReferenceTrajectory:
    if not lt.states:
        raise ValueError("empty leader trajectory")
    points = []
    for j in range(1, spec.follower_count + 1):
        dist = j * spec.separation_d
        points.append(np.array([reference_point(s, st, dist, spec.side, h) for st in lt.states]))
    return ReferenceTrajectory(points)


def formation_error(actual, ref: ReferenceTrajectory, j: int = 1) -> np.ndarray:
    """Per-step chart-Euclidean distance between follower ``j`` and its reference."""
    actual = np.asarray(actual, dtype=float).reshape(-1, 2)
    target = ref.follower(j)
    if len(actual) != len(target):
        raise LengthMismatch(f"{len(actual)} positions vs {len(target)} reference points")
    return np.linalg.norm(actual - target, axis=1)
