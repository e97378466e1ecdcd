"""Differential geometry of a surface given as the graph of a height field.

Chart coordinates ``q = (q1, q2)`` are in centimetres.  The induced metric of
the graph of ``F`` is ``g = I + grad F grad F^T`` and geodesics are integrated
in arc-length parameterisation with fixed-step RK4.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels

CUSTOM_FD_STEP = 1e-4
ORACLE_FD_STEP = 1e-5
DEFAULT_STEP = 0.01


class DomainExit(UserWarning):
    """A trajectory left the surface's chart domain."""


class SingularMetric(ArithmeticError):
    pass


@dataclass(frozen=True)
class SurfaceSpec:
    """Potential surface ``F(q)``.

    ``kind="paraboloid"`` uses ``base_c + coeff_a * |q - center|^2``;
    ``kind="custom"`` evaluates ``field(q1, q2)`` and differentiates it
    numerically.
    """

    kind: str = "paraboloid"
    coeff_a: float = 0.001
    base_c: float = 5.0
    center: tuple = (89.0, 89.0)
    domain: tuple = (0.0, 178.0, 0.0, 178.0)  # (q1_min, q1_max, q2_min, q2_max)
    field: Optional[Callable[[float, float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("paraboloid", "custom"):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.kind == "custom" and self.field is None:
            raise ValueError("custom surface needs a field callable")
        if self.coeff_a < 0:
            raise ValueError("coeff_a must be >= 0")
        x0, x1, y0, y1 = self.domain
        if not (x1 > x0 and y1 > y0):
            raise ValueError("domain must have positive area")

    @classmethod
    def flat(cls, height: float = 0.0, domain=(-1e4, 1e4, -1e4, 1e4)) -> "SurfaceSpec":
        # zero-curvature paraboloid keeps the compiled kernel path
        return cls(kind="paraboloid", coeff_a=0.0, base_c=height, center=(0.0, 0.0), domain=domain)

    def contains(self, q) -> bool:
        x0, x1, y0, y1 = self.domain
        return x0 <= q[0] <= x1 and y0 <= q[1] <= y1


@dataclass(frozen=True)
class GeodesicState:
    point: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))

    def as_tuple(self):
        return (self.point[0], self.point[1], self.velocity[0], self.velocity[1])


def potential_value(s: SurfaceSpec, p) -> float:
    if s.kind == "paraboloid":
        d1 = p[0] - s.center[0]
        d2 = p[1] - s.center[1]
        return s.base_c + s.coeff_a * (d1 * d1 + d2 * d2)
    return float(s.field(p[0], p[1]))


def potential_gradient(s: SurfaceSpec, p) -> np.ndarray:
    if s.kind == "paraboloid":
        return np.array([2.0 * s.coeff_a * (p[0] - s.center[0]),
                         2.0 * s.coeff_a * (p[1] - s.center[1])])
    h = CUSTOM_FD_STEP
    f = s.field
    return np.array([
        (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2 * h),
        (f(p[0], p[1] + h) - f(p[0], p[1] - h)) / (2 * h),
    ])


def potential_hessian(s: SurfaceSpec, p) -> np.ndarray:
    if s.kind == "paraboloid":
        return 2.0 * s.coeff_a * np.eye(2)
    h = CUSTOM_FD_STEP
    f = s.field
    x, y = p[0], p[1]
    f0 = f(x, y)
    fxx = (f(x + h, y) - 2 * f0 + f(x - h, y)) / h**2
    fyy = (f(x, y + h) - 2 * f0 + f(x, y - h)) / h**2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h**2)
    return np.array([[fxx, fxy], [fxy, fyy]])


def metric_at(s: SurfaceSpec, p) -> np.ndarray:
    df = potential_gradient(s, p)
    return np.eye(2) + np.outer(df, df)


def christoffel_at(s: SurfaceSpec, p) -> np.ndarray:
    """Closed-form Christoffel symbols ``gamma[k, i, j]`` of a graph surface."""
    df = potential_gradient(s, p)
    hess = potential_hessian(s, p)
    return np.einsum("k,ij->kij", df, hess) / (1.0 + df @ df)


def christoffel_fd(s: SurfaceSpec, p, h: float = ORACLE_FD_STEP) -> np.ndarray:
    """Christoffel symbols from the Levi-Civita formula with differenced metric.

    Independent of :func:`christoffel_at`; used to check it.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    p = np.asarray(p, dtype=float)
    dg = np.empty((2, 2, 2))  # dg[c, a, b] = d_c g_ab
    for c in range(2):
        e = np.zeros(2)
        e[c] = h
        dg[c] = (metric_at(s, p + e) - metric_at(s, p - e)) / (2 * h)
    g = metric_at(s, p)
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    if not det > 1e-12:  # also catches NaN from a broken field
        raise SingularMetric(f"det(g) = {det} at {p}")
    ginv = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det
    gamma = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            for c in range(2):
                acc = 0.0
                for d in range(2):
                    acc += ginv[a, d] * (dg[c, d, b] + dg[b, d, c] - dg[d, b, c])
                gamma[a, b, c] = 0.5 * acc
    return gamma


def inner(g, u, v) -> float:
    return float(np.asarray(u) @ np.asarray(g) @ np.asarray(v))


def speed(s: SurfaceSpec, st: GeodesicState) -> float:
    """g-norm of the state's velocity."""
    return math.sqrt(inner(metric_at(s, st.point), st.velocity, st.velocity))


def geodesic_rhs(s: SurfaceSpec, st: GeodesicState) -> np.ndarray:
    if s.kind == "paraboloid":
        return np.array(kernels.paraboloid_rhs(*st.as_tuple(), s.coeff_a, *s.center))
    gamma = christoffel_at(s, st.point)
    v = st.velocity
    acc = -np.einsum("kij,i,j->k", gamma, v, v)
    return np.concatenate([v, acc])


def _generic_step(s: SurfaceSpec, y: np.ndarray, h: float) -> np.ndarray:
    def f(y):
        return geodesic_rhs(s, GeodesicState(y[:2], y[2:]))

    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_step(s: SurfaceSpec, st: GeodesicState, h: float = DEFAULT_STEP) -> GeodesicState:
    if h <= 0:
        raise ValueError("step must be positive")
    if s.kind == "paraboloid":
        y = kernels.paraboloid_step(*st.as_tuple(), s.coeff_a, *s.center, h)
    else:
        y = _generic_step(s, np.array(st.as_tuple()), h)
    return GeodesicState(y[:2], y[2:])


def normalize(s: SurfaceSpec, p, v) -> np.ndarray:
    """Rescale ``v`` to unit g-speed at ``p``."""
    v = np.asarray(v, dtype=float)
    n = math.sqrt(inner(metric_at(s, p), v, v))
    if n < 1e-12:
        raise ValueError("cannot normalize a zero tangent vector")
    return v / n


def shoot_geodesic(s: SurfaceSpec, start: GeodesicState, arc_length: float,
                   h: float = DEFAULT_STEP) -> GeodesicState:
    """Follow the geodesic through ``start`` for ``arc_length`` cm of proper length.

    The returned velocity has unit g-speed.  Leaving the chart domain emits a
    :class:`DomainExit` warning and integration continues.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    if arc_length < 0:
        raise ValueError("arc_length must be >= 0")
    v = normalize(s, start.point, start.velocity)
    if arc_length == 0:
        return GeodesicState(start.point.copy(), v)
    if s.kind == "paraboloid":
        q1, q2, v1, v2, exited = kernels.paraboloid_shoot(
            start.point[0], start.point[1], v[0], v[1], s.coeff_a, s.center[0], s.center[1],
            arc_length, h, *s.domain)
        end = GeodesicState((q1, q2), (v1, v2))
    else:
        y = np.concatenate([start.point, v])
        n = int(arc_length / h)
        rest = arc_length - n * h
        exited = False
        for _ in range(n):
            y = _generic_step(s, y, h)
            exited = exited or not s.contains(y)
        if rest > 0:
            y = _generic_step(s, y, rest)
            exited = exited or not s.contains(y)
        end = GeodesicState(y[:2], y[2:])
    if exited:
        warnings.warn(f"geodesic from {tuple(start.point)} left the domain {s.domain}",
                      DomainExit, stacklevel=2)
    return end
