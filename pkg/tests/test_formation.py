import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from geoform.formation import (FormationSpec, LengthMismatch, ReferenceTrajectory, ZeroHeading,
                               build_leader, build_reference, formation_error, orthogonal_unit)
from geoform.geometry import SurfaceSpec, inner, metric_at
from geoform.harness import TRACKS

from oracles import geodesic_ivp, orthogonal_distance

S = SurfaceSpec()
FLAT = SurfaceSpec.flat()


def cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def test_orthogonal_unit_examples():
    assert np.allclose(orthogonal_unit(np.eye(2), (1, 0), "left"), [0, 1])
    g = np.array([[1.01, 0], [0, 1]])
    v = orthogonal_unit(g, (0, 1), "left")
    assert np.allclose(v, [-1 / math.sqrt(1.01), 0], atol=1e-15)
    assert v[0] == pytest.approx(-0.995037, abs=1e-6)
    assert abs(inner(g, v, (0, 1))) < 1e-12


def test_orthogonal_unit_zero_heading():
    with pytest.raises(ZeroHeading):
        orthogonal_unit(np.eye(2), (0, 0), "left")


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 178), st.floats(0, 178), st.floats(0, 2 * math.pi), st.floats(0.1, 10))
def test_orthogonal_unit_properties(x, y, th, r):
    g = metric_at(S, (x, y))
    h = r * np.array([math.cos(th), math.sin(th)])
    left = orthogonal_unit(g, h, "left")
    right = orthogonal_unit(g, h, "right")
    for v in (left, right):
        assert abs(inner(g, v, h)) < 1e-12 * r
        assert abs(inner(g, v, v) - 1.0) < 1e-12
    assert np.allclose(left, -right, atol=0)
    assert cross(h, left) > 0 > cross(h, right)


def test_flat_leader_points():
    lt = build_leader(FLAT, (0, 0), (0, 1), 15, 5.0)
    assert np.allclose(lt.points, [(0, 5 * k) for k in range(16)], atol=1e-10)


def test_track_one_leader_gaps():
    t = TRACKS["one"]
    lt = build_leader(S, t["leader_start"], t["leader_heading"], t["steps"], 5.0)
    assert len(lt.states) == 16
    for a, b in zip(lt.states, lt.states[1:]):
        # re-measure each proper gap along an independently integrated geodesic
        sol = geodesic_ivp(a.point, a.velocity, 6.0)
        res = minimize_scalar(lambda s: np.linalg.norm(sol.sol(s)[:2] - b.point),
                              bounds=(4.0, 6.0), method="bounded", options={"xatol": 1e-10})
        assert res.fun < 1e-6
        assert res.x == pytest.approx(5.0, abs=1e-6)


def test_radial_leader_collinear():
    lt = build_leader(S, (40, 40), (1, 1), 10, 5.0)
    pts = lt.points - 89.0
    assert np.max(np.abs(pts[:, 0] - pts[:, 1])) < 1e-9


def test_build_leader_needs_steps():
    with pytest.raises(ValueError):
        build_leader(S, (40, 40), (1, 0), 0)


def test_flat_reference_parallel_offset():
    lt = build_leader(FLAT, (0, 0), (0, 1), 15, 5.0)
    ref = build_reference(FLAT, lt, FormationSpec(32.0, "left"))
    assert np.max(np.abs(ref.follower(1) - (lt.points + [-32.0, 0.0]))) < 1e-9


def test_zero_separation_coincides_with_leader():
    lt = build_leader(S, (76.3, 15.8), (0, 1), 5, 5.0)
    ref = build_reference(S, lt, FormationSpec(0.0, "right"))
    assert np.array_equal(ref.follower(1), lt.points)


def test_follower_chain_spacing():
    lt = build_leader(FLAT, (0, 0), (1, 0), 3, 5.0)
    ref = build_reference(FLAT, lt, FormationSpec(32.0, "right", follower_count=3))
    for j in (1, 2, 3):
        assert np.allclose(ref.follower(j)[:, 1], -32.0 * j, atol=1e-9)


@pytest.mark.parametrize("track", ["one", "two"])
def test_reference_remeasured_by_independent_shooting(track):
    t = TRACKS[track]
    lt = build_leader(S, t["leader_start"], t["leader_heading"], t["steps"], 5.0)
    ref = build_reference(S, lt, FormationSpec(32.0, "right"))
    for st_, p in zip(lt.states, ref.follower(1)):
        arc, miss = orthogonal_distance(st_.point, st_.velocity, p, "right")
        assert arc == pytest.approx(32.0, abs=0.01)
        assert miss < 0.01


def test_curved_reference_not_constant_offset():
    t = TRACKS["two"]
    lt = build_leader(S, t["leader_start"], t["leader_heading"], t["steps"], 5.0)
    offset = build_reference(S, lt, FormationSpec(32.0, "right")).follower(1) - lt.points
    assert np.max(np.linalg.norm(offset - offset[0], axis=1)) > 0.01


def test_formation_error_examples():
    ref = ReferenceTrajectory([np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 5.0]])])
    assert np.array_equal(formation_error(ref.follower(1), ref), [0, 0, 0])
    assert np.allclose(formation_error(ref.follower(1) + [1.0, 0.0], ref), [1, 1, 1])
    with pytest.raises(LengthMismatch):
        formation_error(ref.follower(1)[:2], ref)


def test_formation_spec_validation():
    with pytest.raises(ValueError):
        FormationSpec(side="up")
    with pytest.raises(ValueError):
        FormationSpec(separation_d=-1)
