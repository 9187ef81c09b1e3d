import numpy as np
import pytest

from tanglefloer.tangle import csi, intersecting_pairs, validate
from tanglefloer.tracer import (
    MapHandle, TracerError, builtin_map, find_fixed_point, grow_branch, henon_like, segment_crossings, trace,
)

POINTS = np.array([[0.3, -0.2], [1.1, 0.4], [-0.7, 0.9], [1.6, -1.2]])


@pytest.mark.parametrize("tau", [0.0, 0.5, 1.0])
def test_jacobian_matches_finite_differences(tau):
    m = henon_like(tau, 0.3)
    h = 1e-6
    for P in POINTS:
        J = m.jacobian(P)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            column = (m.forward(P + e) - m.forward(P - e)) / (2 * h)
            assert np.allclose(J[:, k], column, atol=1e-7)


@pytest.mark.parametrize("tau", [0.0, 1.0])
def test_area_preserving(tau):
    m = henon_like(tau, 0.3)
    assert np.allclose(np.linalg.det(m.jacobian(POINTS)), 1.0, atol=1e-12)


def test_inverse_undoes_forward():
    m = henon_like(1.0, 0.3)
    assert np.allclose(m.inverse(m.forward(POINTS)), POINTS, atol=1e-12)


def test_fixed_point_at_origin():
    s = find_fixed_point(henon_like(0.0, 0.1), (0.01, 0.01))
    assert np.allclose(s.point, 0.0, atol=1e-12)
    assert s.unstable_value > 1 > s.stable_value > 0
    assert s.unstable_value * s.stable_value == pytest.approx(1.0)
    assert not s.reversing


def test_non_saddle_rejected():
    rotation = MapHandle(
        "rotation", {},
        lambda P: P @ np.array([[0.0, -1.0], [1.0, 0.0]]).T,
        lambda P: P @ np.array([[0.0, 1.0], [-1.0, 0.0]]).T,
        lambda P: np.broadcast_to(np.array([[0.0, -1.0], [1.0, 0.0]]), np.shape(P)[:-1] + (2, 2)),
    )
    with pytest.raises(TracerError, match="saddle"):
        find_fixed_point(rotation)


def test_reversing_saddle_refused():
    flip = MapHandle(
        "flip", {},
        lambda P: P * np.array([-2.0, -0.5]),
        lambda P: P / np.array([-2.0, -0.5]),
        lambda P: np.broadcast_to(np.diag([-2.0, -0.5]), np.shape(P)[:-1] + (2, 2)),
    )
    with pytest.raises(TracerError, match="reversing"):
        trace(flip, budget=0.1)


@pytest.mark.parametrize("params", [{"tau": 2.0}, {"eps": -0.1}])
def test_builtin_map_checks_parameters(params):
    with pytest.raises(TracerError):
        builtin_map("henon", **params)


def test_unknown_map():
    with pytest.raises(TracerError):
        builtin_map("standard")


@pytest.mark.parametrize("name, which", [("u+", "unstable_dir"), ("s-", "stable_dir")])
def test_short_branch_follows_eigenvector(name, which):
    m = henon_like(0.0, 0.3)
    s = find_fixed_point(m)
    b = grow_branch(m, s, name, budget=0.02)
    v = getattr(s, which)
    # chords from x to vertices within 1e-4 of it
    near = b.vertices[1:][b.params[1:] < 1e-4] - s.point
    assert len(near)
    cosine = np.abs(near @ v) / np.hypot(*near.T)
    assert np.arccos(np.minimum(cosine, 1.0)).max() < 1e-3


def test_segment_crossings_of_an_x():
    U = np.array([[-1.0, -1.0], [0.0, 0.0], [1.0, 1.0]])
    S = np.array([[-1.0, 1.0], [-0.5, 0.5], [1.0, -1.0]])
    assert segment_crossings(U, S, skip_first=False) in ([(0, 1)], [(1, 1)])
    parallel = np.array([[-1.0, -0.9], [1.0, 1.1]])
    assert segment_crossings(U, parallel, skip_first=False) == []


def test_no_crossings_in_budget():
    r = trace(henon_like(0.0, 0.3), budget=0.5)
    assert r.tangle.points == ()
    assert not csi(r.tangle)


def test_quadratic_branches_intersect(traced_quadratic):
    t = traced_quadratic[0].tangle
    assert validate(t).ok
    assert intersecting_pairs(t) == ["u+s+"]


def test_trace_is_deterministic(traced_quadratic):
    again = trace(henon_like(0.0, 0.3), budget=3.3).tangle
    assert again == traced_quadratic[0].tangle
