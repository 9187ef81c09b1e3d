import math
from dataclasses import replace

import pytest

from conftest import fixture_tangle
from tanglefloer.grading import (
    GradingError, GradingTable, maslov_abs_geometric, resolve_grading, validate_grading,
)
from tanglefloer.tangle import Geometry, Point, Tangle, from_representatives


def _polyline(vertices):
    out, t = [], 0.0
    for i, v in enumerate(vertices):
        if i:
            t += math.dist(vertices[i - 1], v)
        out.append((v[0], v[1], t))
    return tuple(out)


def lens(flip=1):
    """u+ leaves x, arcs over and comes down through the s+ axis at (2.5, 0)."""
    u = _polyline([(0, 0), (1, flip), (2, flip), (3, -flip)])
    s = _polyline([(0, 0), (4, 0)])
    t_u = u[2][2] + math.dist((2, flip), (2.5, 0))
    geo = Geometry((("u+", u), ("s+", s)))
    return Tangle("plane", False, 0, (), (), geo, None).with_points([Point("p", 0, t_u, 2.5, flip)])


@pytest.mark.parametrize("flip", [1, -1])
def test_convex_bigon_with_fixed_point_has_index_one(flip):
    assert maslov_abs_geometric(lens(flip), ("p", 0)) == flip


def test_geometric_source_when_only_geometry():
    g = resolve_grading(lens())
    assert g.source == "geometric"
    assert g.mu == {"p": 1}


def test_supplied_and_geometric_agree():
    t = lens()
    t = t.with_points([replace(p, mu=1) for p in t.points])
    assert resolve_grading(t).mu == {"p": 1}


def test_inconsistent_grades_name_the_orbit():
    t = lens()
    t = t.with_points([replace(p, mu=-1) for p in t.points])
    with pytest.raises(GradingError, match="p"):
        resolve_grading(t)


def test_supplied_source():
    g = resolve_grading(fixture_tangle("figure8"))
    assert g.source == "supplied"


def test_figure8_grades_and_balance():
    t = fixture_tangle("figure8")
    g = resolve_grading(t)
    assert sorted(g.mu.values()) == [-3, -3, -2, -2, -2, -2, -1, -1]
    assert (g["p"], g["q"], g["r"]) == (-1, -2, -3)
    assert validate_grading(t, g).ok


def test_tilted_p_tilde_has_grade_three():
    t = fixture_tangle("tilted")
    g = resolve_grading(t)
    assert g["pt"] == 3
    assert validate_grading(t, g).ok


def test_grade_out_of_range():
    t = fixture_tangle("henon_pair")
    report = validate_grading(t, GradingTable({"p": 4, "q": 3}, "supplied"))
    assert any("outside" in f for f in report.range)


def test_two_equal_jumps_break_alternation():
    reps = [Point("p", 0, 1.0, 1.0, 1, mu=-1), Point("q", 0, 1.2, 0.9, -1, mu=-2),
            Point("r", 0, 1.4, 0.8, 1, mu=-3)]
    t = from_representatives(reps, window=2)
    report = validate_grading(t, resolve_grading(t))
    assert report.alternation


def test_ungraded_tangle_is_an_error():
    t = from_representatives([Point("p", 0, 1.0, 1.0, 1)], window=1)
    with pytest.raises(GradingError):
        resolve_grading(t)


def test_geometric_grades_of_traced_tangle_are_consistent(traced_quadratic):
    t = traced_quadratic[0].tangle
    g = resolve_grading(t)
    assert sorted(g.mu.values()) == [1, 2]
    assert validate_grading(t, g).ok
