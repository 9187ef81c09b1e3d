import pytest

from conftest import fixture_path, fixture_tangle
from tanglefloer.grading import resolve_grading
from tanglefloer.tangle import (
    Point, TangleError, TangleInvalid, classify_orbits, csi, emit_tangle, frame, from_representatives,
    invert, is_primary, iterate, load, parse_tangle, restrict_window, validate,
)

HEADER = "surface plane\norientation preserving\nwindow 0\n"


def test_empty_tangle_has_no_points():
    t = parse_tangle(HEADER)
    assert t.points == ()
    assert validate(t).ok
    assert not csi(t)


def test_figure8_has_eight_primary_orbits_and_is_csi():
    t = fixture_tangle("figure8")
    kinds = classify_orbits(t)
    assert len(kinds) == 8
    assert set(kinds.values()) == {"primary"}
    report = validate(t)
    assert report.ok and report.csi


def test_duplicate_unstable_parameter_rejected():
    with pytest.raises(TangleInvalid, match="duplicate unstable parameter"):
        load(fixture_path("duplicate_tu.tgl"))


def test_duplicate_reported_without_strict_load():
    t = load(fixture_path("duplicate_tu.tgl"), strict=False)
    errors = validate(t).errors
    assert any("duplicate unstable parameter" in e for e in errors)


@pytest.mark.parametrize("text, line", [
    (HEADER + "pt p 0 1.0 oops +1 () ()\n", 4),
    (HEADER + "bogus\n", 4),
    ("surface sphere\n", 1),
    (HEADER + "polyline u+\nv 0 0\n", 5),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(TangleError) as info:
        parse_tangle(text)
    assert info.value.line == line


def test_missing_header_line():
    with pytest.raises(TangleError, match="window"):
        parse_tangle("surface plane\norientation preserving\n")


@pytest.mark.parametrize("name", ["figure8", "tilted", "chaos", "badflip_post", "heart11", "reversing"])
def test_emit_parse_round_trip(name):
    t = fixture_tangle(name)
    assert parse_tangle(emit_tangle(t)) == t


def test_bad_flip_classification():
    kinds = classify_orbits(fixture_tangle("badflip_post"))
    assert kinds["s"] == "noncontractible"
    assert kinds["r"] == "secondary"
    assert kinds["p"] == "primary"


def test_single_point_is_primary():
    t = fixture_tangle("single")
    assert t.window == 1
    assert classify_orbits(t) == {"p": "primary"}


def test_single_orbit_frame_is_empty():
    t = fixture_tangle("single")
    assert frame(t, ("p", 0)).interior == ()


def test_figure8_frame_matches_brute_force():
    t = fixture_tangle("figure8")
    p = t.point(("p", 0))
    f = frame(t, p)
    e = t.point(("p", 1))

    def between(a, b, c):
        return min(a, c) < b < max(a, c)

    brute = {r for r in t.points if between(p.t_u, r.t_u, e.t_u) and between(p.t_s, r.t_s, e.t_s)}
    assert set(f.interior) == brute
    # one representative of every other primary family on p's branch pair
    same_pair = {r.orbit for r in t.points if r.pair == p.pair and is_primary(t, r) and r.orbit != "p"}
    assert sorted(r.orbit for r in f.interior) == sorted(same_pair)


def test_reversing_frame_spans_second_iterate():
    t = fixture_tangle("reversing")
    assert frame(t, ("p", 0)).end.key == ("p", 2)


def test_iterate_by_one_is_identity():
    t = fixture_tangle("figure8")
    assert iterate(t, 1) == t


def test_iterate_chaos_cubes_the_classes():
    t3 = iterate(fixture_tangle("chaos"), 3)
    assert sorted(t3.orbits) == ["p^0", "p^1", "p^2", "q^0", "q^1", "q^2"]


def test_inverse_negates_primary_grades():
    t = fixture_tangle("figure8")
    g, gi = resolve_grading(t), resolve_grading(iterate(t, -1))
    assert {o: -v for o, v in g.mu.items()} == gi.mu


def test_invert_twice_restores():
    t = fixture_tangle("tilted")
    assert invert(invert(t)) == t


def test_restrict_window_drops_far_iterates():
    t = restrict_window(fixture_tangle("henon_pair"), 2)
    assert t.window == 2
    assert max(abs(p.iterate) for p in t.points) == 2


def test_from_representatives_scales_iterates():
    t = from_representatives([Point("p", 0, 1.0, 1.0, 1, mu=-1)], window=2, scale=3.0)
    assert [(p.t_u, p.t_s) for p in t.points] == [(1 / 9, 9.0), (1 / 3, 3.0), (1.0, 1.0), (3.0, 1 / 3), (9.0, 1 / 9)]
