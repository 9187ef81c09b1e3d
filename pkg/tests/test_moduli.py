import pytest

from conftest import fixture_tangle
from tanglefloer.chain import jump_sign
from tanglefloer.grading import resolve_grading
from tanglefloer.moduli import (
    BigonCertificate, ModuliError, bigon, bigon_obstruction, cut, fixed_point, glue, heart, interior_contains,
    is_fixed,
    winding_index,
)
from tanglefloer.tangle import MarkedPoint, iterate
from test_grading import lens

SQUARE = [(-1, -1), (1, -1), (1, 1), (-1, 1)]


def test_winding_inside_and_outside():
    assert winding_index(SQUARE, (0, 0)) == 1
    assert winding_index(SQUARE, (3, 0)) == 0
    assert winding_index(SQUARE[::-1], (0, 0)) == -1


def test_doubled_loop_winds_twice():
    assert winding_index(SQUARE + SQUARE, (0.2, -0.3)) == 2


def test_point_on_loop_rejected():
    with pytest.raises(ModuliError):
        winding_index(SQUARE, (1, 0))


@pytest.fixture(scope="module")
def fig8():
    t = fixture_tangle("figure8")
    return t, resolve_grading(t)


def test_adjacent_primary_points_bound_a_bigon(fig8):
    t, g = fig8
    assert bigon(t, t.point(("p", 0)), t.point(("q", 0)), g) is not None


def test_far_iterates_are_blocked(fig8):
    t, g = fig8
    p = t.point(("p", 0))
    for k in (-4, -3, 2, 3, 4):
        assert bigon_obstruction(t, p, t.point(("q", k)), g).startswith("blocked by")


def test_index_mismatch_blocks_bigon(fig8):
    t, g = fig8
    assert "index difference" in bigon_obstruction(t, t.point(("p", 0)), t.point(("r", 0)), g)


def test_figure8_heart_is_glued_from_its_bigons(fig8):
    t, g = fig8
    p, r = t.point(("p", 0)), t.point(("r", 2))
    h = heart(t, p, r, g)
    assert h is not None and h.globally_injective
    glued = glue(t, bigon(t, p, h.middle, g), bigon(t, h.middle, r, g), g)
    assert (glued.source, glued.target, glued.middle) == (p, r, h.middle)


def test_figure8_cut_signs_are_skew(fig8):
    t, g = fig8
    p, r = t.point(("p", 0)), t.point(("r", 2))
    q_u, q_s = cut(t, heart(t, p, r, g))
    assert {q_u.orbit, q_s.orbit} <= {"q", "b"}
    assert jump_sign(p, q_u) * jump_sign(q_u, r) == -jump_sign(p, q_s) * jump_sign(q_s, r)


def test_equal_grades_have_no_heart(fig8):
    t, g = fig8
    assert heart(t, t.point(("p", 0)), t.point(("pt", 0)), g) is None


def test_heart_through_fixed_point():
    t = fixture_tangle("heart11")
    g = resolve_grading(t)
    h = heart(t, t.point(("p", 0)), t.point(("r", 0)), g)
    assert h is not None and not h.globally_injective
    cuts = cut(t, h)
    assert any(is_fixed(c) for c in cuts)
    assert all(c.orbit != "p" and c.orbit != "r" for c in cuts)


def test_cut_window_exhausted():
    t = fixture_tangle("heart11")
    g = resolve_grading(t)
    h = heart(t, t.point(("p", 0)), t.point(("r", -3)), g)
    with pytest.raises(ModuliError, match="window too small"):
        cut(t, h)


def test_chaos_table_marks():
    t = fixture_tangle("chaos")
    z0 = next(m for m in t.marked if m.name == "z0")
    p0 = t.point(("p", 0))
    assert interior_contains(t, BigonCertificate(p0, t.point(("q", -1)), (), ()), z0)
    assert not interior_contains(t, BigonCertificate(p0, t.point(("q", 0)), (), ()), z0)


def test_chaos_table_survives_squaring():
    t2 = iterate(fixture_tangle("chaos"), 2)
    z0 = next(m for m in t2.marked if m.name == "z0")
    assert z0.period == 1
    assert any(interior_contains(t2, BigonCertificate(t2.point(a), t2.point(b), (), ()), z0)
               for a, b in z0.inside)


def test_marked_point_by_coordinates():
    t = lens()
    b = bigon(t, t.point(("p", 0)), fixed_point(t), resolve_grading(t))
    assert b is not None
    assert interior_contains(t, b, MarkedPoint("in", 1, coords=(2.0, 0.4)))
    assert not interior_contains(t, b, MarkedPoint("far", 1, coords=(50.0, 50.0)))
    with pytest.raises(ModuliError):
        interior_contains(t, b, MarkedPoint("edge", 1, coords=(1.0, 0.0)))
