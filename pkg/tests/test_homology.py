from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import TANGLES, fixture_tangle
from oracles import betti, check_snf, invariant_factors
from tanglefloer.chain import homology, quotient_boundary
from tanglefloer.homology import (
    AbelianGroup, Laurent, Poly, cohomology_of, exp_series, homology_from_matrices, rank_growth_check,
    rank_mod2, smith_normal_form, zeta_sequence,
)
from tanglefloer.tangle import invert


def as_text(groups):
    return {k: str(v) for k, v in groups.items() if not v.is_zero}


def test_snf_identity():
    assert smith_normal_form([[1, 0], [0, 1]]).D == [[1, 0], [0, 1]]


def test_snf_small():
    A = [[2, 4], [6, 8]]
    r = smith_normal_form(A)
    assert r.D == [[2, 0], [0, 4]]
    assert check_snf(A, r) == invariant_factors(A)


def test_snf_zero():
    assert smith_normal_form([[0, 0, 0], [0, 0, 0]]).invariant_factors == []


matrices = st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_snf_agrees_with_determinantal_divisors(A):
    assert check_snf(A, smith_normal_form(A)) == invariant_factors(A)


def test_torsion_is_reported():
    groups = homology_from_matrices({0: 1, 1: 1}, {1: [[2]]})
    assert groups[0] == AbelianGroup(0, (2,))
    assert str(groups[0]) == "Z/2"


def test_mod_two_ring():
    groups = homology_from_matrices({0: 1, 1: 1}, {1: [[2]]}, "Z2")
    assert groups[0].free_rank == groups[1].free_rank == 1
    assert rank_mod2([[1, 1], [1, 1]]) == 1


def test_laurent_torsion():
    groups = homology_from_matrices({0: 1, 1: 1}, {1: [[Laurent({1: 1, 0: -1})]]}, "LaurentQ")
    assert groups[0].torsion == ("T - 1",)
    assert groups[1].is_zero


def test_laurent_arithmetic():
    a = Laurent({0: 1, -1: -1})
    assert a * Laurent.monomial(1, 1) == Laurent({1: 1, 0: -1})
    assert a.at_one() == 0
    assert str(Poly.from_laurent(a, 1)) == "T - 1"


def test_exp_series():
    # exp(sum z^n / n) = 1 / (1 - z)
    assert exp_series([1, 1, 1, 1], 4) == [Fraction(1)] * 5
    assert exp_series([0, 0, 0], 3) == [1, 0, 0, 0]


@pytest.mark.parametrize("signs", ["m", "u_plus"])
def test_figure8_homology(signs):
    assert as_text(homology(fixture_tangle("figure8"), signs=signs)) == {-1: "Z", -2: "Z^2", -3: "Z"}


@pytest.mark.parametrize("signs", ["m", "u_plus"])
def test_tilted_homology(signs):
    assert as_text(homology(fixture_tangle("tilted"), signs=signs)) == {2: "Z", 1: "Z", -1: "Z", -2: "Z"}


@pytest.mark.parametrize("name", TANGLES)
def test_homology_matches_rational_ranks(name):
    c = quotient_boundary(fixture_tangle(name))
    free = {k: g.free_rank for k, g in c.homology().items()}
    assert free == betti(c.dims, c.boundaries)


def test_henon_equivariant_homology():
    from tanglefloer.chain import equivariant_boundary
    h = equivariant_boundary(fixture_tangle("henon_pair")).homology()
    assert h[-1].is_zero
    assert h[-2].free_rank == 0 and len(h[-2].torsion) == 1


def test_cohomology_of_figure8_matches_inverse():
    t = fixture_tangle("figure8")
    co = cohomology_of(t)
    inv = homology(invert(t))
    assert co[-1] == inv[1]
    assert as_text(co) == {-1: "Z", -2: "Z^2", -3: "Z"}


def test_cohomology_of_tilted():
    co = cohomology_of(fixture_tangle("tilted"))
    assert str(co[2]) == "Z"
    assert str(homology(invert(fixture_tangle("tilted")))[-2]) == "Z"


def test_cohomology_of_empty():
    assert as_text(cohomology_of(fixture_tangle("empty"))) == {}


def test_zeta_of_chaos():
    chi, series = zeta_sequence(fixture_tangle("chaos"), 3)
    assert chi == [0, 0, 0]
    assert series == [1, 0, 0, 0]


def test_zeta_without_marks_is_plain_euler_characteristic():
    t = fixture_tangle("figure8")
    chi, _ = zeta_sequence(t, 2)
    for n, x in enumerate(chi, 1):
        groups = homology(t, n=n)
        assert x == sum((-1) ** (k % 2) * g.free_rank for k, g in groups.items())


def test_zeta_empty_request():
    assert zeta_sequence(fixture_tangle("chaos"), 0) == ([], [])


def test_rank_growth_henon():
    r = rank_growth_check(fixture_tangle("henon_pair"), 3)
    assert r.ok
    assert (r.base[-1], r.base[-2]) == (1, 1) == (r.power[-1], r.power[-2])


def test_rank_growth_semi_primary_bad_flip():
    t = fixture_tangle("badflip_post")
    for n in (1, 2, 3):
        r = rank_growth_check(t, n, "semi_primary")
        assert r.ok
        assert r.base[-1] == 1 and r.power[-1] == n


def test_rank_growth_trivial_power():
    r = rank_growth_check(fixture_tangle("figure8"), 1)
    assert r.ok and r.base == r.power
