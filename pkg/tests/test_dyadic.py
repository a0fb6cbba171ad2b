import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telic_lab.dyadic import (
    Dyadic,
    GridPoint,
    SpaceSpec,
    TieRule,
    distance_sq,
    grid_neighbors,
    grid_points,
    round_to_grid,
)
from telic_lab.errors import DomainError, ParseError

big = st.integers(min_value=-(1 << 511), max_value=(1 << 511))
dyadics = st.builds(Dyadic, big, st.integers(min_value=0, max_value=600))


@settings(max_examples=200)
@given(dyadics, dyadics, dyadics)
def test_ring_laws(a, b, c):
    assert (a + b) - b == a
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert -(-a) == a
    assert abs(a) >= 0


@given(dyadics, dyadics)
def test_arithmetic_matches_fractions(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a - b).to_fraction() == fa - fb
    assert (a * b).to_fraction() == fa * fb
    assert (a < b) == (fa < fb)


@given(big, st.integers(min_value=0, max_value=300))
def test_canonical_form(m, q):
    d = Dyadic(m, q)
    assert d.exponent == 0 or d.mantissa % 2 == 1
    assert d == Dyadic.from_value(d.to_fraction())
    assert hash(d) == hash(Dyadic.from_value(d.to_fraction()))


def test_text_round_trip():
    d = Dyadic(12, 5)
    assert str(d) == "3/2^3"
    assert Dyadic.parse("3/2^3") == d
    assert Dyadic.parse("-7") == Dyadic(-7)
    with pytest.raises(ParseError):
        Dyadic.parse("1/3")


def test_grid_point_text():
    g = GridPoint((3, 1), 4)
    assert str(g) == "(3,1)@4"
    assert GridPoint.parse("(3,1)@4") == g
    with pytest.raises(ParseError):
        GridPoint.parse("3@4")


def test_grid_point_dyadic_round_trip():
    g = GridPoint((5, 12), 4)
    back = round_to_grid(g.to_dyadic().values(), SpaceSpec.circle(2), 4)
    assert back == g


@pytest.mark.parametrize(
    "x,space,r,expected",
    [
        ((Fraction(5, 16),), SpaceSpec.interval(), 2, (1,)),
        ((Fraction(3, 8),), SpaceSpec.interval(), 2, (1,)),
        ((Fraction(3, 8), Fraction(7, 8)), SpaceSpec.circle(2), 1, (1, 0)),
    ],
)
def test_rounding_examples(x, space, r, expected):
    assert round_to_grid(x, space, r).coords == expected


def test_rounding_outside_interval():
    with pytest.raises(DomainError):
        round_to_grid((Fraction(5, 4),), SpaceSpec.interval(), 3)


def test_prefer_upper_flips_ties():
    up = TieRule(prefer_upper=True)
    assert round_to_grid((Fraction(3, 8),), SpaceSpec.interval(), 2, up).coords == (2,)
    assert round_to_grid((Fraction(3, 4),), SpaceSpec.circle(), 1, up).coords == (1,)
    assert round_to_grid((Fraction(3, 4),), SpaceSpec.circle(), 1).coords == (0,)


def test_circle_origin_moves_tie():
    # seen from origin 1/4, the value 1/2 wraps below 0
    tie = TieRule(circle_origin=Fraction(1, 4))
    assert round_to_grid((Fraction(1, 4),), SpaceSpec.circle(), 1).coords == (0,)
    assert round_to_grid((Fraction(1, 4),), SpaceSpec.circle(), 1, tie).coords == (1,)
    assert round_to_grid((Fraction(3, 4),), SpaceSpec.circle(), 1, tie).coords == (1,)


def _oracle_nearest(space, x, r):
    pts = list(grid_points(space, r))
    best = min(distance_sq(space, p.values(), x) for p in pts)
    return best, [p for p in pts if distance_sq(space, p.values(), x) == best]


SPACES = [SpaceSpec.interval(), SpaceSpec.interval(-2, 2), SpaceSpec.circle(), SpaceSpec.circle(2)]


@pytest.mark.parametrize("space", SPACES, ids=["unit", "wide", "circle", "torus"])
def test_rounding_nearest_exhaustive(space):
    rmax = 3 if space.dim == 2 else 6
    for r in range(0, rmax + 1):
        fine = list(grid_points(space, r + 2))
        for g in fine:
            x = g.values()
            got = round_to_grid(x, space, r)
            best, ties = _oracle_nearest(space, x, r)
            assert distance_sq(space, got.values(), x) == best
            assert got in ties
            if len(ties) > 1 and space.dim == 1 and space.axes[0].__class__.__name__ == "Interval":
                assert got == min(ties, key=lambda p: p.coords)
            assert best <= Fraction(space.dim, 4 ** (r + 1))


@pytest.mark.parametrize("space", SPACES, ids=["unit", "wide", "circle", "torus"])
def test_rounding_idempotent_and_refining(space):
    for r in range(0, 5):
        for g in grid_points(space, r):
            assert round_to_grid(g.values(), space, r) == g
    for g in grid_points(space, 6 if space.dim == 1 else 4):
        x = g.values()
        errs = [distance_sq(space, round_to_grid(x, space, r).values(), x) for r in range(0, 6)]
        assert all(b <= a for a, b in itertools.pairwise(errs))


def test_neighbors():
    unit, circ = SpaceSpec.interval(), SpaceSpec.circle()
    assert grid_neighbors(GridPoint((0,), 2), unit) == {GridPoint((1,), 2)}
    assert grid_neighbors(GridPoint((2,), 2), circ) == {GridPoint((1,), 2), GridPoint((3,), 2)}
    assert grid_neighbors(GridPoint((0,), 2), circ) == {GridPoint((3,), 2), GridPoint((1,), 2)}
    assert len(grid_neighbors(GridPoint((0, 0), 3), SpaceSpec.circle(2))) == 4
