import json
from fractions import Fraction

import pytest

from telic_lab.discretize import Counters
from telic_lab.dyadic import GridPoint, SpaceSpec, TieRule, grid_points, round_to_grid
from telic_lab.errors import ConfigError, ParseError, ResourceLimit, ValidationError
from telic_lab.systems import logistic, rotation, tent
from telic_lab.telic import (
    SeedFamily,
    TargetFamily,
    TelicInstance,
    Template,
    check_neighborhood_preservation,
    orbit_endpoint,
    seed_eval,
    target_distance,
    target_member,
)

UNIT = SpaceSpec.interval()
SQ = SpaceSpec.interval(0, 1)


def inst_for(targets, system=None, seeds=None, **kw):
    return TelicInstance(system or tent(), seeds or SeedFamily(), targets, **kw)


@pytest.mark.parametrize(
    "text,const,coef",
    [
        ("1/2", Fraction(1, 2), 0),
        ("1/2 + 2^-n", Fraction(1, 2), 1),
        ("3/4 - 3*2^-n", Fraction(3, 4), -3),
        ("2^-4", Fraction(1, 16), 0),
        ("-2^-n", 0, -1),
        ("1/3+2^-3-2^-n", Fraction(1, 3) + Fraction(1, 8), -1),
    ],
)
def test_template_grammar(text, const, coef):
    t = Template.parse(text)
    assert (t.const, t.coef) == (Fraction(const), Fraction(coef))
    assert Template.parse(str(t)) == t


@pytest.mark.parametrize("text", ["", "1/2 +", "x", "2^n", "3*1/2", "1/0"])
def test_template_rejects(text):
    with pytest.raises(ParseError):
        Template.parse(text)


def test_seed_eval_examples():
    inst = inst_for(TargetFamily.interval("0", "1"))
    assert seed_eval(inst, 3, (Fraction(5, 8),)) == GridPoint((5,), 3)
    sq = inst_for(TargetFamily.interval("0", "1"), seeds=SeedFamily("square"))
    assert seed_eval(sq, 2, (Fraction(1, 2),)) == GridPoint((4,), 4)
    aff = inst_for(TargetFamily.interval("0", "1"), seeds=SeedFamily("affine", a=("1/4",), b=("1/4",)))
    assert seed_eval(aff, 2, (Fraction(1),)) == GridPoint((2,), 2)


def test_seed_eval_with_map_wrapper():
    alpha = Fraction(1, 8)
    inst = TelicInstance(rotation(alpha), SeedFamily(), TargetFamily.interval("0", "1/2", ell=2), H="map")
    assert seed_eval(inst, 3, (2,)) == GridPoint((4,), 3)


def test_member_examples():
    fam = TargetFamily.interval("1/2", "3/4")
    inst = inst_for(fam)
    assert target_member(inst, 2, GridPoint((2,), 2))
    assert not target_member(inst, 2, GridPoint((1,), 2))
    pt = inst_for(TargetFamily.interval("5/16", "5/16"))
    assert target_member(pt, 3, GridPoint((2,), 3))
    assert not target_member(pt, 3, GridPoint((3,), 3))


def test_distance_examples():
    assert str(target_distance((Fraction(0),), [((Fraction(1, 2), Fraction(3, 4)),)], 2, UNIT)) == "1/2"
    box = ((Fraction(1, 2), Fraction(3, 4)), (Fraction(1, 2), Fraction(3, 4)))
    sq2 = SpaceSpec((UNIT.axes[0],) * 2)
    assert str(target_distance((0, 0), [box], 2, sq2)) == "sqrt(1/2)"
    rects = [((Fraction(1, 2), Fraction(3, 4)),), ((Fraction(0), Fraction(1, 16)),)]
    assert str(target_distance((Fraction(1, 4),), rects, 4, UNIT)) == "3/16"
    assert target_distance((Fraction(1, 4),), [], 4, UNIT).infinite


def _oracle_discretized(lo, hi, v, space, tie):
    """Round every fine grid point of [lo, hi] (and both endpoints)."""
    fine = v + 4
    pts = {lo, hi}
    pts |= {g.values()[0] for g in grid_points(space, fine) if lo <= g.values()[0] <= hi}
    return {round_to_grid((p,), space, v, tie).coords[0] for p in pts if space.contains((p,))}


@pytest.mark.parametrize("space_name", ["unit", "circle"])
def test_membership_matches_rounding_oracle(space_name):
    space = UNIT if space_name == "unit" else SpaceSpec.circle()
    system = tent() if space_name == "unit" else rotation(Fraction(1, 3))
    endpoints = [Fraction(k, 24) for k in range(0, 25)]
    for v in range(1, 7):
        for i, lo in enumerate(endpoints[::3]):
            for hi in endpoints[::5]:
                if hi < lo:
                    continue
                inst = TelicInstance(system, SeedFamily(), TargetFamily.interval(str(lo), str(hi)))
                want = _oracle_discretized(lo, hi, v, space, inst.home_tie)
                got = {g.coords[0] for g in grid_points(space, v) if target_member(inst, v, g)}
                assert got == want, (lo, hi, v)
                for g in grid_points(space, v):
                    d = target_distance(g.values(), inst.targets.rects_at(v), v, space)
                    assert (d.sq == 0) == (g.coords[0] in want)


@pytest.mark.parametrize(
    "fam",
    [SeedFamily(), SeedFamily("square"), SeedFamily("affine", a=("1/2",), b=("1/4",)), SeedFamily("affine", a=("-1",), b=("1",))],
    ids=["identity", "square", "affine", "reversed"],
)
def test_shipped_families_preserve_neighborhoods(fam):
    for n in range(1, 11):
        assert check_neighborhood_preservation(fam, n).ok


def test_two_dim_families():
    fam = SeedFamily("affine", d=2, a=("1/2", "-1/2"), b=("0", "1"))
    for n in range(1, 8):
        assert check_neighborhood_preservation(fam, n).ok
    for n in range(1, 8):
        assert check_neighborhood_preservation(SeedFamily(d=2), n).ok


def test_scrambled_table_fails():
    table = {1: {(Fraction(0),): (Fraction(3, 4),), (Fraction(1, 2),): (Fraction(0),), (Fraction(1),): (Fraction(1, 4),)}}
    rep = check_neighborhood_preservation(SeedFamily("table", table=table), 1)
    assert not rep.ok


def test_neighborhood_cap():
    with pytest.raises(ResourceLimit):
        check_neighborhood_preservation(SeedFamily(d=3), 8)


def test_instance_validation():
    with pytest.raises(ValidationError, match="∅"):
        inst_for(TargetFamily.interval("3/2", "2"))
    with pytest.raises(ValidationError):
        inst_for(TargetFamily.interval("0", "1"), C=0)
    with pytest.raises(ConfigError):
        inst_for(TargetFamily.interval("0", "1", ell=1), H="map")
    with pytest.raises(ValidationError):
        inst_for(TargetFamily.interval("0", "1"), seeds=SeedFamily(d=2))
    with pytest.raises(ValidationError):
        inst_for(TargetFamily.interval("0", "1"), seeds=SeedFamily("affine", a=("2",), b=("0",)))


def test_precision_multiplier():
    inst = inst_for(TargetFamily.interval("0", "1"), C=3)
    assert [inst.v(n) for n in (1, 2, 5)] == [3, 6, 15]


def test_instance_json_round_trip():
    inst = TelicInstance(logistic(4), SeedFamily("square"), TargetFamily.interval("1/3", "1/3 + 2^-n"), C=2, name="x")
    obj = json.loads(json.dumps(inst.to_json()))
    assert obj["H"] == "identity" and obj["C"] == 2
    assert TargetFamily.from_json(obj["targets"]) == inst.targets
    assert SeedFamily.from_json(obj["seeds"]) == SeedFamily("square")


def test_doubling_precision_keeps_robust_yes():
    # endpoint strictly inside B^(n) stays a member when C doubles
    from telic_lab.solvers import brute_force_decide, verify_certificate

    for lo in ("1/8", "1/3", "5/8"):
        fam = TargetFamily.interval(lo, f"{lo} + 8*2^-n")
        a = TelicInstance(rotation(Fraction(3, 8)), SeedFamily(), fam, C=1)
        b = TelicInstance(rotation(Fraction(3, 8)), SeedFamily(), fam, C=2)
        for n in range(4, 9):
            d = brute_force_decide(a, n)
            if not d.yes:
                continue
            s = d.witness[0]
            x = Fraction(s, 1 << n) + n * Fraction(3, 8)
            x -= int(x)
            lo_v, hi_v = fam.rects_at(n)[0][0]
            if lo_v + Fraction(1, 1 << n) < x < hi_v - Fraction(1, 1 << n):
                assert verify_certificate(b, n, d.witness)


def test_counters_track_work():
    inst = inst_for(TargetFamily.interval("1/2", "1"))
    c = Counters()
    g = seed_eval(inst, 4, (3,), c)
    end = orbit_endpoint(inst, 4, g, c)
    target_member(inst, 4, end, c)
    assert (c.seed_evals, c.orbits, c.map_steps, c.membership_checks) == (1, 1, 4, 1)


def test_tie_rule_default_is_lower():
    assert inst_for(TargetFamily.interval("0", "1")).tie == TieRule()
