import random
from fractions import Fraction

import pytest

from telic_lab.algebraic import QuadraticIrrational
from telic_lab.discretize import Counters
from telic_lab.errors import NotApplicable, ResourceLimit
from telic_lab.solvers import auto_decide, brute_force_decide, kary_search, pullback_decide, verify_certificate
from telic_lab.systems import rotation, tent
from telic_lab.telic import SeedFamily, TargetFamily, TelicInstance, seed_grid

TENT = TelicInstance(tent(), SeedFamily(), TargetFamily.interval("0", "1/4"))
ROT = TelicInstance(rotation(Fraction(1, 4)), SeedFamily(), TargetFamily.interval("0", "1/8"))


def test_brute_examples():
    d = brute_force_decide(TENT, 2)
    assert d.yes and d.witness == (0,)
    assert str(d) == "YES witness=(0)@2"
    d = brute_force_decide(ROT, 3)
    assert d.yes and d.witness == (2,)


def test_all_bottom_is_no():
    fam = SeedFamily(bottom_gt=Fraction(-1))
    inst = TelicInstance(tent(), fam, TargetFamily.interval("0", "1"))
    assert brute_force_decide(inst, 3).answer == "NO"


def test_verify_examples():
    assert verify_certificate(TENT, 2, (Fraction(1, 2),))
    assert not verify_certificate(ROT, 3, (Fraction(1, 2),))


def test_enumeration_cap():
    with pytest.raises(ResourceLimit):
        brute_force_decide(TENT, 30)


def test_witness_minimality_under_permutation():
    rng = random.Random(3)
    inst = TelicInstance(rotation(Fraction(3, 7)), SeedFamily(), TargetFamily.interval("1/5", "1/5 + 4*2^-n"))
    for n in range(2, 8):
        d = brute_force_decide(inst, n)
        order = list(seed_grid(1, n))
        rng.shuffle(order)
        assert brute_force_decide(inst, n, order=order).witness == d.witness


def _brute_kary(fam, n, A, r):
    N = 1 << n
    space = fam.space
    from telic_lab.telic import grid_in_rect, rect_grid

    rgs = [rect_grid(space, rect, r) for rect in A]
    for idx in seed_grid(fam.d, n):
        e = fam.eval(n, tuple(Fraction(i, N) for i in idx), unwrapped=True, r=r)
        if e is not None and any(grid_in_rect(space, e, rg, r) for rg in rgs):
            return idx
    return None


def _brute_kary_member(fam, n, A, r, idx):
    from telic_lab.telic import grid_in_rect, rect_grid

    e = fam.eval(n, tuple(Fraction(i, 1 << n) for i in idx), unwrapped=True, r=r)
    return e is not None and any(grid_in_rect(fam.space, e, rect_grid(fam.space, a, r), r) for a in A)


def test_kary_examples():
    A = [((Fraction(5, 8), Fraction(3, 4)),)]
    assert kary_search(SeedFamily(), 4, A, 4) == (10,)
    sq = SeedFamily("square")
    assert kary_search(sq, 4, [((Fraction(1, 4), Fraction(1, 4)),)], 8) == (8,)
    # D_4(3/7) = 7/16, and seed 7/16 lands exactly there
    got = kary_search(SeedFamily(), 4, [((Fraction(3, 7), Fraction(3, 7)),)], 4)
    assert got == _brute_kary(SeedFamily(), 4, [((Fraction(3, 7), Fraction(3, 7)),)], 4) == (7,)


@pytest.mark.parametrize(
    "fam",
    [SeedFamily(), SeedFamily("square"), SeedFamily("affine", a=("-1/2",), b=("3/4",)), SeedFamily(d=2)],
    ids=["identity", "square", "affine", "identity2"],
)
def test_kary_agrees_with_scan(fam):
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(1, 8 // fam.d)
        r = fam.r(n)
        rect = []
        for _ in range(fam.d):
            a = Fraction(rng.randrange(0, 97), 96)
            b = min(Fraction(1), a + Fraction(rng.randrange(0, 20), 96))
            rect.append((a, b))
        A = [tuple(rect)]
        got = kary_search(fam, n, A, r)
        want = _brute_kary(fam, n, A, r)
        assert (got is None) == (want is None)
        if got is not None:
            assert _brute_kary_member(fam, n, A, r, got)


def test_greedy_descent_is_sound():
    rng = random.Random(5)
    fam = SeedFamily("square")
    for _ in range(60):
        a = Fraction(rng.randrange(0, 64), 64)
        A = [((a, a + Fraction(1, 32)),)]
        got = kary_search(fam, 5, A, 10, backtrack=False)
        if got is not None:
            assert _brute_kary_member(fam, 5, A, 10, got)


def test_pullback_examples():
    d = pullback_decide(ROT, 3)
    assert d.yes and verify_certificate(ROT, 3, d.witness)
    third = TelicInstance(rotation(Fraction(1, 3)), SeedFamily(), TargetFamily.interval("7/16", "7/16 + 2^-n"))
    assert pullback_decide(third, 4).answer == brute_force_decide(third, 4).answer
    with pytest.raises(NotApplicable):
        pullback_decide(TENT, 3)


def test_auto_falls_back():
    assert auto_decide(TENT, 2).solver == "brute"
    assert auto_decide(ROT, 3).solver == "pullback"


@pytest.mark.parametrize("alpha", [Fraction(1, 3), Fraction(5, 12), Fraction(3, 8), QuadraticIrrational(-1, 1, 1, 2)], ids=str)
def test_pullback_matches_brute(alpha):
    rng = random.Random(7)
    for _ in range(6):
        lo = Fraction(rng.randrange(0, 32), 32)
        fam = rng.choice([SeedFamily(), SeedFamily("square"), SeedFamily("affine", a=("-1",), b=("1",))])
        inst = TelicInstance(rotation(alpha), fam, TargetFamily.interval(str(lo), f"{lo} + 2^-n"), C=rng.choice([1, 2]))
        for n in range(1, 10):
            b, p = brute_force_decide(inst, n), pullback_decide(inst, n)
            assert b.answer == p.answer
            if p.yes:
                assert verify_certificate(inst, n, p.witness)


def test_pullback_polynomial_work():
    inst = TelicInstance(rotation(Fraction(2, 7)), SeedFamily(), TargetFamily.interval("1/3", "1/3 + 2^-n"))
    for n in (4, 8, 12, 16):
        c = Counters()
        pullback_decide(inst, n, counters=c)
        assert c.map_steps <= 8 * n**3
