"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line in ``RESULTS``; the lines are
printed in the terminal summary (see ``conftest.py``) and when this file is
run as a script.
"""

import math
import random
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from telic_lab.algebraic import QuadraticIrrational
from telic_lab.discretize import Counters, discretize_orbit
from telic_lab.dyadic import grid_points, round_to_grid
from telic_lab.entropy import entropy_estimate, exact_max_separated, greedy_separated_set, orbit_table
from telic_lab.reductions import check_reduction, conjugate_instance, logistic_quadratic
from telic_lab.solvers import brute_force_decide, kary_search, pullback_decide, verify_certificate, auto_decide
from telic_lab.systems import affine_quadratic, doubling, lipschitz_bound, logistic, map_exact, rotation, step_exact, tent
from telic_lab.telic import SeedFamily, TargetFamily, TelicInstance, grid_in_rect, rect_grid, seed_grid

RESULTS = {}
SQRT2_M1 = QuadraticIrrational(-1, 1, 1, 2)


def record(key, ok, detail, t0):
    RESULTS[key] = f"[{'PASS' if ok else 'FAIL'}] {key}: {detail} ({time.perf_counter() - t0:.1f}s)"
    assert ok, RESULTS[key]


# 1 -------------------------------------------------------------------------


def _oracle_orbit(spec, x, k, prec):
    with mpmath.workprec(prec):
        if spec.kind == "rotation" and isinstance(spec.alpha, QuadraticIrrational):
            a = spec.alpha
            alpha = (a.a + a.b * mpmath.sqrt(a.D)) / a.c
        z = mpmath.mpf(x.numerator) / x.denominator
        for _ in range(k):
            if spec.kind == "doubling":
                z = (2 * z) % 1
            elif spec.kind == "tent":
                z = 2 * z if 2 * z <= 1 else 2 * (1 - z)
            elif spec.kind == "logistic":
                z = mpmath.mpf(spec.lam.numerator) / spec.lam.denominator * z * (1 - z)
            elif spec.kind == "affine_quadratic":
                z = z * z + mpmath.mpf(spec.c.numerator) / spec.c.denominator
            else:
                z = (z + alpha) % 1
        return z


def test_criterion_1_discretizer_correctness():
    t0 = time.perf_counter()
    catalog = [doubling(), tent(), logistic(4), rotation(Fraction(1, 3)), rotation(Fraction(5, 8)), rotation(SQRT2_M1), affine_quadratic()]
    checked, bad = 0, []
    for spec in catalog:
        lg = math.ceil(math.log2(max(lipschitz_bound(spec).to_fraction(), 2)))
        bit_exact = spec.kind in ("doubling", "tent") or (spec.kind == "rotation" and isinstance(spec.alpha, Fraction))
        circle = spec.kind in ("doubling", "rotation")
        for r in range(0, 7):
            for g in grid_points(spec.space, r):
                x = g.values()[0]
                for k in range(0, 11):
                    out, _ = discretize_orbit(spec, g, k, r)
                    checked += 1
                    if bit_exact:
                        z = x
                        for _ in range(k):
                            z = map_exact(spec, z)
                        if out != round_to_grid((z,), spec.space, r):
                            bad.append((spec.id, str(g), k))
                        continue
                    prec = 4 * (r + k * lg) + 32
                    z = _oracle_orbit(spec, x, k, prec)
                    with mpmath.workprec(prec):
                        d = abs(mpmath.mpf(out.coords[0]) / (1 << r) - z)
                        if circle:
                            d = min(d, 1 - d)
                        if d > mpmath.mpf(2) ** -r:
                            bad.append((spec.id, str(g), k))
    record("C1 discretizer correctness", not bad, f"{checked} orbits checked, {len(bad)} outside tolerance {bad[:3]}", t0)


# 2 -------------------------------------------------------------------------


def test_criterion_2_dyadic_preservation():
    t0 = time.perf_counter()
    checked, bad = 0, 0
    for spec in (tent(), doubling()):
        for r in range(0, 13):
            top = (1 << r) + (1 if spec.kind == "tent" else 0)
            for m in range(top):
                y = step_exact(spec, (Fraction(m, 1 << r),))[0]
                checked += 1
                bad += (y * (1 << r)).denominator != 1 or not spec.space.contains((y,))
    record("C2 exact dyadic preservation", bad == 0, f"{checked} grid points, {bad} leave the grid", t0)


# 3 -------------------------------------------------------------------------


def rotation_instances(count, seed=2024):
    rng = random.Random(seed)
    fams = [SeedFamily(), SeedFamily("square"), SeedFamily("affine", a=("1/2",), b=("1/4",)), SeedFamily("affine", a=("-1",), b=("1",))]
    out = []
    for i in range(count):
        q = rng.choice([2, 3, 4, 5, 6, 7, 8, 9, 12, 16])
        alpha = Fraction(rng.randrange(1, q), q)
        lo = Fraction(rng.randrange(0, 60), rng.choice([60, 64]))
        width = rng.choice(["0", "2^-n", "3*2^-n", "1/64", "2^-n + 1/100"])
        out.append(
            TelicInstance(
                rotation(alpha),
                rng.choice(fams),
                TargetFamily.interval(str(lo), f"{lo} + {width}"),
                C=rng.choice([1, 1, 2]),
                name=f"rot{i}",
            )
        )
    return out


def test_criterion_3_solver_agreement():
    t0 = time.perf_counter()
    cells, bad = 0, []
    yes = 0
    for inst in rotation_instances(50):
        for n in range(1, 15):
            b, p = brute_force_decide(inst, n), pullback_decide(inst, n)
            cells += 1
            yes += b.yes
            ok = b.answer == p.answer
            if b.yes:
                ok &= verify_certificate(inst, n, b.witness) and verify_certificate(inst, n, p.witness)
            if not ok:
                bad.append((inst.name, n, str(b), str(p)))
    record("C3 solver agreement", not bad, f"50 instances x n=1..14: {cells} cells ({yes} YES), {len(bad)} disagreements {bad[:2]}", t0)


# 4 -------------------------------------------------------------------------

MONOTONE_FAMILIES = {
    "identity": SeedFamily(),
    "square": SeedFamily("square"),
    "affine": SeedFamily("affine", a=("1/2",), b=("1/4",)),
    "reversed": SeedFamily("affine", a=("-1",), b=("1",)),
    "identity2d": SeedFamily(d=2),
    "affine2d": SeedFamily("affine", d=2, a=("-1/2", "3/4"), b=("1/2", "1/8")),
}


def _scan(fam, n, A, r):
    """Every seed index whose image lies in ``D_r(A)``."""
    N = 1 << n
    rgs = [rect_grid(fam.space, rect, r) for rect in A]
    hits = set()
    for idx in seed_grid(fam.d, n):
        e = fam.eval(n, tuple(Fraction(i, N) for i in idx), unwrapped=True, r=r)
        if e is not None and any(grid_in_rect(fam.space, e, rg, r) for rg in rgs):
            hits.add(idx)
    return hits


def _scan_identity(n, A, r):
    # closed form for identity seeds: index i has image D_r(i / 2^n) = i << (r - n)
    rgs = [rect_grid(MONOTONE_FAMILIES["identity"].space, rect, r) for rect in A]
    idx = np.arange(1 << n, dtype=np.int64) << (r - n)
    mask = np.zeros(idx.shape, dtype=bool)
    for rg in rgs:
        if rg is not None:
            lo, hi = rg[0]
            mask |= (idx >= lo) & (idx <= hi)
    return {(int(i),) for i in np.nonzero(mask)[0]}


def test_criterion_4_kary_vs_brute():
    t0 = time.perf_counter()
    rng = random.Random(77)
    targets = []
    for _ in range(100):
        rect = []
        for _ in range(2):
            a = Fraction(rng.randrange(0, 1000), 1000)
            w = Fraction(rng.choice([0, 1, 3, 10, 40, 200]), 1000)
            rect.append((a, min(Fraction(1), a + w)))
        targets.append(rect)
    unsound, incomplete, greedy_misses, runs = 0, 0, 0, 0
    for name, fam in MONOTONE_FAMILIES.items():
        for t, rect in enumerate(targets):
            n = 1 + (t % (16 // fam.d))
            r = fam.r(n)
            A = [tuple(rect[: fam.d])]
            hits = _scan_identity(n, A, r) if name == "identity" else _scan(fam, n, A, r)
            got = kary_search(fam, n, A, r)
            greedy = kary_search(fam, n, A, r, backtrack=False)
            runs += 1
            if got is not None and got not in hits:
                unsound += 1
            if greedy is not None and greedy not in hits:
                unsound += 1
            if got is None and hits:
                incomplete += 1
            if greedy is None and hits:
                greedy_misses += 1
    ok = unsound == 0 and incomplete == 0
    detail = (
        f"{runs} searches over {len(MONOTONE_FAMILIES)} families, d*n<=16: {unsound} unsound, "
        f"{incomplete} incomplete (pure greedy descent without backtracking misses {greedy_misses})"
    )
    record("C4 k-ary vs brute force", ok, detail, t0)


# 5 -------------------------------------------------------------------------


def logistic_instances():
    targets = [
        ("1/3", "1/3 + 2^-n"),
        ("3/4", "3/4"),
        ("1/5", "1/5"),
        ("2/3", "2/3 + 2^-n"),
        ("1/2", "1/2 + 2^-n"),
        ("5/8", "5/8"),
        ("1/10", "1/10 + 2*2^-n"),
        ("7/8", "1"),
        ("2/5", "9/20"),
        ("1/7", "1/7 + 2^-n"),
    ]
    out = []
    for lo, hi in targets:
        for fam in (SeedFamily(), SeedFamily("square")):
            out.append(TelicInstance(logistic(4), fam, TargetFamily.interval(lo, hi), name=f"[{lo},{hi}]/{fam.kind}"))
    return out


def test_criterion_5_conjugacy_preservation():
    t0 = time.perf_counter()
    phi = logistic_quadratic()
    bad, yes, no = [], 0, 0
    insts = logistic_instances()
    for inst in insts:
        rep = check_reduction(inst, conjugate_instance(inst, phi), 10)
        yes += rep.answers().count("YES")
        no += rep.answers().count("NO")
        if not rep.ok:
            bad.append((inst.name, rep.disagreements))
    detail = f"{len(insts)} logistic instances x n=1..10 ({yes} YES, {no} NO): {len(bad)} with differing answers {bad[:2]}"
    record("C5 conjugacy preservation", not bad, detail, t0)


# 6 -------------------------------------------------------------------------


def test_criterion_6_entropy_targets():
    t0 = time.perf_counter()
    eps, ns, r = Fraction(1, 16), range(2, 11), 16
    parts, ok = [], True
    for spec in (tent(), doubling()):
        rep = entropy_estimate(spec, ns, eps, r)
        tail = rep.tail_ratios()
        good = all(1.8 <= q <= 2.2 for q in tail)
        ok &= good
        parts.append(f"{spec.id} tail ratios {min(tail):.3f}..{max(tail):.3f} slope {rep.slope_tail:.3f}")
    for alpha in (Fraction(1, 3), Fraction(3, 8), SQRT2_M1):
        rep = entropy_estimate(rotation(alpha), ns, eps, r)
        flat = len(set(rep.counts)) == 1
        ok &= flat
        parts.append(f"rotation({alpha}) counts {rep.counts[0]} constant={flat}")
    record("C6 entropy targets", ok, "; ".join(parts), t0)


# 7 -------------------------------------------------------------------------


def test_criterion_7_complexity_growth():
    t0 = time.perf_counter()
    tent_no = TelicInstance(tent(), SeedFamily("square"), TargetFamily.interval("1/3", "1/3"), C=2)
    counts = []
    for n in range(6, 17):
        c = Counters()
        d = brute_force_decide(tent_no, n, counters=c)
        assert not d.yes
        counts.append(c.orbits)
    ratios = [b / a for a, b in zip(counts, counts[1:])]
    brute_ok = all(1.9 <= q <= 2.1 for q in ratios)
    rots = rotation_instances(10, seed=5)
    worst = 0.0
    ns = range(4, 17)
    for inst in rots:
        for n in ns:
            c = Counters()
            pullback_decide(inst, n, counters=c)
            worst = max(worst, c.map_steps / n**3)
    cubic_ok = worst <= 4
    detail = f"brute orbit ratios {min(ratios):.3f}..{max(ratios):.3f}; pullback max map_steps/n^3 = {worst:.3f} (c = 4)"
    record("C7 complexity growth", brute_ok and cubic_ok, detail, t0)


# 8 -------------------------------------------------------------------------


def test_criterion_8_np_verifier():
    t0 = time.perf_counter()
    failures, yes = 0, 0
    battery = rotation_instances(20, seed=9) + logistic_instances()[:6]
    battery.append(TelicInstance(tent(), SeedFamily(), TargetFamily.interval("0", "1/4")))
    for inst in battery:
        top = 20 if inst.system.kind == "rotation" else 10
        for n in range(4, top + 1):
            d = auto_decide(inst, n)
            if d.yes:
                yes += 1
                failures += not verify_certificate(inst, n, d.witness)
    work = {}
    rng = random.Random(1)
    for inst in battery:
        for n in range(4, 21):
            c = Counters()
            s = tuple(rng.randrange(0, 1 << n) for _ in range(inst.d))
            verify_certificate(inst, n, s, c)
            total = c.orbits + c.map_steps + c.membership_checks + c.seed_evals
            work[n] = max(work.get(n, 0), total)
    ratio = max(w / n**3 for n, w in work.items())
    xs = np.log([n for n in sorted(work)])
    ys = np.log([work[n] for n in sorted(work)])
    slope = float(np.polyfit(xs, ys, 1)[0])
    ok = failures == 0 and ratio <= 1 and slope <= 3
    detail = f"{yes} YES decisions, {failures} failed verification; verifier ops <= {ratio:.3f}*n^3, log-log slope {slope:.2f}"
    record("C8 NP verifier", ok, detail, t0)


# 9 -------------------------------------------------------------------------


def test_criterion_9_separated_set_sandwich():
    t0 = time.perf_counter()
    cases = [(tent(), 5), (doubling(), 6), (logistic(4), 5), (rotation(Fraction(1, 3)), 6), (rotation(SQRT2_M1), 6), (affine_quadratic(), 3)]
    checked, bad = 0, []
    for spec, r in cases:
        tab = orbit_table(spec, 6, r)
        assert tab.points <= 64
        for n in range(1, 7):
            for eps in (Fraction(1, 16), Fraction(1, 8), Fraction(3, 16), Fraction(1, 4), Fraction(1, 2)):
                g = len(greedy_separated_set(spec, n, eps, r, table=tab))
                hi = exact_max_separated(spec, n, eps, r, table=tab)
                lo = exact_max_separated(spec, n, 2 * eps, r, table=tab)
                checked += 1
                if not lo <= g <= hi:
                    bad.append((spec.id, n, str(eps), lo, g, hi))
    record("C9 separated-set sandwich", not bad, f"{checked} (system, n, eps) cases on grids <= 64 points, {len(bad)} violations {bad[:2]}", t0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
