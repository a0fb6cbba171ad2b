"""Deciders for telic instances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .algebraic import QuadraticIrrational
from .dyadic import LOWER, Circle, GridPoint, TieRule, pow2
from .discretize import Counters, discretize_orbit
from .errors import NotApplicable, ResourceLimit
from .telic import (
    SeedFamily,
    TelicInstance,
    grid_in_rect,
    orbit_endpoint,
    rect_grid,
    seed_eval,
    seed_grid,
    target_distance,
    target_member,
)

__all__ = [
    "Decision",
    "brute_force_decide",
    "verify_certificate",
    "kary_search",
    "pullback_decide",
    "auto_decide",
    "SOLVERS",
    "DEFAULT_ENUM_CAP",
]

DEFAULT_ENUM_CAP = 24


@dataclass
class Decision:
    """Outcome of a decider at one ``n``.

    ``witness`` holds integer seed indices at precision ``n``; YES decisions
    always carry one.
    """

    answer: str
    n: int
    solver: str
    witness: Optional[tuple] = None
    counters: Counters = field(default_factory=Counters)
    trace: dict = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.answer == "YES"

    @property
    def witness_point(self) -> Optional[GridPoint]:
        return None if self.witness is None else GridPoint(self.witness, self.n)

    def __str__(self):
        if self.yes:
            return f"YES witness={self.witness_point}"
        return "NO"


def verify_certificate(
    inst: TelicInstance, n: int, s, counters: Optional[Counters] = None, **orbit_kw
) -> bool:
    """Whether seed ``s`` (indices at precision ``n`` or a seed value) witnesses ``1^n``."""
    g = seed_eval(inst, n, s, counters)
    if g is None:
        return False
    end = orbit_endpoint(inst, n, g, counters, **orbit_kw)
    return target_member(inst, n, end, counters)


def brute_force_decide(
    inst: TelicInstance,
    n: int,
    *,
    cap_bits: int = DEFAULT_ENUM_CAP,
    counters: Optional[Counters] = None,
    order=None,
    **orbit_kw,
) -> Decision:
    """Scan every seed in lexicographic order and return the first witness.

    ``order`` may supply a different enumeration (an iterable of index
    tuples); the scan then keeps the lexicographic minimum over all witnesses.
    """
    if inst.d * n > cap_bits:
        raise ResourceLimit(f"seed space has {inst.d * n} bits, cap is {cap_bits}")
    c = counters if counters is not None else Counters()
    if order is None:
        for idx in seed_grid(inst.d, n):
            if verify_certificate(inst, n, idx, c, **orbit_kw):
                return Decision("YES", n, "brute", idx, c)
        return Decision("NO", n, "brute", None, c)
    best = None
    for idx in order:
        idx = tuple(idx)
        if (best is None or idx < best) and verify_certificate(inst, n, idx, c, **orbit_kw):
            best = idx
    return Decision("YES" if best is not None else "NO", n, "brute", best, c)


# ---------------------------------------------------------------------------
# k-ary search


def _hull_hits(lo: int, hi: int, axis, rng, r: int) -> bool:
    """Whether some index in ``[lo, hi]`` falls in the discretized axis range."""
    if rng is None:
        return True
    a, b = rng
    if isinstance(axis, Circle):
        N = 1 << r
        return any(max(lo, a + k * N) <= min(hi, b + k * N) for k in (-1, 0, 1, 2))
    return max(lo, a) <= min(hi, b)


def kary_search(
    seeds: SeedFamily,
    n: int,
    A: Sequence,
    r: int,
    *,
    tie: TieRule = LOWER,
    backtrack: bool = True,
    counters: Optional[Counters] = None,
) -> Optional[tuple]:
    """Find a seed whose image lands in ``D_r(A)``, or ``None``.

    The seed cube is halved along every axis, giving ``2**d`` subcubes; the
    subcube whose center image is closest to ``D_r(A)`` is explored first
    (ties go to the lexicographically smallest subcube).  With
    ``backtrack=False`` this is the pure greedy descent.  With backtracking,
    siblings are tried in the same order, and for monotone families a
    subcube is skipped when the box spanned by its corner images misses
    ``D_r(A)``.  That pruning never discards a member, so the search is
    complete.
    """
    c = counters if counters is not None else Counters()
    space = seeds.space
    d = seeds.d
    N = 1 << n
    rgs = [rg for rg in (rect_grid(space, rect, r, tie) for rect in A) if rg is not None]
    if not rgs:
        return None
    scale = pow2(-r)
    cache = {}

    def img(idx):
        if idx not in cache:
            c.seed_evals += 1
            s = tuple(Fraction(i, N) for i in idx)
            cache[idx] = seeds.eval(n, s, tie, unwrapped=True, r=r)
        return cache[idx]

    def member(idx) -> bool:
        c.membership_checks += 1
        e = img(idx)
        return e is not None and any(grid_in_rect(space, e, rg, r) for rg in rgs)

    def dist(idx):
        e = img(idx)
        if e is None:
            return (1, Fraction(0))
        dd = target_distance(tuple(m * scale for m in e), A, r, space, tie)
        return (0, dd.sq if dd.sq is not None else Fraction(10**9))

    monotone = seeds.monotone

    def may_contain(box) -> bool:
        if not monotone:
            return True
        lo_idx = tuple(b[0] for b in box)
        hi_idx = tuple(b[1] - 1 for b in box)
        e1, e2 = img(lo_idx), img(hi_idx)
        if e1 is None or e2 is None:
            return True
        for rg in rgs:
            if all(
                _hull_hits(min(u, w), max(u, w), axis, rng, r)
                for u, w, axis, rng in zip(e1, e2, space.axes, rg)
            ):
                return True
        return False

    def children(box):
        halves = []
        for lo, hi in box:
            if hi - lo == 1:
                halves.append([(lo, hi)])
            else:
                mid = (lo + hi) // 2
                halves.append([(lo, mid), (mid, hi)])
        out = [()]
        for h in halves:
            out = [p + (x,) for p in out for x in h]
        return out

    def center(box):
        return tuple(lo + (hi - lo) // 2 for lo, hi in box)

    def search(box):
        if all(hi - lo == 1 for lo, hi in box):
            idx = tuple(lo for lo, _ in box)
            return idx if member(idx) else None
        kids = children(box)
        ranked = sorted(range(len(kids)), key=lambda j: (dist(center(kids[j])), j))
        if not backtrack:
            return search(kids[ranked[0]])
        for j in ranked:
            if may_contain(kids[j]):
                got = search(kids[j])
                if got is not None:
                    return got
        return None

    root = tuple((0, N) for _ in range(d))
    if backtrack and not may_contain(root):
        return None
    return search(root)


# ---------------------------------------------------------------------------
# pullback decider for rotations


def _real_shift(alpha, n: int, w: int):
    """``n * alpha`` exactly for rational angles, else a dyadic within ``2**-w``."""
    if isinstance(alpha, QuadraticIrrational):
        return Fraction(alpha.scale(n).nearest_scaled(w), 1 << w), True
    return n * alpha, False


def pullback_decide(
    inst: TelicInstance, n: int, *, counters: Optional[Counters] = None, max_retries: int = 4
) -> Decision:
    """Decide a rotation instance by pulling the target back along the orbit.

    The target arc at precision ``v(n)`` is moved back by ``n*alpha``, giving
    an approximate arc of seed images.  Its two endpoints are then pinned
    exactly by forward checks of a few neighboring grid points, a k-ary
    search looks for a seed landing in the arc, and the candidate is
    verified forward before answering YES.
    """
    sysm = inst.system
    if sysm.kind != "rotation":
        raise NotApplicable(f"pullback needs an invertible system; {sysm.id} is not")
    if inst.d != 1:
        raise NotApplicable("pullback handles one-dimensional seeds only")
    if not inst.seeds.monotone or inst.seed_post or inst.target_pre or inst.home != sysm:
        raise NotApplicable("pullback needs a plain monotone seed family")
    c = counters if counters is not None else Counters()
    r = inst.seeds.r(n)
    N = 1 << r
    v = inst.v(n)
    tie = inst.seed_tie
    irrational = isinstance(sysm.alpha, QuadraticIrrational)
    shift, approx = _real_shift(sysm.alpha, n, r + v + 8)

    memo = {}

    def P(i: int) -> bool:
        i %= N
        if i not in memo:
            g = GridPoint((i,), r)
            if inst.ell:
                g, _ = discretize_orbit(sysm, g, inst.ell, r, tie=tie, counters=c)
            end = orbit_endpoint(inst, n, g, c)
            memo[i] = target_member(inst, n, end, c)
        return memo[i]

    arcs = []
    for rect in inst.targets.rects_at(n):
        rg = rect_grid(sysm.space, rect, v, inst.home_tie)
        if rg is None:
            continue
        if rg[0] is None:
            arcs.append((0, N - 1))
            continue
        a, b = rg[0]
        lo_real = (a - Fraction(1, 2)) * pow2(-v) - shift
        hi_real = (b + Fraction(1, 2)) * pow2(-v) - shift
        L, U = math.ceil(lo_real * N), math.floor(hi_real * N)
        arc = _pin_arc(P, L, U, N)
        if arc is not None:
            s0, e0 = arc
            arcs.append((s0 % N, s0 % N + (e0 - s0)))

    trace = {"pulled_back": [f"[{s}/2^{r},{e}/2^{r}]" for s, e in arcs], "margin_sensitive": irrational}
    fam = inst.seeds
    for _ in range(max_retries + 1):
        A = []
        for s, e in arcs:
            if e - s + 1 >= N:
                A.append(((Fraction(0), Fraction(N - 1, N)),))
            else:
                A.append(((Fraction(s, N), Fraction(e, N)),))
        cand = kary_search(fam, n, A, r, tie=tie, counters=c) if A else None
        if cand is None:
            return Decision("NO", n, "pullback", None, c, trace)
        if verify_certificate(inst, n, cand, c):
            return Decision("YES", n, "pullback", cand, c, trace)
        # remove the failed image from the arcs and retry
        trace["margin_sensitive"] = True
        bad = fam.eval(n, tuple(Fraction(i, 1 << n) for i in cand), tie, unwrapped=True)[0]
        arcs = _punch(arcs, bad, N)
    raise NotApplicable("pullback could not certify a candidate; fall back to brute force")


def _pin_arc(P, L: int, U: int, N: int, radius: int = 3):
    """Exact arc ``[s, e]`` (unwrapped, ``s <= e``) of indices where ``P`` holds, near ``[L, U]``.

    ``P`` is known to hold on a single circular arc whose endpoints lie
    within ``radius`` cells of ``L`` and ``U``.  Returns ``None`` when empty.
    """
    starts = [i for i in range(L - radius, L + radius + 1) if P(i) and not P(i - 1)]
    ends = [i for i in range(U - radius, U + radius + 1) if P(i) and not P(i + 1)]
    if not starts and not ends:
        probe = range(L - radius, U + radius + 1) if U - L < 4 * radius else [L + (U - L) // 2]
        if any(P(i) for i in probe):
            return (0, N - 1)
        return None
    if not starts:
        e = ends[-1]
        s = e
        while P(s - 1) and e - s < N:
            s -= 1
        return (s, e)
    if not ends:
        s = starts[0]
        e = s
        while P(e + 1) and e - s < N:
            e += 1
        return (s, e)
    s, e = starts[0], ends[-1]
    while e < s:
        e += N
    return (s, e)


def _punch(arcs, bad: int, N: int):
    out = []
    for s, e in arcs:
        k = (bad - s) % N
        if k > e - s:
            out.append((s, e))
            continue
        p = s + k
        if p - 1 >= s:
            out.append((s, p - 1))
        if e >= p + 1:
            out.append((p + 1, e))
    return out


def auto_decide(inst: TelicInstance, n: int, **kw) -> Decision:
    """Pullback when it applies, brute force otherwise."""
    try:
        return pullback_decide(inst, n, counters=kw.get("counters"))
    except NotApplicable:
        return brute_force_decide(inst, n, **kw)


SOLVERS = {"brute": brute_force_decide, "pullback": pullback_decide, "auto": auto_decide}
