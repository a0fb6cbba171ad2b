"""Telic reachability instances.

A telic instance asks, for each ``n``, whether some seed ``s`` in the
precision-``n`` grid of ``[0,1]^d`` is carried by the seed map into the
state space and then, after ``n`` steps of the system discretized at
precision ``v(n) = C*n``, lands in the discretized target ``D_v(B)``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .dyadic import (
    LOWER,
    Circle,
    GridPoint,
    Interval,
    SpaceSpec,
    TieRule,
    as_fraction,
    as_point,
    dyadic_precision,
    is_dyadic,
    pow2,
    round_axis,
)
from .discretize import Counters, discretize_function, discretize_orbit
from .errors import ConfigError, DomainError, ParseError, ResourceLimit, ValidationError
from .systems import SystemSpec, rotation

__all__ = [
    "Template",
    "TargetFamily",
    "SeedFamily",
    "TelicInstance",
    "ExactDistance",
    "BOTTOM",
    "seed_eval",
    "target_member",
    "target_distance",
    "rect_grid",
    "check_neighborhood_preservation",
    "NeighborhoodReport",
    "seed_grid",
    "orbit_endpoint",
]

BOTTOM = None  # seeds the family discards


# ---------------------------------------------------------------------------
# targets


@dataclass(frozen=True)
class Template:
    """Endpoint ``const + coef * 2**-n``."""

    const: Fraction
    coef: Fraction = Fraction(0)

    def at(self, n: int) -> Fraction:
        return self.const + self.coef * pow2(-n)

    @classmethod
    def parse(cls, text) -> "Template":
        """Parse sums of rationals, ``2^-k`` constants and ``[q*]2^-n`` terms."""
        if isinstance(text, (int, Fraction)):
            return cls(Fraction(text))
        s = str(text).replace(" ", "")
        if not s:
            raise ParseError("empty endpoint template")
        const, coef = Fraction(0), Fraction(0)
        # split on +/- that are not part of an exponent "^-"
        tokens = re.findall(r"[+-]?(?:[^+-]|(?<=\^)-)+", s)
        if "".join(tokens) != s:
            raise ParseError(f"bad endpoint template {text!r}")
        for tok in tokens:
            sign = -1 if tok.startswith("-") else 1
            body = tok.lstrip("+-")
            mult = Fraction(1)
            if "*" in body:
                q, body = body.split("*", 1)
                mult = _rational(q, text)
            m = re.fullmatch(r"2\^-(n|\d+)", body)
            if m:
                if m.group(1) == "n":
                    coef += sign * mult
                else:
                    const += sign * mult * pow2(-int(m.group(1)))
            else:
                if mult != 1:
                    raise ParseError(f"bad endpoint template {text!r}")
                const += sign * _rational(body, text)
        return cls(const, coef)

    def __str__(self) -> str:
        if self.coef == 0:
            return str(self.const)
        mag = abs(self.coef)
        term = "2^-n" if mag == 1 else f"{mag}*2^-n"
        if self.const == 0:
            return term if self.coef > 0 else f"-{term}"
        return f"{self.const} {'+' if self.coef > 0 else '-'} {term}"

    def shifted(self, delta: Fraction) -> "Template":
        return Template(self.const + delta, self.coef)


def _rational(s: str, ctx) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {s!r} in endpoint template {ctx!r}") from exc


@dataclass(frozen=True)
class TargetFamily:
    """A union of rational rectangles ``R^(n)``; each rectangle is a tuple of per-axis ``(lo, hi)`` templates."""

    rects: tuple
    ell: int = 0

    def __post_init__(self):
        rects = tuple(tuple((_tpl(lo), _tpl(hi)) for lo, hi in rect) for rect in self.rects)
        if not rects:
            raise ValidationError("target family needs at least one rectangle")
        if self.ell < 0:
            raise ValidationError("wrapper power ell must be nonnegative")
        object.__setattr__(self, "rects", rects)

    @classmethod
    def interval(cls, lo, hi, ell: int = 0) -> "TargetFamily":
        return cls((((lo, hi),),), ell)

    def rects_at(self, n: int) -> list:
        return [tuple((lo.at(n), hi.at(n)) for lo, hi in rect) for rect in self.rects]

    def shifted(self, delta) -> "TargetFamily":
        delta = as_fraction(delta)
        return TargetFamily(tuple(tuple((lo.shifted(delta), hi.shifted(delta)) for lo, hi in r) for r in self.rects), self.ell)

    def to_json(self) -> dict:
        rects = [[[str(lo), str(hi)] for lo, hi in r] for r in self.rects]
        d = {"rect": rects[0]} if len(rects) == 1 else {"rects": rects}
        d["ell"] = self.ell
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "TargetFamily":
        if "rect" in obj:
            rects = [obj["rect"]]
        elif "rects" in obj:
            rects = obj["rects"]
        else:
            raise ValidationError("targets need 'rect' or 'rects'")
        try:
            rs = tuple(tuple((Template.parse(lo), Template.parse(hi)) for lo, hi in r) for r in rects)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"targets.rect: {exc}") from exc
        ell = obj.get("ell", 0)
        if not isinstance(ell, int) or ell < 0:
            raise ValidationError("targets.ell must be a nonnegative integer")
        return cls(rs, ell)


def _tpl(x) -> Template:
    return x if isinstance(x, Template) else Template.parse(x)


def rect_grid(space: SpaceSpec, rect, r: int, tie: TieRule = LOWER):
    """``D_r`` of a rectangle as per-axis inclusive index ranges.

    Interval axes give ``(lo, hi)``; circle axes give an unwrapped arc
    ``(lo, hi)`` with ``hi - lo + 1 < 2**r`` or ``None`` for the whole circle.
    Returns ``None`` when the rectangle misses the space.
    """
    out = []
    for axis, (lo, hi) in zip(space.axes, rect):
        if hi < lo:
            return None
        if isinstance(axis, Circle):
            if hi - lo >= 1:
                out.append(None)
                continue
            a = round_axis(lo, axis, r, tie, unwrapped=True)
            b = round_axis(hi, axis, r, tie, unwrapped=True)
            out.append(None if b - a + 1 >= (1 << r) else (a, b))
        else:
            lo, hi = max(lo, axis.lo), min(hi, axis.hi)
            if hi < lo:
                return None
            out.append((round_axis(lo, axis, r, tie), round_axis(hi, axis, r, tie)))
    return tuple(out)


def _axis_in(i: int, axis, rng, r: int) -> bool:
    if rng is None:
        return True
    a, b = rng
    if isinstance(axis, Circle):
        return (i - a) % (1 << r) <= b - a
    return a <= i <= b


def grid_in_rect(space: SpaceSpec, coords: Sequence[int], rg, r: int) -> bool:
    if rg is None:
        return False
    return all(_axis_in(i, a, rng, r) for i, a, rng in zip(coords, space.axes, rg))


@dataclass(frozen=True)
class ExactDistance:
    """A Euclidean distance stored exactly as its square (``inf`` for an empty set)."""

    sq: Optional[Fraction]

    @property
    def infinite(self) -> bool:
        return self.sq is None

    def __float__(self):
        return math.inf if self.sq is None else math.sqrt(self.sq)

    def le(self, bound) -> bool:
        if self.sq is None:
            return False
        b = as_fraction(bound)
        return b >= 0 and self.sq <= b * b

    def __lt__(self, other: "ExactDistance"):
        if self.sq is None:
            return False
        return other.sq is None or self.sq < other.sq

    def __str__(self):
        if self.sq is None:
            return "inf"
        n, d = self.sq.numerator, self.sq.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn == n and rd * rd == d:
            return str(Fraction(rn, rd))
        return f"sqrt({self.sq})"


def _axis_gap(v: Fraction, axis, rng, r: int) -> Fraction:
    """Distance from ``v`` to the grid values of one discretized axis."""
    if rng is None:
        return Fraction(0)
    a, b = rng
    s = pow2(-r)
    if isinstance(axis, Circle):
        off = (v - a * s) % 1
        span = (b - a) * s
        if off <= span:
            return Fraction(0)
        return min(off - span, 1 - off)
    lo, hi = a * s, b * s
    if v < lo:
        return lo - v
    if v > hi:
        return v - hi
    return Fraction(0)


def target_distance(x, rects, r: int, space: SpaceSpec, tie: TieRule = LOWER) -> ExactDistance:
    """Exact distance from ``x`` to ``D_r`` of a union of rectangles.

    ``rects`` is a sequence of rectangles, each a tuple of per-axis ``(lo, hi)``.
    """
    v = space.normalize(x)
    best = None
    for rect in rects:
        rg = rect_grid(space, rect, r, tie)
        if rg is None:
            continue
        sq = sum((_axis_gap(c, a, rng, r) ** 2 for c, a, rng in zip(v, space.axes, rg)), Fraction(0))
        if best is None or sq < best:
            best = sq
    return ExactDistance(best)


# ---------------------------------------------------------------------------
# seeds


SEED_KINDS = ("identity", "affine", "square", "table")


@dataclass(frozen=True)
class SeedFamily:
    """Seed maps ``g^(n)`` from the precision-``n`` grid of ``[0,1]^d`` into ``space``.

    Kinds: ``identity``; ``affine`` with per-axis ``a*x + b``; ``square``
    (``x -> x^2``); ``table`` with explicit images per ``n`` (missing seeds
    map to bottom).  Images are rounded to precision ``r(n) = r_mult*n + r_add``.
    ``bottom_gt`` discards seeds having a coordinate above it.
    """

    kind: str = "identity"
    d: int = 1
    a: tuple = ()
    b: tuple = ()
    table: Optional[dict] = field(default=None, compare=False, hash=False)
    r_mult: Optional[int] = None
    r_add: int = 0
    bottom_gt: Optional[Fraction] = None
    space: Optional[SpaceSpec] = None

    def __post_init__(self):
        if self.kind not in SEED_KINDS:
            raise ValidationError(f"unknown seed kind {self.kind!r}; expected one of {', '.join(SEED_KINDS)}")
        if not isinstance(self.d, int) or self.d < 1:
            raise ValidationError("seed dimension d must be a positive integer")
        if self.kind == "affine":
            a = tuple(as_fraction(v) for v in self.a) or (Fraction(1),) * self.d
            b = tuple(as_fraction(v) for v in self.b) or (Fraction(0),) * self.d
            if len(a) == 1 and self.d > 1:
                a = a * self.d
            if len(b) == 1 and self.d > 1:
                b = b * self.d
            if len(a) != self.d or len(b) != self.d:
                raise ValidationError("affine seeds need one (a, b) per axis")
            if any(v == 0 for v in a):
                raise ValidationError("affine seeds need a != 0")
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        if self.kind == "table" and not self.table:
            raise ValidationError("table seeds need a non-empty table")
        if self.r_mult is None:
            object.__setattr__(self, "r_mult", 2 if self.kind == "square" else 1)
        if self.r_mult < 1:
            raise ValidationError("r_mult must be >= 1 so that r(n) >= n")
        if self.bottom_gt is not None:
            object.__setattr__(self, "bottom_gt", as_fraction(self.bottom_gt))
        if self.space is None:
            object.__setattr__(self, "space", SpaceSpec((Interval(0, 1),) * self.d))
        elif self.space.dim != self.d:
            raise ValidationError(f"seed dimension {self.d} does not match space dimension {self.space.dim}")

    def r(self, n: int) -> int:
        base = self.r_mult * n + self.r_add
        if self.kind == "table":
            # tables are exact at small n: keep their entries representable
            pts = [img for img in self.table.get(n, {}).values() if img is not None]
            finest = max((dyadic_precision(c) for p in pts for c in p if is_dyadic(c)), default=0)
            return max(base, finest)
        return base

    @property
    def monotone(self) -> bool:
        """Coordinate-wise monotone with no bottom values (structural check)."""
        return self.kind in ("identity", "affine", "square") and self.bottom_gt is None

    @property
    def increasing(self) -> tuple:
        if self.kind == "affine":
            return tuple(v > 0 for v in self.a)
        return (True,) * self.d

    def with_space(self, space: SpaceSpec) -> "SeedFamily":
        return replace(self, space=space)

    def image(self, s) -> Optional[tuple]:
        """Exact image of a seed value (no rounding), or ``None`` for bottom."""
        s = as_point(s)
        if self.bottom_gt is not None and any(c > self.bottom_gt for c in s):
            return BOTTOM
        k = self.kind
        if k == "identity":
            return s
        if k == "affine":
            return tuple(a * c + b for a, b, c in zip(self.a, self.b, s))
        if k == "square":
            return tuple(c * c for c in s)
        for t in self.table.values():
            if s in t:
                return t[s]
        return BOTTOM

    def table_image(self, n: int, s) -> Optional[tuple]:
        t = self.table.get(n, {})
        return t.get(as_point(s), BOTTOM)

    def eval(self, n: int, s, tie: TieRule = LOWER, unwrapped: bool = False, r: Optional[int] = None):
        """``D_{r(n)}(g^(n)(s))`` as integer coordinates, or ``None``."""
        img = self.table_image(n, s) if self.kind == "table" else self.image(s)
        if img is BOTTOM:
            return BOTTOM
        r = self.r(n) if r is None else r
        out = []
        for v, axis in zip(img, self.space.axes):
            if isinstance(axis, Circle):
                out.append(round_axis(v, axis, r, tie, unwrapped=unwrapped))
            else:
                if not axis.lo <= v <= axis.hi:
                    return BOTTOM
                out.append(round_axis(v, axis, r, tie))
        return tuple(out)

    def to_json(self) -> dict:
        d = {"kind": self.kind, "d": self.d}
        if self.kind == "affine":
            d["a"] = [str(v) for v in self.a]
            d["b"] = [str(v) for v in self.b]
        if self.kind == "table":
            d["table"] = {
                str(n): [[_pt_json(s), None if img is None else _pt_json(img)] for s, img in sorted(t.items())]
                for n, t in sorted(self.table.items())
            }
        if self.r_mult != (2 if self.kind == "square" else 1):
            d["r_mult"] = self.r_mult
        if self.r_add:
            d["r_add"] = self.r_add
        if self.bottom_gt is not None:
            d["bottom_gt"] = str(self.bottom_gt)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "SeedFamily":
        kind = obj.get("kind", "identity")
        d = obj.get("d", 1)
        table = None
        try:
            if kind == "table":
                raw = obj.get("table") or {}
                table = {
                    int(n): {as_point(_pt_parse(s)): (None if img is None else as_point(_pt_parse(img))) for s, img in rows}
                    for n, rows in raw.items()
                }
            return cls(
                kind=kind,
                d=d,
                a=tuple(_as_list(obj.get("a", ()))),
                b=tuple(_as_list(obj.get("b", ()))),
                table=table,
                r_mult=obj.get("r_mult"),
                r_add=obj.get("r_add", 0),
                bottom_gt=obj.get("bottom_gt"),
            )
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ParseError(f"seeds: {exc}") from exc


def _as_list(v):
    return v if isinstance(v, (list, tuple)) else [v]


def _pt_json(p):
    return str(p[0]) if len(p) == 1 else [str(c) for c in p]


def _pt_parse(p):
    return [as_fraction(str(c)) for c in p] if isinstance(p, list) else as_fraction(str(p))


def seed_grid(d: int, n: int, closed: bool = False) -> Iterator[tuple]:
    """Seed index tuples in lexicographic order: ``0..2**n - 1`` per axis, or up to ``2**n`` when closed."""
    top = (1 << n) + (1 if closed else 0)
    return itertools.product(range(top), repeat=d)


@dataclass
class NeighborhoodReport:
    ok: bool
    n: int
    delta: Optional[Fraction]
    pairs_checked: int
    violation: Optional[dict] = None


def _lip(fam: SeedFamily) -> Optional[Fraction]:
    if fam.kind == "identity":
        return Fraction(1)
    if fam.kind == "affine":
        return max(abs(a) for a in fam.a)
    if fam.kind == "square":
        return Fraction(2)
    return None


def check_neighborhood_preservation(fam: SeedFamily, n: int, *, cap_bits: int = 20, tie: TieRule = LOWER) -> NeighborhoodReport:
    """Exhaustive check of grid-adjacency preservation and order monotonicity.

    Seeds range over the closed grid ``{k/2**n : 0 <= k <= 2**n}`` per axis.
    Adjacent seeds with non-bottom images must land within
    ``delta_n = lip * 2**-n + 2**-r(n)`` of each other (the rounding slack
    covers both images).  Along every axis line each image coordinate must
    be monotone once bottom seeds are skipped.
    """
    if fam.d * n > cap_bits:
        raise ResourceLimit(f"d*n = {fam.d * n} exceeds the enumeration cap {cap_bits}")
    r = fam.r(n)
    scale = pow2(-r)
    N = 1 << n
    imgs = {}
    for idx in seed_grid(fam.d, n, closed=True):
        s = tuple(Fraction(i, N) for i in idx)
        e = fam.eval(n, s, tie, unwrapped=True)
        imgs[idx] = None if e is None else tuple(m * scale for m in e)
    lip = _lip(fam)
    delta = None if lip is None else lip * pow2(-n) + scale
    pairs = 0
    for axis in range(fam.d):
        for idx, y in imgs.items():
            if y is None or idx[axis] == N:
                continue
            nb = idx[:axis] + (idx[axis] + 1,) + idx[axis + 1 :]
            y2 = imgs[nb]
            if y2 is None:
                continue
            pairs += 1
            if delta is not None:
                dist2 = sum((u - v) ** 2 for u, v in zip(y, y2))
                if dist2 > delta * delta:
                    return NeighborhoodReport(False, n, delta, pairs, {"kind": "spread", "s": idx, "s2": nb})
        # monotone along each line in this axis direction
        others = [range(N + 1)] * (fam.d - 1)
        for rest in itertools.product(*others):
            line = []
            for i in range(N + 1):
                idx = rest[:axis] + (i,) + rest[axis:]
                if imgs[idx] is not None:
                    line.append((idx, imgs[idx]))
            for c in range(fam.d):
                sgn = 0
                for (i1, y1), (i2, y2) in zip(line, line[1:]):
                    step = (y2[c] > y1[c]) - (y2[c] < y1[c])
                    if step and sgn and step != sgn:
                        return NeighborhoodReport(
                            False, n, delta, pairs, {"kind": "order", "s": i1, "s2": i2, "coord": c}
                        )
                    sgn = sgn or step
    return NeighborhoodReport(True, n, delta, pairs)


# ---------------------------------------------------------------------------
# instances


H_KINDS = ("identity", "map")


@dataclass(frozen=True)
class TelicInstance:
    """A telic problem over ``system``.

    ``seed_post`` and ``target_pre`` carry the maps that reductions splice in:
    seed images are pushed through ``seed_post`` after the wrapper, and a
    candidate orbit endpoint is pulled back through ``target_pre`` before the
    wrapper pullback and rectangle test.  Both run on ``home`` (the system
    the targets were written for), which defaults to ``system``.
    """

    system: SystemSpec
    seeds: SeedFamily
    targets: TargetFamily
    H: str = "identity"
    C: int = 1
    precision_offset: int = 0
    tie: TieRule = LOWER
    name: str = ""
    tags: tuple = ()
    home: Optional[SystemSpec] = None
    home_tie: Optional[TieRule] = None
    seed_tie: Optional[TieRule] = None
    seed_post: tuple = ()
    target_pre: tuple = ()
    source: Optional[dict] = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.C, int) or isinstance(self.C, bool) or self.C < 1:
            raise ValidationError(f"C must be a positive integer, got {self.C!r}")
        if self.H not in H_KINDS:
            raise ValidationError(f"H must be 'identity' or 'map', got {self.H!r}")
        home = self.home or self.system
        object.__setattr__(self, "home", home)
        if self.home_tie is None:
            object.__setattr__(self, "home_tie", self.tie)
        if self.seed_tie is None:
            object.__setattr__(self, "seed_tie", self.home_tie)
        if self.H == "map" and self.targets.ell > 0 and not home.invertible:
            raise ConfigError(f"H = T with ell > 0 needs an invertible system; {home.id} is not")
        if self.seeds.d != home.dim:
            raise ValidationError(f"seed dimension {self.seeds.d} does not match system dimension {home.dim}")
        if self.seeds.space != home.space:
            object.__setattr__(self, "seeds", self.seeds.with_space(home.space))
        self._check_targets()
        self._check_seed_images()

    def _check_targets(self):
        for n in range(1, 65):
            for rect in self.targets.rects_at(n):
                for (lo, hi), axis in zip(rect, self.home.space.axes):
                    if lo > hi:
                        raise ValidationError(f"target rectangle has lo > hi at n={n}")
                    if isinstance(axis, Interval) and (hi < axis.lo or lo > axis.hi):
                        raise ValidationError(f"target ∩ X = ∅ at n={n}")

    def _check_seed_images(self):
        fam = self.seeds
        if fam.kind == "table":
            pts = [img for t in fam.table.values() for img in t.values() if img is not None]
        elif fam.monotone or fam.bottom_gt is not None:
            corners = itertools.product((Fraction(0), Fraction(1)), repeat=fam.d)
            pts = [fam.image(c) for c in corners]
            pts = [p for p in pts if p is not None]
        else:
            pts = []
        for p in pts:
            if not self.home.space.contains(p) and not all(isinstance(a, Circle) for a in self.home.space.axes):
                raise ValidationError(f"seed image {tuple(str(c) for c in p)} outside {self.home.space}")

    @property
    def ell(self) -> int:
        return self.targets.ell if self.H == "map" else 0

    @property
    def d(self) -> int:
        return self.seeds.d

    def v(self, n: int) -> int:
        """Orbit precision ``C*n`` (shifted by ``precision_offset`` for rescaled spaces)."""
        return self.C * n + self.precision_offset

    def home_v(self, n: int) -> int:
        return self.v(n) + sum(f.precision_shift for f in self.target_pre)

    def seed_precision(self, n: int) -> int:
        return self.seeds.r(n) + sum(f.precision_shift for f in self.seed_post)

    def to_json(self) -> dict:
        if self.source is not None:
            return self.source
        d = {
            "system": self.system.to_json(),
            "seeds": self.seeds.to_json(),
            "targets": self.targets.to_json(),
            "H": "identity" if self.H == "identity" else "T",
            "C": self.C,
        }
        if self.name:
            d["name"] = self.name
        if self.tags:
            d["tags"] = list(self.tags)
        return d

    def __str__(self):
        return self.name or f"telic[{self.system.id}]"


def _seed_point(s, n: int) -> tuple:
    if isinstance(s, GridPoint):
        return s.values()
    if isinstance(s, tuple) and s and all(isinstance(c, int) for c in s):
        return tuple(Fraction(c, 1 << n) for c in s)
    return as_point(s)


def seed_eval(inst: TelicInstance, n: int, s, counters: Optional[Counters] = None) -> Optional[GridPoint]:
    """``h^(n)(s)`` as a grid point at the seed precision, or ``None`` for bottom.

    ``s`` is a seed value (or a tuple of integer indices at precision ``n``).
    """
    if counters is not None:
        counters.seed_evals += 1
    sv = _seed_point(s, n)
    if any(c < 0 or c > 1 for c in sv):
        raise DomainError(f"seed {s} outside [0,1]^d")
    idx = inst.seeds.eval(n, sv, inst.seed_tie)
    if idx is None:
        return None
    r = inst.seeds.r(n)
    g = GridPoint(idx, r)
    if inst.ell:
        g, _ = discretize_orbit(inst.home, g, inst.ell, r, tie=inst.seed_tie, counters=counters)
    for f in inst.seed_post:
        r += f.precision_shift
        try:
            g = discretize_function(f, g, r, inst.tie)
        except DomainError:
            return None
    return g


def target_member(inst: TelicInstance, n: int, x, counters: Optional[Counters] = None) -> bool:
    """Whether the grid point ``x`` (precision ``v(n)``) lies in ``D_v(B^(n))``."""
    if counters is not None:
        counters.membership_checks += 1
    if not isinstance(x, GridPoint):
        v = as_point(x)
        x = GridPoint(tuple(int(c * pow2(inst.v(n))) for c in v), inst.v(n))
    r = x.precision
    for f in reversed(inst.target_pre):
        r += f.precision_shift
        try:
            x = discretize_function(f, x, r, inst.home_tie)
        except DomainError:
            return False
    if inst.ell:
        inv = rotation(-inst.home.alpha)
        x, _ = discretize_orbit(inv, x, inst.ell, r, tie=inst.home_tie, counters=counters)
    space = inst.home.space
    for rect in inst.targets.rects_at(n):
        rg = rect_grid(space, rect, r, inst.home_tie)
        if grid_in_rect(space, x.coords, rg, r):
            return True
    return False


def orbit_endpoint(inst: TelicInstance, n: int, g: GridPoint, counters: Optional[Counters] = None, **kw) -> GridPoint:
    """``D_v(T^n(g))`` for a seed image ``g``."""
    out, _ = discretize_orbit(inst.system, g, n, inst.v(n), tie=inst.tie, counters=counters, **kw)
    return out
