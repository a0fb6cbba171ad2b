"""Exact dyadic rationals, precision grids and the rounding operator.

A dyadic rational is ``m / 2**q``.  Points of a space are tuples of exact
rationals (``Fraction``); grid points at precision ``r`` store the integer
numerators ``m_i`` with value ``m_i * 2**-r``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Sequence, Union

from .errors import DomainError, ParseError

__all__ = [
    "Dyadic",
    "DyadicPoint",
    "GridPoint",
    "Interval",
    "Circle",
    "SpaceSpec",
    "TieRule",
    "LOWER",
    "round_to_grid",
    "round_axis",
    "grid_neighbors",
    "grid_points",
    "grid_index_range",
    "axis_distance",
    "distance_sq",
    "as_fraction",
    "as_point",
    "is_dyadic",
    "dyadic_precision",
    "pow2",
]


def pow2(e: int) -> Fraction:
    """``2**e`` as an exact Fraction, for any integer ``e``."""
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


class Dyadic:
    """Exact dyadic rational ``mantissa / 2**exponent`` in canonical form.

    Canonical form means ``exponent == 0`` or ``mantissa`` odd, so equal values
    always share one representation.
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if not isinstance(mantissa, int) or not isinstance(exponent, int):
            raise TypeError("Dyadic needs integer mantissa and exponent")
        if exponent < 0:
            mantissa <<= -exponent
            exponent = 0
        if mantissa == 0:
            exponent = 0
        elif exponent:
            tz = min(_trailing_zeros(mantissa), exponent)
            mantissa >>= tz
            exponent -= tz
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def from_value(cls, x) -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, str):
            return cls.parse(x)
        f = Fraction(x)
        den = f.denominator
        if den & (den - 1):
            raise ValueError(f"{f} is not a dyadic rational")
        return cls(f.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse ``m/2^q``, a plain integer, or a fraction with power-of-two denominator."""
        s = text.strip().replace(" ", "")
        m = re.fullmatch(r"([+-]?\d+)/2\^(\d+)", s)
        if m:
            return cls(int(m.group(1)), int(m.group(2)))
        try:
            return cls.from_value(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a dyadic literal: {text!r}") from exc

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def __str__(self) -> str:
        return f"{self.mantissa}/2^{self.exponent}"

    def __repr__(self) -> str:
        return f"Dyadic({self.mantissa}, {self.exponent})"

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return self.to_fraction() + other if isinstance(other, Rational) else NotImplemented
        e = max(self.exponent, o.exponent)
        return Dyadic((self.mantissa << (e - self.exponent)) + (o.mantissa << (e - o.exponent)), e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __pos__(self):
        return self

    def __abs__(self):
        return Dyadic(abs(self.mantissa), self.exponent)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return self.to_fraction() - other if isinstance(other, Rational) else NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return self.to_fraction() * other if isinstance(other, Rational) else NotImplemented
        return Dyadic(self.mantissa * o.mantissa, self.exponent + o.exponent)

    __rmul__ = __mul__

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k``."""
        return Dyadic(self.mantissa, self.exponent - k)

    # comparison / hashing agree with Fraction

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Rational)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def _cmp(self, other):
        if isinstance(other, Dyadic):
            other = other.to_fraction()
        if not isinstance(other, (int, Rational)):
            return NotImplemented
        a = self.to_fraction()
        return (a > other) - (a < other)

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __float__(self):
        return float(self.to_fraction())

    def __bool__(self):
        return self.mantissa != 0


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Dyadic):
        return x.to_fraction()
    if isinstance(x, str):
        return Dyadic.parse(x).to_fraction() if "^" in x else Fraction(x)
    return Fraction(x)


def is_dyadic(x) -> bool:
    d = as_fraction(x).denominator
    return d & (d - 1) == 0


def dyadic_precision(x) -> int:
    """Smallest ``q >= 0`` with ``x`` in the precision-``q`` grid."""
    d = as_fraction(x).denominator
    if d & (d - 1):
        raise ValueError(f"{x} is not dyadic")
    return d.bit_length() - 1


@dataclass(frozen=True)
class DyadicPoint:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Dyadic.from_value(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def values(self) -> tuple:
        return tuple(c.to_fraction() for c in self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


PointLike = Union[DyadicPoint, "GridPoint", Sequence, Fraction, int]


def as_point(x) -> tuple:
    """Normalize a point-like value to a tuple of Fractions."""
    if isinstance(x, GridPoint):
        return x.values()
    if isinstance(x, DyadicPoint):
        return x.values()
    if isinstance(x, (int, Fraction, Dyadic, str)):
        return (as_fraction(x),)
    return tuple(as_fraction(c) for c in x)


@dataclass(frozen=True, order=True)
class GridPoint:
    """Point of the precision-``r`` grid: coordinate ``i`` is ``coords[i] * 2**-precision``."""

    coords: tuple
    precision: int

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def values(self) -> tuple:
        s = pow2(-self.precision)
        return tuple(m * s for m in self.coords)

    def to_dyadic(self) -> DyadicPoint:
        return DyadicPoint(tuple(Dyadic(m, self.precision) for m in self.coords))

    def __str__(self) -> str:
        return "(" + ",".join(str(m) for m in self.coords) + f")@{self.precision}"

    @classmethod
    def parse(cls, text: str) -> "GridPoint":
        m = re.fullmatch(r"\s*\(([^)]*)\)\s*@\s*(-?\d+)\s*", text)
        if not m:
            raise ParseError(f"grid point must look like (m1,...,md)@r, got {text!r}")
        try:
            coords = tuple(int(t) for t in m.group(1).split(",") if t.strip())
        except ValueError as exc:
            raise ParseError(f"bad grid coordinates in {text!r}") from exc
        if not coords:
            raise ParseError(f"empty grid point {text!r}")
        return cls(coords, int(m.group(2)))


# --------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if not lo < hi:
            raise ValueError(f"interval needs lo < hi, got [{lo}, {hi}]")
        if not (is_dyadic(lo) and is_dyadic(hi)):
            raise ValueError("interval endpoints must be dyadic")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def diameter(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self):
        return f"[{self.lo},{self.hi}]"


@dataclass(frozen=True)
class Circle:
    """The circle R/Z, represented by values in [0, 1)."""

    @property
    def diameter(self) -> Fraction:
        return Fraction(1, 2)

    def __str__(self):
        return "R/Z"


@dataclass(frozen=True)
class SpaceSpec:
    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise ValueError("space needs at least one axis")
        for a in axes:
            if not isinstance(a, (Interval, Circle)):
                raise TypeError(f"unknown axis geometry {a!r}")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def interval(cls, lo=0, hi=1) -> "SpaceSpec":
        return cls((Interval(as_fraction(lo), as_fraction(hi)),))

    @classmethod
    def circle(cls, d: int = 1) -> "SpaceSpec":
        return cls((Circle(),) * d)

    @property
    def dim(self) -> int:
        return len(self.axes)

    def contains(self, x) -> bool:
        x = as_point(x)
        if len(x) != self.dim:
            return False
        return all(isinstance(a, Circle) or a.lo <= v <= a.hi for a, v in zip(self.axes, x))

    def normalize(self, x) -> tuple:
        """Reduce circle coordinates into [0, 1); raise DomainError outside intervals."""
        x = as_point(x)
        if len(x) != self.dim:
            raise DomainError(f"point has dimension {len(x)}, space has {self.dim}")
        out = []
        for a, v in zip(self.axes, x):
            if isinstance(a, Circle):
                v = v - math.floor(v)
            elif not a.lo <= v <= a.hi:
                raise DomainError(f"coordinate {v} outside {a}")
            out.append(v)
        return tuple(out)

    @property
    def diameter_sq(self) -> Fraction:
        return sum((a.diameter ** 2 for a in self.axes), Fraction(0))

    def __str__(self):
        return " x ".join(str(a) for a in self.axes)


@dataclass(frozen=True)
class TieRule:
    """How the rounding operator resolves a value equidistant from two grid points.

    The default picks the lower value; on a circle "lower" means the smaller
    representative of ``(value - circle_origin) mod 1``, so with origin 0 the
    point 1 counts as 0.  ``prefer_upper`` flips the choice; it arises when a
    rounding convention is transported through an order-reversing map.
    """

    prefer_upper: bool = False
    circle_origin: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        o = as_fraction(self.circle_origin)
        object.__setattr__(self, "circle_origin", o - math.floor(o))

    def flipped(self) -> "TieRule":
        return TieRule(not self.prefer_upper, self.circle_origin)


LOWER = TieRule()


def _grid_bounds(axis: Interval, r: int) -> tuple[int, int]:
    s = pow2(r)
    return math.ceil(axis.lo * s), math.floor(axis.hi * s)


def grid_index_range(axis, r: int) -> tuple[int, int]:
    """Inclusive index range of the axis' precision-``r`` grid."""
    if isinstance(axis, Circle):
        if r < 0:
            raise DomainError("circle grids need precision >= 0")
        return 0, (1 << r) - 1
    lo, hi = _grid_bounds(axis, r)
    if lo > hi:
        raise DomainError(f"{axis} contains no precision-{r} grid point")
    return lo, hi


def round_axis(v: Fraction, axis, r: int, tie: TieRule = LOWER, *, unwrapped: bool = False) -> int:
    """Grid index nearest to ``v`` on one axis.

    With ``unwrapped=True`` a circle index is returned without reduction mod
    ``2**r`` (``floor(v*2**r)`` or one more), which keeps rounding monotone
    on the real line.
    """
    t = v * pow2(r)
    f = math.floor(t)
    frac = t - f
    if isinstance(axis, Circle):
        if r < 0:
            raise DomainError("circle grids need precision >= 0")
        if 2 * frac < 1:
            m = f
        elif 2 * frac > 1:
            m = f + 1
        else:
            n = 1 << r
            o = tie.circle_origin
            key_lo = (Fraction(f, n) - o) % 1
            key_hi = (Fraction(f + 1, n) - o) % 1
            pick_upper = key_hi < key_lo
            if tie.prefer_upper:
                pick_upper = not pick_upper
            m = f + 1 if pick_upper else f
        return m if unwrapped else m % (1 << r)
    if 2 * frac < 1:
        m = f
    elif 2 * frac > 1:
        m = f + 1
    else:
        m = f + 1 if tie.prefer_upper else f
    lo, hi = grid_index_range(axis, r)
    return min(max(m, lo), hi)


def round_to_grid(x, space: SpaceSpec, r: int, tie: TieRule = LOWER) -> GridPoint:
    """The rounding operator D_r: nearest precision-``r`` grid point of ``space``.

    Coordinates round independently, which for rectangular grids is the
    global 2-norm nearest point.  Circle coordinates are reduced mod 1 first;
    interval coordinates outside the domain raise ``DomainError``.
    """
    x = space.normalize(x)
    return GridPoint(tuple(round_axis(v, a, r, tie) for v, a in zip(x, space.axes)), r)


def grid_neighbors(g: GridPoint, space: SpaceSpec) -> set:
    """Grid points differing from ``g`` by one step in exactly one coordinate."""
    out = set()
    r = g.precision
    for i, a in enumerate(space.axes):
        lo, hi = grid_index_range(a, r)
        for step in (-1, 1):
            m = g.coords[i] + step
            if isinstance(a, Circle):
                m %= 1 << r
            elif not lo <= m <= hi:
                continue
            if m == g.coords[i]:
                continue
            c = list(g.coords)
            c[i] = m
            out.add(GridPoint(tuple(c), r))
    return out


def grid_points(space: SpaceSpec, r: int) -> Iterator[GridPoint]:
    """All points of the precision-``r`` grid in lexicographic order."""
    ranges = [range(lo, hi + 1) for lo, hi in (grid_index_range(a, r) for a in space.axes)]
    for c in itertools.product(*ranges):
        yield GridPoint(c, r)


def axis_distance(axis, a: Fraction, b: Fraction) -> Fraction:
    d = abs(a - b)
    if isinstance(axis, Circle):
        d = d - math.floor(d)
        d = min(d, 1 - d)
    return d


def distance_sq(space: SpaceSpec, x, y) -> Fraction:
    """Squared Euclidean distance (circle coordinates use arc length)."""
    x, y = as_point(x), as_point(y)
    return sum((axis_distance(a, u, v) ** 2 for a, u, v in zip(space.axes, x, y)), Fraction(0))
