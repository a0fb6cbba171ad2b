"""Quadratic irrationals ``(a + b*sqrt(D)) / c`` evaluated exactly with integer square roots."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import as_fraction

__all__ = ["QuadraticIrrational", "sign_quadratic"]


def sign_quadratic(p: Fraction, q: Fraction, D: int) -> int:
    """Sign of ``p + q*sqrt(D)`` for rationals p, q and nonsquare D > 0."""
    if q == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if (p > 0) == (q > 0):
        return 1 if p > 0 else -1
    # opposite signs: compare p^2 with q^2 D
    lhs, rhs = p * p, q * q * D
    if p > 0:
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


@dataclass(frozen=True)
class QuadraticIrrational:
    """The real number ``(a + b*sqrt(D)) / c`` with integers a, b, c and nonsquare D > 0.

    Normalized so that ``c > 0`` and ``gcd(a, b, c) == 1``.
    """

    a: int
    b: int
    c: int
    D: int

    def __post_init__(self):
        a, b, c, D = (int(v) for v in (self.a, self.b, self.c, self.D))
        if c == 0:
            raise ValueError("denominator c must be nonzero")
        if D <= 0 or math.isqrt(D) ** 2 == D:
            raise ValueError(f"D must be a positive nonsquare, got {D}")
        if b == 0:
            raise ValueError("b == 0 gives a rational; use a Fraction instead")
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        object.__setattr__(self, "a", a // g)
        object.__setattr__(self, "b", b // g)
        object.__setattr__(self, "c", c // g)
        object.__setattr__(self, "D", D)

    @classmethod
    def from_rationals(cls, p, q, D: int) -> "QuadraticIrrational":
        """``p + q*sqrt(D)`` with rational p, q."""
        p, q = as_fraction(p), as_fraction(q)
        den = p.denominator * q.denominator // math.gcd(p.denominator, q.denominator)
        return cls(int(p * den), int(q * den), den, D)

    @property
    def rational_part(self) -> Fraction:
        return Fraction(self.a, self.c)

    @property
    def surd_coeff(self) -> Fraction:
        return Fraction(self.b, self.c)

    def floor_scaled(self, K: int) -> int:
        """``floor(self * K)`` for an integer ``K``, computed exactly."""
        s = self.b * K
        t = math.isqrt(s * s * self.D)
        f = t if s >= 0 else -(t + 1)  # sqrt is irrational, never exact
        return (self.a * K + f) // self.c

    def __floor__(self) -> int:
        return self.floor_scaled(1)

    def nearest_scaled(self, w: int) -> int:
        """Nearest integer to ``self * 2**w`` (never a tie, the value is irrational)."""
        if w < -1:
            raise ValueError("precision must be >= -1")
        return (self.floor_scaled(1 << (w + 1)) + 1) // 2

    def to_fraction_approx(self, w: int) -> Fraction:
        """A dyadic within ``2**-w`` of the value (the floor at precision ``w``)."""
        return Fraction(self.floor_scaled(1 << w), 1 << w)

    def __float__(self) -> float:
        return float(self.to_fraction_approx(60))

    def add_rational(self, x) -> "QuadraticIrrational":
        x = as_fraction(x)
        return QuadraticIrrational.from_rationals(self.rational_part + x, self.surd_coeff, self.D)

    def scale(self, k) -> "QuadraticIrrational":
        k = as_fraction(k)
        if k == 0:
            raise ValueError("scaling by zero gives a rational")
        return QuadraticIrrational.from_rationals(self.rational_part * k, self.surd_coeff * k, self.D)

    def __neg__(self):
        return QuadraticIrrational(-self.a, -self.b, self.c, self.D)

    def frac(self) -> "QuadraticIrrational":
        """Reduce into [0, 1)."""
        return self.add_rational(-math.floor(self))

    def compare(self, x) -> int:
        """Sign of ``self - x`` for a rational ``x``."""
        return sign_quadratic(self.rational_part - as_fraction(x), self.surd_coeff, self.D)

    def __lt__(self, x):
        return self.compare(x) < 0

    def __gt__(self, x):
        return self.compare(x) > 0

    def __str__(self) -> str:
        return f"({self.a} + {self.b}*sqrt({self.D}))/{self.c}"
