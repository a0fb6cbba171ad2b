"""Catalog of one-dimensional dynamical systems with exact and approximate steppers.

Every kind ships an exact rational evaluator except rotations by a quadratic
irrational, which are evaluated to any precision through integer square roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .algebraic import QuadraticIrrational
from .dyadic import (
    LOWER,
    Circle,
    Dyadic,
    DyadicPoint,
    SpaceSpec,
    TieRule,
    as_fraction,
    as_point,
    pow2,
    round_axis,
)
from .errors import DomainError, NotExact, NotInvertible, ValidationError

__all__ = [
    "RotationAngle",
    "SystemSpec",
    "doubling",
    "tent",
    "logistic",
    "rotation",
    "affine_quadratic",
    "CATALOG",
    "step_exact",
    "step_approx",
    "step_inverse",
    "lipschitz_bound",
    "exact_capable",
    "parse_angle",
]

RotationAngle = Union[Fraction, QuadraticIrrational]

KINDS = ("doubling", "tent", "logistic", "rotation", "affine_quadratic")


def _reduce_angle(alpha) -> RotationAngle:
    if isinstance(alpha, QuadraticIrrational):
        return alpha.frac()
    a = as_fraction(alpha)
    return a - math.floor(a)


def parse_angle(obj) -> RotationAngle:
    """Angle from JSON: ``"1/3"`` or ``{"quad": [a, b, c, D]}``."""
    if isinstance(obj, dict):
        if "quad" in obj:
            a, b, c, D = obj["quad"]
            return _reduce_angle(QuadraticIrrational(a, b, c, D))
        if "rational" in obj:
            return _reduce_angle(Fraction(obj["rational"]))
        raise ValidationError(f"unknown angle encoding {obj!r}")
    return _reduce_angle(as_fraction(obj))


@dataclass(frozen=True)
class SystemSpec:
    """A map ``T`` on ``space`` with the parameters its kind needs.

    Build instances through the catalog constructors (``tent()``,
    ``rotation(alpha)``, ...), which check forward invariance.
    """

    id: str
    kind: str
    space: SpaceSpec
    lam: Optional[Fraction] = None
    alpha: Optional[RotationAngle] = None
    c: Optional[Fraction] = None
    bound: Optional[Fraction] = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def invertible(self) -> bool:
        return self.kind == "rotation"

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def lipschitz(self) -> Dyadic:
        return lipschitz_bound(self)

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "logistic":
            d["lambda"] = f"{self.lam.numerator}/{self.lam.denominator}"
        elif self.kind == "rotation":
            if isinstance(self.alpha, QuadraticIrrational):
                q = self.alpha
                d["alpha"] = {"quad": [q.a, q.b, q.c, q.D]}
            else:
                d["alpha"] = str(self.alpha)
        elif self.kind == "affine_quadratic":
            d["c"] = str(self.c)
            d["bound"] = str(self.bound)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "SystemSpec":
        kind = obj.get("kind")
        try:
            if kind == "doubling":
                return doubling()
            if kind == "tent":
                return tent()
            if kind == "logistic":
                return logistic(as_fraction(str(obj.get("lambda", "4"))))
            if kind == "rotation":
                return rotation(parse_angle(obj["alpha"]))
            if kind == "affine_quadratic":
                return affine_quadratic(as_fraction(str(obj.get("c", "-2"))), as_fraction(str(obj.get("bound", "2"))))
        except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad system parameters for {kind!r}: {exc}") from exc
        raise ValidationError(f"unknown system kind {kind!r}; expected one of {', '.join(KINDS)}")

    def __str__(self):
        return self.id


def doubling() -> SystemSpec:
    """``x -> 2x mod 1`` on the circle."""
    return SystemSpec("doubling", "doubling", SpaceSpec.circle())


def tent() -> SystemSpec:
    return SystemSpec("tent", "tent", SpaceSpec.interval(0, 1))


def logistic(lam=4) -> SystemSpec:
    lam = as_fraction(lam)
    if not 0 <= lam <= 4:
        raise ValidationError(f"logistic parameter {lam} does not keep [0,1] invariant")
    return SystemSpec(f"logistic({lam})", "logistic", SpaceSpec.interval(0, 1), lam=lam)


def rotation(alpha) -> SystemSpec:
    alpha = _reduce_angle(alpha)
    return SystemSpec(f"rotation({alpha})", "rotation", SpaceSpec.circle(), alpha=alpha)


def affine_quadratic(c=-2, bound=2) -> SystemSpec:
    """``y -> y^2 + c`` on ``[-bound, bound]``; ``c = -2`` on ``[-2, 2]`` is conjugate to logistic(4)."""
    c, bound = as_fraction(c), as_fraction(bound)
    if bound <= 0:
        raise ValidationError("bound must be positive")
    # image of [-b, b] is [c, b^2 + c]
    if c < -bound or bound * bound + c > bound:
        raise ValidationError(f"y^2 + {c} does not map [-{bound}, {bound}] into itself")
    return SystemSpec(
        f"affine_quadratic({c})", "affine_quadratic", SpaceSpec.interval(-bound, bound), c=c, bound=bound
    )


CATALOG = {
    "doubling": doubling,
    "tent": tent,
    "logistic": logistic,
    "rotation": rotation,
    "affine_quadratic": affine_quadratic,
}


def exact_capable(spec: SystemSpec) -> bool:
    return not (spec.kind == "rotation" and isinstance(spec.alpha, QuadraticIrrational))


def map_exact(spec: SystemSpec, v: Fraction) -> Fraction:
    """One exact step on a scalar coordinate."""
    k = spec.kind
    if k == "doubling":
        v = 2 * v
        return v - math.floor(v)
    if k == "tent":
        return 2 * v if 2 * v <= 1 else 2 * (1 - v)
    if k == "logistic":
        return spec.lam * v * (1 - v)
    if k == "rotation":
        if isinstance(spec.alpha, QuadraticIrrational):
            raise NotExact("irrational rotation has no exact rational step; use step_approx")
        v = v + spec.alpha
        return v - math.floor(v)
    if k == "affine_quadratic":
        return v * v + spec.c
    raise ValidationError(f"unknown kind {k!r}")


def step_exact(spec: SystemSpec, x) -> tuple:
    """``T(x)`` as exact rationals."""
    x = spec.space.normalize(x)
    return (map_exact(spec, x[0]),)


def _round_to_precision(v: Fraction, spec: SystemSpec, w: int, tie: TieRule) -> Fraction:
    return round_axis(v, spec.space.axes[0], w, tie) * pow2(-w)


def step_approx(spec: SystemSpec, x, w: int, tie: TieRule = LOWER) -> DyadicPoint:
    """A dyadic point within ``2**-w`` of ``T(x)``.

    The result is the precision-``w`` rounding of the true image, so the
    error is at most ``2**-(w+1)``; irrational rotations use exact integer
    square roots to find that rounding.
    """
    x = spec.space.normalize(x)
    v = x[0]
    if spec.kind == "rotation" and isinstance(spec.alpha, QuadraticIrrational):
        m = spec.alpha.add_rational(v).nearest_scaled(w) % (1 << w)
        return DyadicPoint((Dyadic(m, w),))
    z = _round_to_precision(map_exact(spec, v), spec, w, tie)
    return DyadicPoint((Dyadic.from_value(z),))


def step_inverse(spec: SystemSpec, x, w: Optional[int] = None, tie: TieRule = LOWER):
    """``T^{-1}(x)``: exact rationals for rational angles, otherwise a dyadic within ``2**-w``."""
    if not spec.invertible:
        raise NotInvertible(f"{spec.kind} map is not invertible")
    x = spec.space.normalize(x)
    v = x[0]
    if isinstance(spec.alpha, QuadraticIrrational):
        if w is None:
            raise NotExact("irrational rotation inverse needs a working precision w")
        m = (-spec.alpha).add_rational(v).nearest_scaled(w) % (1 << w)
        return DyadicPoint((Dyadic(m, w),))
    u = v - spec.alpha
    u = u - math.floor(u)
    if w is not None:
        return DyadicPoint((Dyadic.from_value(_round_to_precision(u, spec, w, tie)),))
    return (u,)


def _dyadic_ceil(x: Fraction, bits: int = 32) -> Dyadic:
    return Dyadic(math.ceil(x * (1 << bits)), bits)


def lipschitz_bound(spec: SystemSpec) -> Dyadic:
    """Analytic upper bound on the Lipschitz constant of the map."""
    k = spec.kind
    if k in ("doubling", "tent"):
        return Dyadic(2)
    if k == "rotation":
        return Dyadic(1)
    if k == "logistic":
        # sup |lam - 2 lam x| on [0, 1]
        return _dyadic_ceil(abs(spec.lam))
    if k == "affine_quadratic":
        return _dyadic_ceil(2 * spec.bound)
    raise ValidationError(f"unknown kind {k!r}")


def in_space(spec: SystemSpec, x) -> bool:
    try:
        spec.space.normalize(x)
    except DomainError:
        return False
    return True


def is_circle(spec: SystemSpec) -> bool:
    return isinstance(spec.space.axes[0], Circle)


def point_of(x) -> tuple:
    return as_point(x)
