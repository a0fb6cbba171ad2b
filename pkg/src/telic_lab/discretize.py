"""Orbit and function discretizers.

``discretize_orbit`` computes ``D_r(T^k(x))``.  Systems with exact rational
steps are iterated exactly and rounded once at the end.  Otherwise the orbit
runs in fixed point at a working precision ``w`` large enough that the
accumulated error stays below ``2**-(r+2)``, then rounds once to ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .algebraic import QuadraticIrrational
from .dyadic import (
    LOWER,
    Circle,
    Dyadic,
    GridPoint,
    SpaceSpec,
    TieRule,
    as_fraction,
    as_point,
    dyadic_precision,
    grid_index_range,
    grid_points,
    is_dyadic,
    pow2,
    round_axis,
    round_to_grid,
)
from .errors import DomainError, ResourceLimit, ValidationError
from .systems import SystemSpec, exact_capable, lipschitz_bound, map_exact

__all__ = [
    "OrbitRequest",
    "PrecisionTrace",
    "Counters",
    "working_precision",
    "discretize_orbit",
    "FunctionSpec",
    "discretize_function",
    "InversePairReport",
    "validate_inverse_pair",
    "DEFAULT_MAX_BITS",
    "DEFAULT_MAX_PRECISION",
]

DEFAULT_MAX_BITS = 1 << 20
DEFAULT_MAX_PRECISION = 1 << 20


@dataclass
class Counters:
    """Machine-independent work counters shared by discretizers and solvers."""

    orbits: int = 0
    map_steps: int = 0
    membership_checks: int = 0
    seed_evals: int = 0

    def as_dict(self) -> dict:
        return {
            "orbits": self.orbits,
            "map_steps": self.map_steps,
            "membership_checks": self.membership_checks,
            "seed_evals": self.seed_evals,
        }

    def add(self, other: "Counters") -> None:
        self.orbits += other.orbits
        self.map_steps += other.map_steps
        self.membership_checks += other.membership_checks
        self.seed_evals += other.seed_evals


@dataclass(frozen=True)
class OrbitRequest:
    system: SystemSpec
    start: GridPoint
    k: int
    r: int

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError("iteration count must be nonnegative")
        if not self.system.space.contains(self.start.values()) and not all(
            isinstance(a, Circle) for a in self.system.space.axes
        ):
            raise DomainError(f"start {self.start} outside {self.system.space}")


@dataclass(frozen=True)
class PrecisionTrace:
    """How an orbit was computed.

    ``error_bound`` is the certified distance between the pre-rounding value
    and the true ``T^k(x)``; it is 0 in exact mode.  ``ambiguous`` marks an
    approximate value lying within that bound of a rounding boundary.
    """

    mode: str
    w: Optional[int]
    step_error: Optional[Dyadic]
    error_bound: Fraction
    exact: bool
    ambiguous: bool = False
    bits: int = 0

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "w": self.w,
            "step_error": None if self.step_error is None else str(self.step_error),
            "error_bound": str(Dyadic.from_value(self.error_bound)),
            "exact": self.exact,
            "ambiguous": self.ambiguous,
        }


def _ceil_log2(x: Fraction) -> int:
    """Exact ``ceil(log2(x))`` for a rational ``x > 0``."""
    e = x.numerator.bit_length() - x.denominator.bit_length()
    while pow2(e) < x:
        e += 1
    while pow2(e - 1) >= x:
        e -= 1
    return e


def working_precision(L, k: int, r: int) -> int:
    """``r + 2 + ceil(k * log2(max(L, 2)))``, computed without floating point."""
    L = as_fraction(L)
    if L < 0:
        raise ValueError("Lipschitz bound must be nonnegative")
    if k < 0:
        raise ValueError("k must be nonnegative")
    L = max(L, Fraction(2))
    return r + 2 + _ceil_log2(L ** k) if k else r + 2


def _nearest(num: int, den: int, upper: bool = False) -> int:
    """Nearest integer to ``num/den`` (``den > 0``); ties go down unless ``upper``."""
    q, rem = divmod(num, den)
    twice = 2 * rem
    if twice < den:
        return q
    if twice > den:
        return q + 1
    return q + 1 if upper else q


def _param_bits(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


def _predicted_exact_bits(spec: SystemSpec, p0: int, k: int) -> int:
    """Upper estimate of the numerator size after ``k`` exact steps."""
    if spec.kind in ("doubling", "tent"):
        return max(p0, 1)
    if spec.kind == "rotation":
        return max(p0, 1) + _param_bits(spec.alpha)
    par = _param_bits(spec.lam if spec.kind == "logistic" else spec.c)
    if spec.kind == "affine_quadratic":
        par += _param_bits(spec.bound)
    if k > 64:
        return 1 << 80
    return (abs(p0) + par + 2) << k


# ---------------------------------------------------------------------------
# exact orbits


def _exact_orbit(spec: SystemSpec, x: Fraction, k: int) -> Fraction:
    kind = spec.kind
    if kind in ("doubling", "tent") and is_dyadic(x):
        p = dyadic_precision(x)
        N = 1 << p
        m = int(x * N)
        if kind == "doubling":
            for _ in range(k):
                m = (m << 1) & (N - 1)
        else:
            for _ in range(k):
                m = m << 1
                if m > N:
                    m = 2 * N - m
        return Fraction(m, N)
    if kind == "rotation":
        a = spec.alpha
        D = x.denominator * a.denominator // math.gcd(x.denominator, a.denominator)
        m = x.numerator * (D // x.denominator)
        s = a.numerator * (D // a.denominator)
        for _ in range(k):
            m = (m + s) % D
        return Fraction(m, D)
    if kind in ("logistic", "affine_quadratic") and is_dyadic(x):
        par = spec.lam if kind == "logistic" else spec.c
        if is_dyadic(par):
            return _exact_dyadic_poly(spec, x, k)
    for _ in range(k):
        x = map_exact(spec, x)
    return x


def _exact_dyadic_poly(spec: SystemSpec, x: Fraction, k: int) -> Fraction:
    """Logistic and quadratic orbits on mantissa/exponent integers."""
    e = dyadic_precision(x)
    m = int(x * (1 << e))
    if spec.kind == "logistic":
        lb = dyadic_precision(spec.lam)
        lm = int(spec.lam * (1 << lb))
        for _ in range(k):
            m = lm * m * ((1 << e) - m)
            e = 2 * e + lb
            if m:
                tz = min((m & -m).bit_length() - 1, e)
                m >>= tz
                e -= tz
            else:
                e = 0
    else:
        cb = dyadic_precision(spec.c)
        cm = int(spec.c * (1 << cb))
        for _ in range(k):
            m = (m * m << cb) + (cm << (2 * e))
            e = 2 * e + cb
            if m:
                tz = min((m & -m).bit_length() - 1, e)
                m >>= tz
                e -= tz
            else:
                e = 0
    return Fraction(m, 1 << e)


# ---------------------------------------------------------------------------
# fixed-point orbits


def _approx_orbit(spec: SystemSpec, M: int, w: int, k: int) -> int:
    """Iterate ``k`` steps on the integer ``M`` (value ``M * 2**-w``), rounding each step to ``w``.

    Each step returns the nearest precision-``w`` point to the true image of
    the current value, so the per-step error is at most ``2**-(w+1)``.
    """
    kind = spec.kind
    N = 1 << w
    if kind == "doubling":
        for _ in range(k):
            M = (M << 1) & (N - 1)
        return M
    if kind == "tent":
        for _ in range(k):
            M <<= 1
            if M > N:
                M = 2 * N - M
        return M
    if kind == "rotation":
        a = spec.alpha
        if isinstance(a, QuadraticIrrational):
            A = a.nearest_scaled(w)
        else:
            A = _nearest(a.numerator * N, a.denominator)
        for _ in range(k):
            M = (M + A) % N
        return M
    if kind == "logistic":
        p, q = spec.lam.numerator, spec.lam.denominator
        den = q * N
        for _ in range(k):
            M = _nearest(p * M * (N - M), den)
        return M
    if kind == "affine_quadratic":
        cp, cq = spec.c.numerator, spec.c.denominator
        lo, hi = grid_index_range(spec.space.axes[0], w)
        den = cq * N
        cN2 = cp * N * N
        for _ in range(k):
            M = _nearest(M * M * cq + cN2, den)
            M = min(max(M, lo), hi)
        return M
    raise ValidationError(f"unknown kind {kind!r}")


def _budget(L: Dyadic, k: int, w: int) -> Fraction:
    """Replay ``e_{i+1} = L e_i + 2**-w`` from ``e_0 = 0``."""
    e = Fraction(0)
    s = pow2(-w)
    Lf = L.to_fraction()
    for _ in range(k):
        e = Lf * e + s
    return e


def _near_boundary(v: Fraction, axis, r: int, err: Fraction) -> bool:
    """Whether a rounding boundary of the precision-``r`` grid lies within ``err`` of ``v``."""
    t = v * pow2(r) - Fraction(1, 2)
    nearest_boundary = Fraction(round(t)) + Fraction(1, 2)
    return abs(v - nearest_boundary * pow2(-r)) <= err


def _as_start(start) -> GridPoint:
    if isinstance(start, GridPoint):
        return start
    v = as_point(start)
    p = max(dyadic_precision(c) for c in v)
    return GridPoint(tuple(int(c * (1 << p)) for c in v), p)


def discretize_orbit(
    system,
    start=None,
    k: Optional[int] = None,
    r: Optional[int] = None,
    *,
    mode: str = "auto",
    max_bits: int = DEFAULT_MAX_BITS,
    max_precision: int = DEFAULT_MAX_PRECISION,
    tie: TieRule = LOWER,
    counters: Optional[Counters] = None,
):
    """``D_r(T^k(x))`` for a grid start ``x``.

    Accepts either an ``OrbitRequest`` or ``(system, start, k, r)``.  ``mode``
    is ``"auto"``, ``"exact"`` or ``"approx"``.  Auto uses exact rational
    iteration whenever the system supports it and the predicted numerator
    size fits ``max_bits``.  Returns ``(GridPoint, PrecisionTrace)``.

    In approximate mode the result is within ``2**-r`` of the true orbit
    point, and equals ``D_r`` of it unless the trace is flagged ambiguous.
    """
    if isinstance(system, OrbitRequest):
        req = system
    else:
        req = OrbitRequest(system, _as_start(start), k, r)
    spec, g, k, r = req.system, req.start, req.k, req.r
    if mode not in ("auto", "exact", "approx"):
        raise ValidationError(f"unknown mode {mode!r}")
    if spec.dim != 1:
        raise ValidationError("only one-dimensional systems are supported")
    axis = spec.space.axes[0]
    x = spec.space.normalize(g.values())[0]
    p0 = dyadic_precision(x)
    if counters is not None:
        counters.orbits += 1
        counters.map_steps += k

    use_exact = False
    if mode != "approx" and exact_capable(spec):
        bits = _predicted_exact_bits(spec, p0, k)
        if bits <= max_bits:
            use_exact = True
        elif mode == "exact":
            raise ResourceLimit(f"exact orbit needs about {bits} bits, cap is {max_bits}")
    elif mode == "exact":
        raise ResourceLimit(f"{spec.id} has no exact evaluator")

    if use_exact:
        z = _exact_orbit(spec, x, k)
        m = round_axis(z, axis, r, tie)
        trace = PrecisionTrace("exact", None, None, Fraction(0), True, False, z.numerator.bit_length())
        return GridPoint((m,), r), trace

    L = lipschitz_bound(spec)
    w = max(working_precision(L, k, r), p0)
    if w > max_precision:
        raise ResourceLimit(f"working precision {w} exceeds cap {max_precision}")
    M = _approx_orbit(spec, x.numerator << (w - p0), w, k)
    v = Fraction(M, 1 << w)
    err = _budget(L, k, w)
    m = round_axis(v, axis, r, tie)
    amb = bool(err) and _near_boundary(v, axis, r, err)
    trace = PrecisionTrace("approx", w, Dyadic(1, w), err, False, amb, w)
    return GridPoint((m,), r), trace


# ---------------------------------------------------------------------------
# function discretizers


@dataclass(frozen=True)
class FunctionSpec:
    """An exactly computable map ``f: domain -> codomain``.

    ``fn`` takes and returns tuples of Fractions.  ``precision_shift`` relates
    grids: the discretization at precision ``r`` lands on the codomain grid at
    ``r + precision_shift`` (``2 - 4x`` maps the ``r``-grid of [0,1] onto the
    ``(r-2)``-grid of [-2,2], so its shift is -2).
    """

    name: str
    domain: SpaceSpec
    codomain: SpaceSpec
    fn: Callable = field(compare=False)
    precision_shift: int = 0
    min_precision: int = 0
    affine: Optional[tuple] = None  # (a, b) for 1-D affine maps

    def __call__(self, x) -> tuple:
        return tuple(self.fn(self.domain.normalize(x)))

    @classmethod
    def affine_map(cls, a, b, domain: SpaceSpec, codomain: SpaceSpec, name: Optional[str] = None) -> "FunctionSpec":
        a, b = as_fraction(a), as_fraction(b)
        if a == 0:
            raise ValidationError("affine map needs a != 0")
        shift = -_ceil_log2(abs(a)) if _is_pow2(abs(a)) else 0
        return cls(
            name or f"{a}*x+{b}",
            domain,
            codomain,
            lambda v, a=a, b=b: tuple(a * c + b for c in v),
            shift,
            _affine_min_precision(b, shift),
            (a, b),
        )

    @classmethod
    def square(cls, domain: Optional[SpaceSpec] = None) -> "FunctionSpec":
        domain = domain or SpaceSpec.interval(0, 1)
        return cls("x^2", domain, domain, lambda v: tuple(c * c for c in v))

    @classmethod
    def rotation(cls, alpha) -> "FunctionSpec":
        alpha = as_fraction(alpha)
        alpha = alpha - math.floor(alpha)
        circ = SpaceSpec.circle()
        mp = dyadic_precision(alpha) if is_dyadic(alpha) else 0
        return cls(
            f"x+{alpha}",
            circ,
            circ,
            lambda v, a=alpha: tuple((c + a) % 1 for c in v),
            0,
            mp,
        )

    @classmethod
    def from_system(cls, spec: SystemSpec) -> "FunctionSpec":
        return cls(spec.id, spec.space, spec.space, lambda v, s=spec: (map_exact(s, v[0]),))


def _is_pow2(x: Fraction) -> bool:
    return x > 0 and x.numerator & (x.numerator - 1) == 0 and x.denominator & (x.denominator - 1) == 0


def _two_adic_valuation(x: Fraction) -> int:
    n, d = x.numerator, x.denominator
    return ((n & -n).bit_length() - 1) - ((d & -d).bit_length() - 1)


def _affine_min_precision(b: Fraction, shift: int) -> int:
    # images of grid points land on the shifted grid once b does
    if b == 0 or not is_dyadic(b):
        return 0
    return max(0, -_two_adic_valuation(b) - shift)


def discretize_function(f: FunctionSpec, x, l: int, tie: TieRule = LOWER) -> GridPoint:
    """``D_l(f(x))`` for a grid point ``x`` of ``f``'s domain."""
    v = as_point(x)
    if not f.domain.contains(v) and not all(isinstance(a, Circle) for a in f.domain.axes):
        raise DomainError(f"{x} outside the domain of {f.name}")
    y = f(v)
    return round_to_grid(y, f.codomain, l, tie)


@dataclass
class InversePairReport:
    ok: bool
    checked: int
    precisions: tuple
    violation: Optional[dict] = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "precisions": list(self.precisions), "violation": self.violation}


def validate_inverse_pair(
    f: FunctionSpec, f_inv: FunctionSpec, r_max: int, *, r_min: Optional[int] = None, tie: TieRule = LOWER
) -> InversePairReport:
    """Exhaustively check ``M_f o M_finv = M_finv o M_f = Id`` on grids up to ``r_max``.

    Precisions start at ``f.min_precision`` unless ``r_min`` is given.  A map
    that sends two grid points to one image is reported as a collision.
    """
    lo = f.min_precision if r_min is None else r_min
    checked = 0
    done = []

    def fail(info):
        return InversePairReport(False, checked, tuple(done), info)

    for r in range(lo, r_max + 1):
        rc = r + f.precision_shift
        seen = {}
        for g in grid_points(f.domain, r):
            try:
                y = discretize_function(f, g, rc, tie)
                back = discretize_function(f_inv, y, r, tie)
            except DomainError as exc:
                return fail({"kind": "domain", "r": r, "x": str(g), "detail": str(exc)})
            if y in seen:
                return fail({"kind": "collision", "r": r, "x": str(seen[y]), "x2": str(g), "image": str(y)})
            seen[y] = g
            checked += 1
            if back != g:
                return fail({"kind": "finv_after_f", "r": r, "x": str(g), "image": str(y), "back": str(back)})
        for y in grid_points(f.codomain, rc):
            try:
                x = discretize_function(f_inv, y, r, tie)
                back = discretize_function(f, x, rc, tie)
            except DomainError as exc:
                return fail({"kind": "domain", "r": r, "y": str(y), "detail": str(exc)})
            checked += 1
            if back != y:
                return fail({"kind": "f_after_finv", "r": r, "y": str(y), "image": str(x), "back": str(back)})
        done.append(r)
    return InversePairReport(True, checked, tuple(done))
