"""Answer-preserving transformations between telic instances.

``conjugate_instance`` transports an instance along an affine conjugacy
``phi(T(x)) = S(phi(x))``; ``shift_instance`` moves seeds and targets back
by ``T^l`` for rotations.  ``check_reduction`` compares answer vectors.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

from .dyadic import Circle, TieRule, as_fraction, grid_points
from .discretize import FunctionSpec, InversePairReport, validate_inverse_pair
from .errors import ConfigError, NotApplicable, ValidationError
from .systems import SystemSpec, affine_quadratic, logistic, map_exact
from .telic import TelicInstance
from .algebraic import QuadraticIrrational

__all__ = [
    "ConjugacySpec",
    "ConjugacyReport",
    "logistic_quadratic",
    "identity_conjugacy",
    "validate_conjugacy",
    "conjugate_instance",
    "shift_instance",
    "ReductionReport",
    "check_reduction",
]


@dataclass(frozen=True)
class ConjugacySpec:
    """Affine conjugacy ``phi(x) = a*x + b`` from ``source`` to ``target``."""

    a: Fraction
    b: Fraction
    source: SystemSpec
    target: SystemSpec
    kind: str = "affine"

    def __post_init__(self):
        if self.kind != "affine":
            raise ConfigError(f"unsupported conjugacy kind {self.kind!r}")
        a, b = as_fraction(self.a), as_fraction(self.b)
        if a == 0:
            raise ConfigError("conjugacy needs a != 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def forward(self) -> FunctionSpec:
        return FunctionSpec.affine_map(self.a, self.b, self.source.space, self.target.space, f"phi={self.a}*x+{self.b}")

    @property
    def backward(self) -> FunctionSpec:
        return FunctionSpec.affine_map(1 / self.a, -self.b / self.a, self.target.space, self.source.space, "phi^-1")

    def inverse(self) -> "ConjugacySpec":
        return ConjugacySpec(1 / self.a, -self.b / self.a, self.target, self.source)

    def phi(self, x: Fraction) -> Fraction:
        return self.a * x + self.b

    def to_json(self) -> dict:
        return {
            "kind": "affine",
            "a": str(self.a),
            "b": str(self.b),
            "source": self.source.to_json(),
            "target": self.target.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConjugacySpec":
        if obj.get("preset") == "logistic_quadratic":
            return logistic_quadratic()
        try:
            return cls(
                as_fraction(str(obj["a"])),
                as_fraction(str(obj["b"])),
                SystemSpec.from_json(obj["source"]),
                SystemSpec.from_json(obj["target"]),
                obj.get("kind", "affine"),
            )
        except KeyError as exc:
            raise ValidationError(f"conjugacy is missing field {exc}") from exc
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad conjugacy: {exc}") from exc


def logistic_quadratic() -> ConjugacySpec:
    """``phi(x) = 2 - 4x`` carries ``4x(1-x)`` on [0,1] to ``y^2 - 2`` on [-2,2]."""
    return ConjugacySpec(Fraction(-4), Fraction(2), logistic(4), affine_quadratic(-2, 2))


def identity_conjugacy(spec: SystemSpec) -> ConjugacySpec:
    return ConjugacySpec(Fraction(1), Fraction(0), spec, spec)


@dataclass
class ConjugacyReport:
    ok: bool
    equation_checked: int
    equation_violation: Optional[dict]
    inverse: InversePairReport

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "equation_checked": self.equation_checked,
            "equation_violation": self.equation_violation,
            "inverse": self.inverse.to_json(),
        }


def _maps_into(phi: ConjugacySpec) -> bool:
    src, dst = phi.source.space.axes[0], phi.target.space.axes[0]
    if isinstance(src, Circle) or isinstance(dst, Circle):
        return isinstance(src, Circle) and isinstance(dst, Circle) and abs(phi.a) == 1
    ends = sorted((phi.phi(src.lo), phi.phi(src.hi)))
    return dst.lo <= ends[0] and ends[1] <= dst.hi


def validate_conjugacy(phi: ConjugacySpec, *, r: int = 8, r_max: int = 8, samples: int = 1000, seed: int = 0) -> ConjugacyReport:
    """Check ``phi o T = S o phi`` exactly and the discretized inverse pair.

    The equation is checked on every precision-``r`` grid point of the source
    and on ``samples`` random rationals.
    """
    if not exact_pair(phi):
        raise NotApplicable("conjugacy validation needs systems with exact rational steps")
    tgt = phi.target.space
    pts = [g.values()[0] for g in grid_points(phi.source.space, r)]
    rng = random.Random(seed)
    src = phi.source.space.axes[0]
    lo, hi = (Fraction(0), Fraction(1)) if isinstance(src, Circle) else (src.lo, src.hi)
    for _ in range(samples):
        q = rng.randrange(1, 1 << 16)
        pts.append(lo + (hi - lo) * Fraction(rng.randrange(0, q + 1), q))
    viol = None
    checked = 0
    if not _maps_into(phi):
        viol = {"kind": "range", "detail": "phi does not map the source space into the target space"}
    else:
        for x in pts:
            checked += 1
            lhs = tgt.normalize((phi.phi(map_exact(phi.source, x)),))
            rhs = tgt.normalize((map_exact(phi.target, tgt.normalize((phi.phi(x),))[0]),))
            if lhs != rhs:
                viol = {"kind": "equation", "x": str(x), "phi_T": str(lhs[0]), "S_phi": str(rhs[0])}
                break
    inv = validate_inverse_pair(phi.forward, phi.backward, r_max)
    return ConjugacyReport(viol is None and inv.ok, checked, viol, inv)


def exact_pair(phi: ConjugacySpec) -> bool:
    return not any(
        s.kind == "rotation" and isinstance(s.alpha, QuadraticIrrational) for s in (phi.source, phi.target)
    )


def _same_system(a: SystemSpec, b: SystemSpec) -> bool:
    return a.to_json() == b.to_json()


def conjugate_instance(inst: TelicInstance, phi: ConjugacySpec, *, validate: bool = True) -> TelicInstance:
    """The instance over ``phi.target`` whose answers match ``inst`` for every ``n``.

    Seeds are pushed through the discretized ``phi``; membership pulls a
    candidate endpoint back through ``phi^-1`` and runs the original test.
    When ``|a| = 2**e`` the new orbit precision is lowered by ``e`` so that
    ``phi`` maps grids onto grids exactly, and an orientation-reversing
    ``phi`` flips the tie rule so rounding commutes with it.
    """
    if not _same_system(phi.source, inst.system):
        raise ConfigError(f"conjugacy source {phi.source.id} does not match instance system {inst.system.id}")
    if validate:
        rep = validate_conjugacy(phi)
        if not rep.ok:
            raise ValidationError(f"conjugacy failed validation: {rep.equation_violation or rep.inverse.violation}")
    fwd, bwd = phi.forward, phi.backward
    tie = inst.tie.flipped() if phi.a < 0 else inst.tie
    src = {"conjugacy": phi.to_json(), "base": inst.to_json()}
    if not validate:
        src["validate"] = False
    return TelicInstance(
        system=phi.target,
        seeds=inst.seeds,
        targets=inst.targets,
        H=inst.H,
        C=inst.C,
        precision_offset=inst.precision_offset + fwd.precision_shift,
        tie=tie,
        name=(inst.name or "instance") + "|conj",
        tags=inst.tags,
        home=inst.home,
        home_tie=inst.home_tie,
        seed_tie=inst.seed_tie,
        seed_post=inst.seed_post + (fwd,),
        target_pre=inst.target_pre + (bwd,),
        source=src,
    )


def shift_instance(inst: TelicInstance, l: int) -> TelicInstance:
    """Replace seeds by ``T^-l o h`` and targets by ``T^-l(B)``.

    Only rotations by rational angles (or ``l = 0``) are supported.  When
    ``l*alpha`` is an integer the instance is returned unchanged.  Answers
    are preserved exactly whenever ``l*alpha`` lies on the seed and orbit
    grids; the tie origin moves with the shift so circle ties stay aligned.
    """
    if l == 0:
        return inst
    sysm = inst.system
    if not sysm.invertible:
        raise NotApplicable(f"shift by l={l} needs an invertible system; {sysm.id} is not")
    if isinstance(sysm.alpha, QuadraticIrrational):
        raise NotApplicable("shifted targets of an irrational rotation are not rational rectangles")
    if inst.target_pre or not _same_system(inst.home, sysm):
        raise NotApplicable("shift applies to instances posed directly on the rotation")
    delta = (l * sysm.alpha) % 1
    if delta == 0:
        return inst
    back = FunctionSpec.rotation(-delta)

    def moved(t: TieRule) -> TieRule:
        return TieRule(t.prefer_upper, t.circle_origin - delta)

    return replace(
        inst,
        targets=inst.targets.shifted(-delta),
        tie=moved(inst.tie),
        home_tie=moved(inst.home_tie),
        seed_post=inst.seed_post + (back,),
        name=(inst.name or "instance") + f"|shift{l}",
        source={"shift": l, "base": inst.to_json()},
    )


@dataclass
class ReductionReport:
    rows: list = field(default_factory=list)

    @property
    def disagreements(self) -> list:
        return [row["n"] for row in self.rows if row["answer_a"] != row["answer_b"]]

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def answers(self, side: str = "a") -> list:
        return [row[f"answer_{side}"] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["n", "answer_a", "answer_b", "witness_a", "witness_b", "witness_carries", "agree"]
        w.writerow(cols)
        for row in self.rows:
            w.writerow([row[c] for c in cols])
        return buf.getvalue()


def check_reduction(
    original: TelicInstance,
    transformed: TelicInstance,
    n_max: int,
    *,
    n_min: int = 1,
    decide: Optional[Callable] = None,
) -> ReductionReport:
    """Decide both instances for ``n_min..n_max`` and compare answers.

    ``witness_carries`` records whether the original witness (same seed
    index) also verifies on the transformed instance.
    """
    from .solvers import brute_force_decide, verify_certificate

    decide = decide or brute_force_decide
    rep = ReductionReport()
    for n in range(n_min, n_max + 1):
        da, db = decide(original, n), decide(transformed, n)
        carries = ""
        if da.yes:
            carries = verify_certificate(transformed, n, da.witness)
        rep.rows.append(
            {
                "n": n,
                "answer_a": da.answer,
                "answer_b": db.answer,
                "witness_a": "" if da.witness is None else str(da.witness_point),
                "witness_b": "" if db.witness is None else str(db.witness_point),
                "witness_carries": carries,
                "agree": da.answer == db.answer,
            }
        )
    return rep
