"""Instance files, benchmark runs and invariant check suites."""

from __future__ import annotations

import csv
import io
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .algebraic import QuadraticIrrational
from .discretize import DEFAULT_MAX_BITS, DEFAULT_MAX_PRECISION, Counters, discretize_orbit
from .dyadic import Dyadic, SpaceSpec, distance_sq, grid_points, round_to_grid
from .errors import ConfigError, InvariantViolation, NotApplicable, ParseError, ResourceLimit, TelicError, ValidationError
from .systems import SystemSpec, doubling, logistic, rotation, step_exact, tent, affine_quadratic
from .telic import SeedFamily, TargetFamily, TelicInstance, check_neighborhood_preservation

__all__ = [
    "instance_from_json",
    "load_instance",
    "save_instance",
    "load_system",
    "ExperimentPlan",
    "BenchRecord",
    "run_bench",
    "bench_csv",
    "CheckReport",
    "run_checks",
    "SUITES",
    "BENCH_COLUMNS",
]


# ---------------------------------------------------------------------------
# instance files


def instance_from_json(obj: dict, *, name: str = "") -> TelicInstance:
    """Build and validate an instance from its JSON object form."""
    from .reductions import ConjugacySpec, conjugate_instance, shift_instance

    if not isinstance(obj, dict):
        raise ParseError("instance must be a JSON object")
    if "base" in obj:
        base = instance_from_json(obj["base"], name=name)
        if "conjugacy" in obj:
            return conjugate_instance(base, ConjugacySpec.from_json(obj["conjugacy"]), validate=obj.get("validate", True))
        if "shift" in obj:
            l = obj["shift"]
            if not isinstance(l, int):
                raise ValidationError("shift must be an integer")
            return shift_instance(base, l)
        raise ValidationError("derived instance needs 'conjugacy' or 'shift'")
    for key in ("system", "seeds", "targets"):
        if key not in obj:
            raise ValidationError(f"instance is missing field '{key}'")
    system = SystemSpec.from_json(obj["system"])
    seeds = SeedFamily.from_json(obj["seeds"])
    targets = TargetFamily.from_json(obj["targets"])
    H = obj.get("H", "identity")
    if H in ("T", "map"):
        H = "map"
    elif H != "identity":
        raise ValidationError(f"H must be 'identity' or 'T', got {H!r}")
    C = obj.get("C", 1)
    tags = tuple(obj.get("tags", ()))
    return TelicInstance(system, seeds, targets, H=H, C=C, name=obj.get("name", name), tags=tags)


def load_instance(path: Union[str, Path]) -> TelicInstance:
    """Read and validate an instance file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"{p}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return instance_from_json(obj, name=p.stem)
    except TelicError as exc:
        raise type(exc)(f"{p}: {exc}") from exc


def save_instance(inst: TelicInstance, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(inst.to_json(), indent=2) + "\n")


_NAMED = {"tent": tent, "doubling": doubling, "logistic": logistic, "quadratic": affine_quadratic}


def load_system(arg: str) -> SystemSpec:
    """A system from inline JSON, a catalog name, or a JSON file."""
    s = arg.strip()
    if s.startswith("{"):
        try:
            return SystemSpec.from_json(json.loads(s))
        except json.JSONDecodeError as exc:
            raise ParseError(f"inline system: {exc.msg}") from exc
    if s in _NAMED:
        return _NAMED[s]()
    p = Path(s)
    try:
        obj = json.loads(p.read_text())
    except OSError as exc:
        raise ParseError(f"{p}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if "system" in obj and "kind" not in obj:
        obj = obj["system"]
    return SystemSpec.from_json(obj)


# ---------------------------------------------------------------------------
# benchmarks


BENCH_COLUMNS = [
    "instance",
    "n",
    "solver",
    "answer",
    "witness",
    "orbits",
    "map_steps",
    "membership_checks",
    "seed_evals",
    "wall_ms",
]


@dataclass
class ExperimentPlan:
    instances: Sequence
    n_range: Sequence[int]
    solvers: Sequence[str] = ("brute",)
    out: Optional[str] = None
    seed: int = 0
    cap_bits: int = 24
    max_bits: int = DEFAULT_MAX_BITS
    max_precision: int = DEFAULT_MAX_PRECISION
    timeout_ms: Optional[int] = None

    def __post_init__(self):
        for name in ("cap_bits", "max_bits", "max_precision"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.timeout_ms is not None and self.timeout_ms <= 0:
            raise ConfigError("timeout_ms must be positive")
        bad = [s for s in self.solvers if s not in ("brute", "pullback", "auto")]
        if bad:
            raise ConfigError(f"unknown solver(s): {', '.join(bad)}")


@dataclass
class BenchRecord:
    instance: str
    n: int
    solver: str
    answer: str
    witness: str
    counters: Counters
    wall_ms: float
    trace: dict = field(default_factory=dict)

    def row(self) -> list:
        c = self.counters
        return [
            self.instance,
            self.n,
            self.solver,
            self.answer,
            self.witness,
            c.orbits,
            c.map_steps,
            c.membership_checks,
            c.seed_evals,
            f"{self.wall_ms:.3f}",
        ]


def _resolve(inst) -> tuple:
    if isinstance(inst, TelicInstance):
        return inst.name or str(inst), inst
    loaded = load_instance(inst)
    return loaded.name or Path(inst).stem, loaded


def run_bench(plan: ExperimentPlan) -> tuple:
    """Run every (instance, n, solver) cell; return ``(records, csv_text)``.

    Cells that hit a resource cap get answer ``CAPPED``; once the wall-clock
    budget is spent the remaining cells get ``TIMEOUT``.  Solvers that
    disagree on a cell raise ``InvariantViolation`` with both decisions.
    """
    from .solvers import auto_decide, brute_force_decide, pullback_decide

    orbit_kw = {"max_bits": plan.max_bits, "max_precision": plan.max_precision}
    records = []
    start = time.perf_counter()
    for item in plan.instances:
        label, inst = _resolve(item)
        for n in plan.n_range:
            answers = {}
            for solver in plan.solvers:
                c = Counters()
                if plan.timeout_ms is not None and (time.perf_counter() - start) * 1000 > plan.timeout_ms:
                    records.append(BenchRecord(label, n, solver, "TIMEOUT", "", c, 0.0))
                    continue
                t0 = time.perf_counter()
                try:
                    if solver == "brute":
                        d = brute_force_decide(inst, n, cap_bits=plan.cap_bits, counters=c, **orbit_kw)
                    elif solver == "pullback":
                        d = pullback_decide(inst, n, counters=c)
                    else:
                        d = auto_decide(inst, n, counters=c, cap_bits=plan.cap_bits)
                except ResourceLimit:
                    records.append(BenchRecord(label, n, solver, "CAPPED", "", c, (time.perf_counter() - t0) * 1000))
                    continue
                except NotApplicable:
                    records.append(BenchRecord(label, n, solver, "N/A", "", c, (time.perf_counter() - t0) * 1000))
                    continue
                ms = (time.perf_counter() - t0) * 1000
                wit = "" if d.witness is None else str(d.witness_point)
                records.append(BenchRecord(label, n, solver, d.answer, wit, c, ms, d.trace))
                answers[solver] = d
            if len({d.answer for d in answers.values()}) > 1:
                dump = "; ".join(f"{s}: {d}" for s, d in answers.items())
                raise InvariantViolation(f"solvers disagree on {label} at n={n}: {dump}")
    records.sort(key=lambda r: (r.instance, r.n, r.solver))
    text = bench_csv(records)
    if plan.out:
        Path(plan.out).write_text(text)
    return records, text


def bench_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# invariant suites


@dataclass
class CheckReport:
    suite: str
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, what: str, repro: str) -> None:
        self.failures.append(f"{what}  [reproduce: {repro}]")

    def summary(self) -> str:
        head = f"{self.suite}: {'PASS' if self.ok else 'FAIL'} ({self.checks} checks)"
        return "\n".join([head] + [f"  {f}" for f in self.failures])


def _suite_dyadic(rep: CheckReport, rng: random.Random) -> None:
    for _ in range(300):
        a = Dyadic(rng.getrandbits(512) - (1 << 511), rng.randrange(0, 600))
        b = Dyadic(rng.getrandbits(512) - (1 << 511), rng.randrange(0, 600))
        c = Dyadic(rng.getrandbits(64), rng.randrange(0, 80))
        rep.checks += 1
        if (a + b) - b != a or a * (b + c) != a * b + a * c or (a * b) * c != a * (b * c):
            rep.fail(f"ring law failed for {a}, {b}, {c}", "telic-lab check --suite dyadic")
            return
    for space in (SpaceSpec.interval(0, 1), SpaceSpec.circle(), SpaceSpec.circle(2)):
        for r in range(0, 5):
            pts = list(grid_points(space, r))
            for k in range(0, 1 << (r + 2)):
                x = tuple(Fraction(k + j, 1 << (r + 2)) % 1 if j else Fraction(k, 1 << (r + 2)) for j in range(space.dim))
                if not space.contains(x):
                    continue
                g = round_to_grid(x, space, r)
                best = min(distance_sq(space, p, x) for p in pts)
                rep.checks += 1
                if distance_sq(space, g, x) != best or round_to_grid(g, space, r) != g:
                    rep.fail(f"rounding not nearest/idempotent at {x}, r={r}", "telic-lab check --suite dyadic")
                    return


def _catalog() -> list:
    return [doubling(), tent(), logistic(4), rotation(Fraction(1, 3)), rotation(QuadraticIrrational(-1, 1, 1, 2)), affine_quadratic(-2, 2)]


def _suite_discretize(rep: CheckReport, rng: random.Random) -> None:
    from .systems import exact_capable, map_exact
    import mpmath

    for spec in _catalog():
        for r in range(0, 5):
            for g in grid_points(spec.space, r):
                for k in range(0, 7):
                    out, tr = discretize_orbit(spec, g, k, r)
                    if exact_capable(spec):
                        z = g.values()[0]
                        for _ in range(k):
                            z = map_exact(spec, z)
                        ok = out == round_to_grid((z,), spec.space, r) if tr.exact else abs(out.values()[0] - z) <= Fraction(1, 1 << r)
                    else:
                        with mpmath.workprec(4 * (r + k + 8)):
                            a = mpmath.sqrt(2) - 1
                            z = (mpmath.mpf(g.values()[0].numerator) / g.values()[0].denominator + k * a) % 1
                            d = abs(mpmath.mpf(out.values()[0].numerator) / out.values()[0].denominator - z)
                            ok = min(d, 1 - d) <= mpmath.mpf(2) ** (-r)
                    rep.checks += 1
                    if not ok:
                        rep.fail(
                            f"{spec.id}: start {g} k={k} r={r} gave {out}",
                            f"telic-lab iterate --system '{json.dumps(spec.to_json())}' --start '{g}' --k {k} --r {r}",
                        )
                        return


def _suite_telic(rep: CheckReport, rng: random.Random) -> None:
    fams = [SeedFamily(), SeedFamily("square"), SeedFamily("affine", a=("1/2",), b=("1/4",)), SeedFamily("affine", d=2, a=("-1/2",), b=("3/4",))]
    for fam in fams:
        for n in range(1, 12 // fam.d + 1):
            rep.checks += 1
            res = check_neighborhood_preservation(fam, n)
            if not res.ok:
                rep.fail(f"{fam.kind} d={fam.d} fails at n={n}: {res.violation}", "telic-lab check --suite telic")
                return


def _rotation_instances(rng: random.Random, count: int) -> list:
    out = []
    for i in range(count):
        q = rng.choice([3, 4, 5, 6, 7, 8, 10, 12])
        alpha = Fraction(rng.randrange(1, q), q)
        lo = Fraction(rng.randrange(0, 64), 64)
        width = rng.choice(["0", "2^-n", "3*2^-n", "1/16", "1/5"])
        fam = rng.choice([SeedFamily(), SeedFamily("square"), SeedFamily("affine", a=("1/2",), b=("1/4",))])
        out.append(
            TelicInstance(
                rotation(alpha), fam, TargetFamily.interval(str(lo), f"{lo} + {width}"), C=rng.choice([1, 2]), name=f"rot{i}"
            )
        )
    return out


def _suite_solvers(rep: CheckReport, rng: random.Random) -> None:
    from .solvers import brute_force_decide, pullback_decide, verify_certificate

    for inst in _rotation_instances(rng, 8):
        for n in range(1, 9):
            b, p = brute_force_decide(inst, n), pullback_decide(inst, n)
            rep.checks += 1
            if b.answer != p.answer or (p.yes and not verify_certificate(inst, n, p.witness)):
                rep.fail(f"{inst.name} n={n}: brute {b} vs pullback {p}", "telic-lab check --suite solvers")
                return


def _logistic_instances() -> list:
    out = []
    for lo, hi in [("0", "2^-n"), ("1/3", "1/3 + 2^-n"), ("3/4", "3/4"), ("1/2", "1/2 + 2^-n"), ("5/8", "5/8 + 2^-n")]:
        for fam in (SeedFamily(), SeedFamily("square")):
            out.append(TelicInstance(logistic(4), fam, TargetFamily.interval(lo, hi), name=f"logistic[{lo},{hi}]/{fam.kind}"))
    return out


def _suite_reductions(rep: CheckReport, rng: random.Random, conjugacy=None) -> None:
    from .reductions import check_reduction, conjugate_instance, logistic_quadratic

    phi = conjugacy or logistic_quadratic()
    for inst in _logistic_instances()[:4]:
        other = conjugate_instance(inst, phi, validate=conjugacy is None)
        res = check_reduction(inst, other, 8)
        rep.checks += 1
        if not res.ok:
            rep.fail(
                f"{inst.name}: answers differ at n={res.disagreements}",
                "telic-lab check-reduction --a <instance> --b <reduced> --n-max 8",
            )


def _suite_entropy(rep: CheckReport, rng: random.Random) -> None:
    from .entropy import exact_max_separated, greedy_separated_set, orbit_table

    for spec, r in ((tent(), 5), (doubling(), 6), (rotation(Fraction(1, 3)), 6), (logistic(4), 5)):
        tab = orbit_table(spec, 4, r)
        for n in range(1, 5):
            for eps in (Fraction(1, 4), Fraction(1, 8), Fraction(3, 16)):
                g = len(greedy_separated_set(spec, n, eps, r, table=tab))
                hi = exact_max_separated(spec, n, eps, r, table=tab)
                lo = exact_max_separated(spec, n, 2 * eps, r, table=tab)
                rep.checks += 1
                if not lo <= g <= hi:
                    rep.fail(f"{spec.id} n={n} eps={eps}: {lo} <= {g} <= {hi} fails", "telic-lab check --suite entropy")
                    return


def _suite_systems(rep: CheckReport, rng: random.Random) -> None:
    for spec in _catalog():
        L = spec.lipschitz.to_fraction()
        pts = [g.values()[0] for g in grid_points(spec.space, 8)]
        for x in pts:
            rep.checks += 1
            try:
                y = step_exact(spec, x)[0] if spec.kind != "rotation" or isinstance(spec.alpha, Fraction) else None
            except TelicError:
                y = None
            if y is not None and not spec.space.contains((y,)) and spec.kind not in ("doubling", "rotation"):
                rep.fail(f"{spec.id} maps {x} outside its space", "telic-lab check --suite systems")
                return
        for _ in range(200):
            x, z = rng.choice(pts), rng.choice(pts)
            if spec.kind == "rotation" and not isinstance(spec.alpha, Fraction):
                continue
            fx, fz = step_exact(spec, x)[0], step_exact(spec, z)[0]
            rep.checks += 1
            if distance_sq(spec.space, (fx,), (fz,)) > L * L * distance_sq(spec.space, (x,), (z,)):
                rep.fail(f"{spec.id}: Lipschitz bound {L} fails at {x}, {z}", "telic-lab check --suite systems")
                return


SUITES = {
    "dyadic": _suite_dyadic,
    "systems": _suite_systems,
    "discretize": _suite_discretize,
    "telic": _suite_telic,
    "solvers": _suite_solvers,
    "reductions": _suite_reductions,
    "entropy": _suite_entropy,
}


def run_checks(suite: str = "all", *, seed: int = 0, conjugacy=None) -> list:
    """Run one invariant suite (or ``"all"``) and return a list of ``CheckReport``."""
    if suite != "all" and suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(['all', *SUITES])}")
    names = list(SUITES) if suite == "all" else [suite]
    reports = []
    for name in names:
        rep = CheckReport(name)
        rng = random.Random(seed)
        if name == "reductions":
            _suite_reductions(rep, rng, conjugacy)
        else:
            SUITES[name](rep, rng)
        reports.append(rep)
    return reports
