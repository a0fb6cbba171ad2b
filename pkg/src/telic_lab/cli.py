"""``telic-lab`` command line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dyadic import GridPoint, as_fraction
from .errors import TelicError, ParseError

EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _n_range(text: str) -> list:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n range {text!r}; use 'a..b' or a comma list")


def _eps(text: str):
    from .telic import Template

    t = Template.parse(text)
    if t.coef:
        raise argparse.ArgumentTypeError("eps must be a constant such as 2^-4 or 1/16")
    return t.const


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _orbit_kw(args) -> dict:
    return {"max_bits": args.max_bits, "max_precision": args.max_precision}


def cmd_iterate(args) -> int:
    from .discretize import discretize_orbit
    from .harness import load_system

    spec = load_system(args.system)
    try:
        start = GridPoint.parse(args.start)
    except (TelicError, ValueError):
        start = tuple(as_fraction(s) for s in args.start.split(","))
    g, trace = discretize_orbit(spec, start, args.k, args.r, mode=args.mode, **_orbit_kw(args))
    _emit(args, json.dumps({"point": str(g), "trace": trace.to_json()}) + "\n")
    return 0


def cmd_decide(args) -> int:
    from .harness import load_instance
    from .solvers import auto_decide, brute_force_decide, pullback_decide

    inst = load_instance(args.instance)
    if args.solver == "brute":
        d = brute_force_decide(inst, args.n, cap_bits=args.cap_bits, **_orbit_kw(args))
    elif args.solver == "pullback":
        d = pullback_decide(inst, args.n)
    else:
        d = auto_decide(inst, args.n, cap_bits=args.cap_bits, **_orbit_kw(args))
    _emit(args, f"{d}\n")
    return 0


def cmd_reduce(args) -> int:
    from .harness import load_instance
    from .reductions import ConjugacySpec, conjugate_instance, shift_instance

    inst = load_instance(args.instance)
    if (args.conjugacy is None) == (args.shift is None):
        raise _UsageError("reduce needs exactly one of --conjugacy or --shift")
    if args.conjugacy is not None:
        try:
            obj = json.loads(Path(args.conjugacy).read_text())
        except OSError as exc:
            raise ParseError(f"{args.conjugacy}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.conjugacy}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        out = conjugate_instance(inst, ConjugacySpec.from_json(obj), validate=not args.no_validate)
    else:
        out = shift_instance(inst, args.shift)
    _emit(args, json.dumps(out.to_json(), indent=2) + "\n")
    return 0


def cmd_check_reduction(args) -> int:
    from .harness import load_instance
    from .reductions import check_reduction

    rep = check_reduction(load_instance(args.a), load_instance(args.b), args.n_max, n_min=args.n_min)
    _emit(args, rep.to_csv())
    if not rep.ok:
        print(f"answers differ at n = {', '.join(map(str, rep.disagreements))}", file=sys.stderr)
        return 1
    return 0


def cmd_entropy(args) -> int:
    from .entropy import entropy_estimate
    from .harness import load_system

    rep = entropy_estimate(load_system(args.system), args.n, args.eps, args.r)
    _emit(args, rep.to_csv())
    if rep.undersampled:
        print("warning: grid too coarse for the largest n; counts may be undercounted", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    from .harness import ExperimentPlan, run_bench

    plan = ExperimentPlan(
        instances=args.instance,
        n_range=args.n,
        solvers=args.solver,
        out=args.out,
        cap_bits=args.cap_bits,
        max_bits=args.max_bits,
        max_precision=args.max_precision,
        timeout_ms=args.timeout_ms,
    )
    _, text = run_bench(plan)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_check(args) -> int:
    from .harness import SUITES, run_checks
    from .reductions import ConjugacySpec

    if args.suite != "all" and args.suite not in SUITES:
        raise _UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    phi = None
    if args.conjugacy:
        phi = ConjugacySpec.from_json(json.loads(Path(args.conjugacy).read_text()))
    reports = run_checks(args.suite, seed=args.seed, conjugacy=phi)
    _emit(args, "\n".join(r.summary() for r in reports) + "\n")
    return 0 if all(r.ok for r in reports) else 1


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-bits", type=int, default=1 << 20, help="cap on exact mantissa bits")
    common.add_argument("--max-precision", type=int, default=1 << 20, help="cap on working precision")
    common.add_argument("--timeout-ms", type=int, default=None, help="wall-clock budget for bench")
    common.add_argument("--out", default=None, help="write primary output here instead of stdout")

    p = _Parser(prog="telic-lab", description="Discretized dynamics and telic reachability experiments.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("iterate", parents=[common], help="discretized orbit of one grid point")
    s.add_argument("--system", required=True, help="JSON file, inline JSON, or catalog name")
    s.add_argument("--start", required=True, help="grid point such as '(3)@4'")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--mode", choices=["auto", "exact", "approx"], default="auto")
    s.set_defaults(func=cmd_iterate)

    s = sub.add_parser("decide", parents=[common], help="decide an instance at one n")
    s.add_argument("--instance", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--solver", choices=["brute", "pullback", "auto"], default="auto")
    s.add_argument("--cap-bits", type=int, default=24)
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("reduce", parents=[common], help="transform an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--conjugacy", default=None)
    s.add_argument("--shift", type=int, default=None)
    s.add_argument("--no-validate", action="store_true", help="skip conjugacy validation")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("check-reduction", parents=[common], help="compare answers of two instances")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--n-min", type=int, default=1)
    s.set_defaults(func=cmd_check_reduction)

    s = sub.add_parser("entropy", parents=[common], help="separated-set growth")
    s.add_argument("--system", required=True)
    s.add_argument("--eps", type=_eps, required=True)
    s.add_argument("--n", type=_n_range, required=True)
    s.add_argument("--r", type=int, required=True)
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("bench", parents=[common], help="time and count solver runs")
    s.add_argument("--instance", action="append", required=True)
    s.add_argument("--n", type=_n_range, required=True)
    s.add_argument("--solver", action="append", choices=["brute", "pullback", "auto"], default=None)
    s.add_argument("--cap-bits", type=int, default=24)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("check", parents=[common], help="run invariant suites")
    s.add_argument("--suite", default="all")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--conjugacy", default=None, help="conjugacy JSON for the reductions suite")
    s.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "solver", "") is None:
        args.solver = ["brute"]
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"telic-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TelicError as exc:
        print(f"telic-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
