"""Command line front end: verify, run and schema.

Exit codes: 0 on success, 1 on verification or validation failure, 2 on I/O
or parse errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import AlgebraError, ParseError, ValidationError
from .scenario import SCENARIO_SCHEMA, load_scenario, run_scenario
from .verification import run_verification


def _parse_dims(text: str):
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse dimension range {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid dimension range {text!r}")
    return tuple(range(lo, hi + 1))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opalg",
        description="Finite-dimensional operator algebra: property verification and measurement scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run every randomized property suite")
    verify.add_argument("--dims", type=_parse_dims, default=tuple(range(2, 13)),
                        help="dimension range, e.g. 2..12 (default)")
    verify.add_argument("--trials", type=int, default=1000, help="trial budget per suite")
    verify.add_argument("--seed", type=int, default=0, help="root seed for all suites")
    verify.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiply every suite tolerance (0 forces failures)")
    verify.add_argument("--out", default=None, help="write the report here instead of stdout")

    run = sub.add_parser("run", help="execute a measurement scenario file")
    run.add_argument("scenario", help="path to a scenario file")
    run.add_argument("--samples", type=int, default=None, help="override the Monte Carlo sample count")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--out", default=None, help="write the report here instead of stdout")

    sub.add_parser("schema", help="print the scenario file schema")
    return parser


def _emit(text: str, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "schema":
            sys.stdout.write(SCENARIO_SCHEMA)
            return 0
        if args.command == "verify":
            report = run_verification(
                dims=args.dims, trials=args.trials, seed=args.seed, tol_scale=args.tol_scale
            )
            _emit(report.to_json(), args.out)
            return 0 if report.passed else 1
        if args.command == "run":
            scenario = load_scenario(args.scenario)
            report = run_scenario(scenario, samples=args.samples, seed=args.seed)
            _emit(report.render(), args.out)
            return 0 if report.sampling_ok else 1
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, AlgebraError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
