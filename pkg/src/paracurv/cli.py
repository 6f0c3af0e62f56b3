"""Command line entry point: ``paracurv {validate,run,example,conventions}``."""
from __future__ import annotations

import argparse
import sys

from .chartcalc import GeometryError, signature
from .checks import all_passed
from .definitions import BUNDLED, DefinitionError, bundled_text, resolve
from .exprcore import EvaluationError
from .paracontact import check_axioms
from .pipeline import (
    EXIT_AXIOMS,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_RUNTIME,
    RunOptions,
    conventions,
    report,
    run,
)


def _err(msg: str) -> None:
    print(f"paracurv: error: {msg}", file=sys.stderr)


def _load(spec):
    try:
        return resolve(spec)
    except DefinitionError as exc:
        _err(str(exc))
        return None


def cmd_validate(args) -> int:
    defn = _load(args.file)
    if defn is None:
        return EXIT_PARSE
    try:
        g = defn.metric_field()
        plus, minus = signature(g)
        print(f"{defn.name}: dimension {defn.dim}, signature ({plus}, {minus})")
        S = defn.structure()
        if S is None:
            print("no paracontact structure declared")
            return EXIT_OK
        reports = check_axioms(S)
    except (GeometryError, EvaluationError) as exc:
        _err(f"{defn.name}: {exc}")
        return EXIT_RUNTIME
    for r in reports:
        print(f"  [{'ok  ' if r.passed else 'FAIL'}] {r.name} (max rel {r.max_rel:.3g})")
    return EXIT_OK if all_passed(reports) else EXIT_AXIOMS


def cmd_run(args) -> int:
    defn = _load(args.file)
    if defn is None:
        return EXIT_PARSE
    opts = RunOptions(seed=args.seed, samples=args.samples, tol=args.tol)
    try:
        result = run(defn, opts)
    except (GeometryError, EvaluationError) as exc:
        _err(f"{defn.name}: {exc}")
        return EXIT_RUNTIME
    sys.stdout.write(report(result, args.format))
    return result.exit_code


def cmd_example(args) -> int:
    try:
        sys.stdout.write(bundled_text(args.name))
    except DefinitionError as exc:
        _err(str(exc))
        return EXIT_PARSE
    return EXIT_OK


def cmd_conventions(args) -> int:
    for key, value in conventions().items():
        print(f"{key}: {value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paracurv",
        description="Curvature and structure checks for almost paracontact metric manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a definition and check the structure axioms")
    p.add_argument("file", help="definition file or bundled example name")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run the full check pipeline")
    p.add_argument("file", help="definition file or bundled example name")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, default=None, help="sampling seed (default: file, then $PARACURV_SEED, then 0)")
    p.add_argument("--samples", type=int, default=None, help="number of sample points (default 32)")
    p.add_argument("--tol", type=float, default=None, help="relative tolerance (default 1e-9)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("example", help="print a bundled definition")
    p.add_argument("name", choices=BUNDLED)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("conventions", help="print the sign and normalisation conventions")
    p.set_defaults(func=cmd_conventions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
