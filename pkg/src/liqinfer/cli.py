"""Command-line driver: parse a tiny-ML file, normalize, infer a liquid
intersection type for every val binding, and print the results.

Exit codes: 0 success, 1 parse error (including unreadable input), 2
inference failure, 3 solver error, 4 arm-cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .anf import normalize
from .inference import ArmCapExceeded, Inferencer, InferenceFailure
from .metatheory import (
    default_qualifiers,
    run_oracle_agreement,
    run_subject_reduction,
)
from .parser import ParseError, parse_program
from .shapes import ShapeError
from .subtyping import LogEntry
from .syntax import Env, LiqError, render_refinement, render_scheme, render_term
from .validity import SolverError, ValidityEngine, run_solver

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFER = 2
EXIT_SOLVER = 3
EXIT_CAP = 4

SMT_CMD_ENV = "LIQINFER_SMT_CMD"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liqinfer",
        description="Infer liquid intersection types for tiny-ML programs.",
    )
    sub = parser.add_subparsers(dest="command")

    infer_p = sub.add_parser("infer", help="infer types for every val binding in a file")
    infer_p.add_argument("file", help="tiny-ML input file")
    _engine_flags(infer_p)
    infer_p.add_argument("--emit-anf", action="store_true",
                         help="also print the A-normalized program")
    infer_p.add_argument("--emit-constraints", action="store_true",
                         help="also print generated atomic constraints with verdicts")
    infer_p.add_argument("--json", action="store_true",
                         help="machine-readable output (bindings with arm lists)")
    infer_p.add_argument("--max-arms", type=int, default=4096,
                         help="cap on fresh template size (default 4096)")

    meta_p = sub.add_parser("check-metatheory",
                            help="run the subject-reduction and oracle-agreement suites")
    meta_p.add_argument("--trials", type=int, default=100)
    meta_p.add_argument("--fuel", type=int, default=100)
    meta_p.add_argument("--bound", type=int, default=4)
    meta_p.add_argument("--seed", type=int, default=0)
    _engine_flags(meta_p)
    return parser


def _engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--smt-cmd", default=None,
                   help="external solver command template; {file} expands to a "
                        f"script path, otherwise stdin is used (default ${SMT_CMD_ENV})")
    p.add_argument("--backend", choices=("builtin", "external", "both"), default="builtin")
    p.add_argument("--prover-timeout", type=float, default=5.0,
                   help="seconds per external query (default 5)")
    p.add_argument("--nonlinear", action="store_true",
                   help="emit real products instead of the uninterpreted times symbol")


def _make_engine(args: argparse.Namespace) -> ValidityEngine:
    cmd = args.smt_cmd or os.environ.get(SMT_CMD_ENV)
    engine = ValidityEngine(
        backend=args.backend,
        smt_cmd=cmd,
        timeout=args.prover_timeout,
        nonlinear_external=args.nonlinear,
    )
    if args.backend in ("external", "both"):
        if not cmd:
            raise SolverError("external backend selected but no solver command given "
                              f"(use --smt-cmd or ${SMT_CMD_ENV})")
        probe = "(set-logic QF_UFLIA)\n(check-sat)\n"
        run_solver(cmd, probe, args.prover_timeout)
    return engine


def _run_infer(args: argparse.Namespace) -> int:
    try:
        text = open(args.file, encoding="utf-8").read()
    except OSError as e:
        print(f"error: cannot read {args.file}: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        program = parse_program(text)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        engine = _make_engine(args)
    except (SolverError, TimeoutError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER

    log: Optional[list[LogEntry]] = [] if args.emit_constraints else None
    inferencer = Inferencer(
        program.qualifiers,
        engine,
        max_arms=args.max_arms,
        constraint_log=log,
    )
    env = Env()
    results = []
    for name, term in program.bindings:
        anf_term = normalize(term)
        if args.emit_anf:
            print(f"-- anf: val {name} = {render_term(anf_term)}")
        try:
            scheme = inferencer.infer(env, anf_term)
        except ArmCapExceeded as e:
            print(f"arm cap exceeded at {name!r}: {e}", file=sys.stderr)
            return EXIT_CAP
        except (InferenceFailure, ShapeError) as e:
            print(f"inference failure at {name!r}: {e}", file=sys.stderr)
            return EXIT_INFER
        except LiqError as e:
            print(f"inference failure at {name!r}: {e}", file=sys.stderr)
            return EXIT_INFER
        results.append((name, scheme))
        env = env.extend(name, scheme)

    if args.emit_constraints and log is not None:
        for entry in log:
            print(f"-- {entry.kind}: {entry.description}  [{'ok' if entry.verdict else 'fail'}]")
    if args.json:
        from .syntax import render_arm

        payload = {
            "qualifiers": [render_refinement(q) for q in program.qualifiers],
            "bindings": [
                {
                    "name": name,
                    "type": render_scheme(scheme),
                    "arms": [render_arm(a) for a in scheme.body.arms],
                    "quantifiers": list(scheme.qvars),
                }
                for name, scheme in results
            ],
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for name, scheme in results:
            print(f"{name} : {render_scheme(scheme)}")
    return EXIT_OK


def _run_metatheory(args: argparse.Namespace) -> int:
    try:
        engine = _make_engine(args)
    except (SolverError, TimeoutError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    qualifiers = default_qualifiers()
    print(f"qualifiers: {', '.join(render_refinement(q) for q in qualifiers)}")

    agreement = run_oracle_agreement(args.trials, bound=args.bound, seed=args.seed,
                                     engine=engine)
    print(
        f"oracle agreement: {agreement.queries} queries, "
        f"{agreement.valid} valid, {agreement.invalid} invalid, "
        f"{agreement.unknown} unknown, {agreement.unsound} unsound"
    )

    suite = run_subject_reduction(
        args.trials, fuel=args.fuel, qualifiers=qualifiers,
        seed=args.seed, bound=args.bound, engine=engine,
    )
    print(
        f"subject reduction: {suite.trials} trials, "
        f"{suite.violations} violations, {suite.stuck} stuck, "
        f"{suite.timeouts} timeouts, {suite.recheck_failures} recheck failures"
    )
    if agreement.unsound or not suite.ok:
        for tr in suite.reports:
            if not tr.ok:
                print(f"  failed: {render_term(tr.term)}: {tr.failure}")
        return EXIT_INFER
    print("metatheory checks passed")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("infer", "check-metatheory", "-h", "--help"):
        argv = ["infer"] + argv
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "infer":
        return _run_infer(args)
    if args.command == "check-metatheory":
        return _run_metatheory(args)
    parser.print_help()
    return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
