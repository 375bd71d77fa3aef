"""Command-line front end: trace, reconstruct, verify, compare."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .adequacy import check_adequacy
from .multimodel import ModelId, compare_models, run_model
from .rebuild import (
    CondViolation,
    MalformedTrace,
    format_restricted,
    initial_restricted,
    reconstruct_trace,
)
from .terms import ParseError, VarNames, parse_program, parse_term
from .tracing import format_event, parse_trace, run_actual_trace

__all__ = ["main", "cmd_trace", "cmd_reconstruct", "cmd_verify", "cmd_compare"]


def _emit(text: str, output):
    if output:
        Path(output).write_text(text + ("\n" if text else ""), encoding="utf-8")
    else:
        print(text)


def _load_program(path: str):
    return parse_program(Path(path).read_text(encoding="utf-8"))


def cmd_trace(args) -> int:
    try:
        program = _load_program(args.program)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.model == "m1":
        result = run_actual_trace(program, args.max_steps)
        events, halted = result.events, result.halted
    else:
        run = run_model(program, ModelId(args.model), args.max_steps)
        events, halted = run.events, run.halted
    names = VarNames()
    _emit("\n".join(format_event(e, names) for e in events), args.output)
    return 0 if halted else 2


def cmd_reconstruct(args) -> int:
    try:
        goal = parse_term(args.goal)
        events = parse_trace(Path(args.trace).read_text(encoding="utf-8"))
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    q0 = initial_restricted(goal)
    try:
        result = reconstruct_trace(q0, events, final_peek=args.final_peek)
    except (MalformedTrace, CondViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    names = VarNames()
    blocks = []
    for i, q in enumerate(result.states):
        blocks.append(f"q{i}")
        blocks.append(format_restricted(q, names))
    if not result.final_known:
        blocks.append(f"q{len(result.states)}")
        blocks.append("  unknown (final event needs a successor)")
    _emit("\n".join(blocks), args.output)
    return 0


def cmd_verify(args) -> int:
    paths = []
    if args.corpus:
        paths = sorted(Path(args.corpus).glob("*.pl"))
        if not paths:
            print(f"error: no .pl files in {args.corpus}", file=sys.stderr)
            return 1
    else:
        paths = [Path(args.program)]
    worst = 0
    lines = []
    for path in paths:
        try:
            program = parse_program(path.read_text(encoding="utf-8"))
        except (ParseError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        report = check_adequacy(program, args.max_steps)
        lines.append(report.machine_line(path.name))
        if not report.passed:
            worst = 1
            if report.first_divergence:
                step, fieldname, want, got = report.first_divergence
                lines.append(f"  divergence at step {step} on {fieldname}:")
                lines.append(f"    expected {want}")
                lines.append(f"    rebuilt  {got}")
            for step, conds in report.cond_violations:
                lines.append(f"  condition violation at step {step}: {conds}")
            for pos, pair in report.port_violations:
                lines.append(f"  forbidden ports at {pos}: {pair[0]}->{pair[1]}")
    _emit("\n".join(lines), args.output)
    return worst


def cmd_compare(args) -> int:
    try:
        program = _load_program(args.program)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    comparison = compare_models(program, args.max_steps)
    _emit(comparison.summary(), args.output)
    ok = comparison.m1_in_m2 and comparison.m2_in_m3 and all(
        comparison.halted.values()
    )
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="byrdbox",
        description="Four-port tracer for a pure-Prolog subset",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--max-steps", type=int, default=10000)
        p.add_argument("--output", default=None)

    p = sub.add_parser("trace", help="emit the trace of a program run")
    p.add_argument("--program", required=True)
    p.add_argument("--model", choices=["m1", "m2", "m3"], default="m1")
    common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("reconstruct", help="rebuild restricted states from a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--final-peek", action="store_true")
    common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", help="check trace adequacy for a program")
    p.add_argument("--program")
    p.add_argument("--corpus", help="directory of .pl programs to verify")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="run all three trace models")
    p.add_argument("--program", required=True)
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and not args.program and not args.corpus:
        parser.error("verify needs --program or --corpus")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
