#!/usr/bin/env python3
"""Rebuild the proof-tree states from a trace alone.

A trace is adequate when a reader who knows only the initial goal can
replay it into the same tree/numbering/labeling states the machine went
through.  Rebuilding needs one event of lookahead (how the r attribute
moves tells which rule fired) and never reads the depth attribute.
"""

import dataclasses

from byrdbox import (
    format_restricted,
    format_trace,
    initial_restricted,
    parse_term,
    parse_trace,
    parse_program,
    reconstruct_trace,
    run_actual_trace,
    VarNames,
)

PROGRAM = """
c1: goal :- p(X), eq(X,b).
c2: p(a).
c3: p(b).
c4: eq(X,X).
:- goal.
"""

program = parse_program(PROGRAM)
trace_text = format_trace(run_actual_trace(program, 100).events)
print("the trace, as it would sit in a file:\n")
print(trace_text)

# Round-trip through the text format, as an external reader would.
events = parse_trace(trace_text)
q0 = initial_restricted(parse_term("goal"))
result = reconstruct_trace(q0, events)

print(f"\nrebuilt {len(result.states) - 1} states after the initial one")
names = VarNames()
for label, q in [("initial", result.states[0]), ("final", result.states[-1])]:
    print(f"\n{label} state (current node starred):")
    print(format_restricted(q, names))

# The depth column is decoration: zero it out, nothing changes.
zeroed = [dataclasses.replace(e, l=0) for e in events]
assert list(reconstruct_trace(q0, zeroed).states) == list(result.states)
print("\nzeroing the depth attribute rebuilt the exact same states")
