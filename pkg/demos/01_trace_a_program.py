#!/usr/bin/env python3
"""Trace a small program through the four ports.

Every goal the resolution touches is a box with four ports: Call on the
way in, Exit on success, Redo when backtracking re-enters it, Fail when
it is out of alternatives.  The tracer emits one event per port crossing:

    chrono  r  l  port  predication

where r is the box's creation number and l its depth in the proof tree.
"""

from byrdbox import VarNames, format_event, parse_program, run_actual_trace

PROGRAM = """
c1: goal :- p(X), eq(X,b).
c2: p(a).
c3: p(b).
c4: eq(X,X).

:- goal.
"""

program = parse_program(PROGRAM)
result = run_actual_trace(program, max_steps=100)

print("program:")
print(PROGRAM)
print(f"run halted: {result.halted}, {len(result.events)} events\n")

names = VarNames()
for event in result.events:
    print("  " + format_event(event, names))

print(
    """
Reading the trace: p(X) first succeeds with p(a) (events 2-3), but
eq(a,b) cannot match eq(X,X) (events 4-5).  Backtracking re-enters the
p box (Redo, event 6), the second clause gives p(b), and eq(b,b) goes
through, so the whole goal exits (event 10)."""
)
