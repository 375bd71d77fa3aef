#!/usr/bin/env python3
"""Machine-check trace adequacy, at scale.

For every transition the checker verifies three things: the rule
identified from the event pair is the rule that fired, exactly one
identification condition matched, and the rebuilt restricted state equals
the machine's state.  Random programs then probe the port algebra: three
adjacencies can never occur (Fail->Call, Call->Redo, Redo->Redo)."""

from byrdbox import check_adequacy, derive_port_table, parse_program
from byrdbox.corpus import corpus, program_source

EXAMPLE = """
c1: goal :- p(X), eq(X,b).
c2: p(a).
c3: p(b).
c4: eq(X,X).
:- goal.
"""

report = check_adequacy(parse_program(EXAMPLE), 100)
print(report.machine_line("example"))

programs = corpus(60, seed=11)
print("\none random program from the corpus:\n")
print(program_source(programs[0]))

halted = failed = 0
for i, program in enumerate(programs):
    rep = check_adequacy(program, 500)
    if rep.halted:
        halted += 1
        if not rep.passed:
            failed += 1
            print(rep.machine_line(f"random-{i}"))
print(f"{halted}/{len(programs)} runs halted, {failed} adequacy failures")

table = derive_port_table(programs, 500)
print("\nport adjacencies ever observed:")
for a, b in sorted((a.value, b.value) for a, b in table):
    print(f"  {a} -> {b}")
print("(no Fail->Call, Call->Redo or Redo->Redo anywhere)")
