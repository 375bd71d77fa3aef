#!/usr/bin/env python3
"""One resolution, three trace disciplines.

The same program traced three ways: m1 jumps straight to the resumed
choice point (one Redo), m2 walks down to it printing a Redo per box on
the way (GNU style, and its r attribute is the node's rank in the tree),
m3 re-enters and closes every completed box in reverse order (the
original stepwise-undo discipline).
"""

from byrdbox import ModelId, VarNames, compare_models, format_event, parse_program, run_model

PROGRAM = """
goal :- q(_).
q(X) :- p1(X), p2(X), eq(X,b).
p1(X) :- p(X).
p(a).
p(b).
p(c).
p2(_).
eq(X,X).
:- goal.
"""

program = parse_program(PROGRAM)

for model in ModelId:
    run = run_model(program, model, max_steps=1000)
    print(f"--- model {model}: {len(run.events)} events")
    names = VarNames()
    for event in run.events:
        print("  " + format_event(event, names))
    print()

print(compare_models(program, 1000).summary())
print(
    """
Same solution, different verbosity: where m1 emits a single
'Redo p(a)', m2 first re-announces each box on the path down, and m3
additionally closes every completed box (Redo then Fail) on its way
back, exactly reversing the forward walk."""
)
