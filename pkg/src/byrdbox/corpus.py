"""Random small programs for property checks.

Programs are kept deliberately tiny (at most 6 predicates, 3 clauses per
predicate, 3 body atoms) and clause heads are linear: no variable occurs
twice in a head.  Together with clause renaming that keeps every
unification the engine performs acyclic, so the missing occur check is
never observable.  Recursion is allowed; runs that spin are cut off by
fuel and simply skipped by callers that only care about halting runs.
"""

from __future__ import annotations

import random

from .terms import Clause, Program, Struct, Var

__all__ = ["random_program", "corpus", "program_source"]

_CONSTANTS = [Struct("a"), Struct("b"), Struct("c")]


def _head_args(rng, arity, varpool):
    args = []
    for i in range(arity):
        if rng.random() < 0.55:
            args.append(rng.choice(_CONSTANTS))
        else:
            args.append(Var(f"{varpool}{i}"))
    return tuple(args)


def _body_arg(rng, head_vars, extra_vars):
    roll = rng.random()
    if roll < 0.45 and head_vars:
        return rng.choice(head_vars)
    if roll < 0.60:
        return rng.choice(extra_vars)
    return rng.choice(_CONSTANTS)


def random_program(rng: random.Random) -> Program:
    n_preds = rng.randint(1, 6)
    names = [f"p{i}" for i in range(n_preds)]
    arities = {name: rng.randint(0, 2) for name in names}

    clauses = []
    counter = 0
    for idx, name in enumerate(names):
        for _ in range(rng.randint(1, 3)):
            counter += 1
            head = Struct(name, _head_args(rng, arities[name], "X"))
            head_vars = sorted(
                {a for a in head.args if isinstance(a, Var)},
                key=lambda v: v.name,
            )
            extra_vars = [Var("Y0"), Var("Y1")]
            body = []
            n_goals = rng.choice([0, 0, 1, 1, 2, 3])
            for _ in range(n_goals):
                # mostly call later predicates so that most runs halt;
                # the rest may recurse and get cut off by fuel
                later = names[idx + 1 :]
                if later and rng.random() < 0.8:
                    callee = rng.choice(later)
                else:
                    callee = rng.choice(names)
                args = tuple(
                    _body_arg(rng, head_vars, extra_vars)
                    for _ in range(arities[callee])
                )
                body.append(Struct(callee, args))
            clauses.append(Clause(f"c{counter}", head, tuple(body)))

    goal_name = rng.choice(names)
    goal_args = tuple(
        rng.choice(_CONSTANTS) if rng.random() < 0.7 else Var(f"G{i}")
        for i in range(arities[goal_name])
    )
    return Program(tuple(clauses), Struct(goal_name, goal_args))


def corpus(count: int, seed: int = 20240601):
    """A reproducible stream of `count` random programs."""
    rng = random.Random(seed)
    return [random_program(rng) for _ in range(count)]


def _source_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(_source_term(a) for a in t.args)})"


def program_source(program: Program) -> str:
    """Render a program back to its file syntax."""
    lines = []
    for c in program.clauses:
        head = _source_term(c.head)
        if c.body:
            body = ",".join(_source_term(b) for b in c.body)
            lines.append(f"{c.id}: {head} :- {body}.")
        else:
            lines.append(f"{c.id}: {head}.")
    lines.append(f":- {_source_term(program.goal)}.")
    return "\n".join(lines) + "\n"
