"""Extraction of the emitted trace: one event per machine transition.

An event has three attributes besides its chrono and port:

    t  r  l  port  p

where r is the creation number of the node the event concerns, l its
depth (number of nodes on the root path), and p the predication.  Which
node and which predication depend on the rule that fired:

    Call1/Call2  -> current node, predication as called
    Exit1/Exit2  -> current node, predication after the successful proof
    Fail2        -> current node, predication as it was called
    Redo1/Redo2  -> the choice point being resumed, its last proved value
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .engine import (
    RuleId,
    RunResult,
    VirtualState,
    greatest_choice_point,
    lpath,
    run_virtual,
    updated_pred,
)
from .terms import ParseError, Program, Term, VarNames, format_term, parse_term

__all__ = [
    "Port",
    "TraceEvent",
    "TraceResult",
    "PORT_OF_RULE",
    "extract_event",
    "run_actual_trace",
    "format_event",
    "parse_event",
    "format_trace",
    "parse_trace",
    "debug_dump",
]


class Port(Enum):
    CALL = "Call"
    EXIT = "Exit"
    FAIL = "Fail"
    REDO = "Redo"

    def __str__(self):
        return self.value


PORT_OF_RULE = {
    RuleId.CALL1: Port.CALL,
    RuleId.CALL2: Port.CALL,
    RuleId.EXIT1: Port.EXIT,
    RuleId.EXIT2: Port.EXIT,
    RuleId.FAIL2: Port.FAIL,
    RuleId.REDO1: Port.REDO,
    RuleId.REDO2: Port.REDO,
}


@dataclass(frozen=True)
class TraceEvent:
    chrono: int
    r: int
    l: int
    port: Port
    pred: Term


@dataclass(frozen=True)
class TraceResult:
    events: tuple
    halted: bool
    run: RunResult


def extract_event(rule: RuleId, s_before: VirtualState, chrono: int) -> TraceEvent:
    """The event extracted from firing `rule` out of `s_before`."""
    u = s_before.current
    if rule in (RuleId.CALL1, RuleId.CALL2):
        node, pred = u, s_before.preds[u]
    elif rule in (RuleId.EXIT1, RuleId.EXIT2):
        node, pred = u, updated_pred(s_before, u)
    elif rule is RuleId.FAIL2:
        # A failing box reports the goal as it was called, not any value a
        # since-undone success may have written into the state.
        node, pred = u, s_before.shadow.call_preds[u]
    else:
        node = greatest_choice_point(s_before, u)
        pred = s_before.preds[node]
    return TraceEvent(
        chrono=chrono,
        r=s_before.numbers[node],
        l=lpath(s_before, node),
        port=PORT_OF_RULE[rule],
        pred=pred,
    )


def run_actual_trace(program: Program, max_steps: int) -> TraceResult:
    """Run the machine and extract one event per transition; chronos count
    from 1."""
    run = run_virtual(program, max_steps)
    events = []
    before = run.initial
    for chrono, (rule, after) in enumerate(run.transitions, start=1):
        events.append(extract_event(rule, before, chrono))
        before = after
    return TraceResult(tuple(events), run.halted, run)


# ----------------------------------------------------------------------
# Text form: one event per line, single spaces, `#` comments ignored.
# ----------------------------------------------------------------------

def format_event(e: TraceEvent, names: VarNames = None) -> str:
    return f"{e.chrono} {e.r} {e.l} {e.port} {format_term(e.pred, names)}"


def format_trace(events, names: VarNames = None) -> str:
    names = names if names is not None else VarNames()
    return "\n".join(format_event(e, names) for e in events)


def parse_event(line: str) -> TraceEvent:
    parts = line.split()
    if len(parts) != 5:
        raise ParseError(f"expected 5 fields, found {len(parts)}", 1, 1)
    try:
        chrono, r, l = int(parts[0]), int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"bad numeric field in {line!r}", 1, 1) from None
    try:
        port = Port(parts[3])
    except ValueError:
        raise ParseError(f"unknown port {parts[3]!r}", 1, 1) from None
    pred = parse_term(parts[4])
    return TraceEvent(chrono, r, l, port, pred)


def parse_trace(text: str) -> list:
    events = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        events.append(parse_event(stripped))
    return events


def debug_dump(state: VirtualState, names: VarNames = None) -> str:
    """Full-state dump for debugging; not a stable format."""
    from .engine import node_str

    names = names if names is not None else VarNames()
    rows = []
    for v in sorted(state.tree):
        rows.append(
            "  {}{} num={} pred={} box=[{}] fresh={}".format(
                node_str(v),
                " *" if v == state.current else "",
                state.numbers[v],
                format_term(state.preds[v], names),
                ",".join(c.id for c in state.boxes.get(v, ())),
                state.fresh[v],
            )
        )
    rows.append(f"  ct={state.complete} flr={state.failing}")
    return "\n".join(rows)
