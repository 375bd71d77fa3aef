"""Executable box-model semantics for a pure-Prolog subset.

The package traces resolution through the classical four ports (Call,
Exit, Redo, Fail), rebuilds the observable proof-tree states back from
the emitted trace, verifies that the two always agree, and hosts the
three classical backtracking trace disciplines side by side.
"""

from .terms import (
    BOTTOM,
    Clause,
    ParseError,
    Program,
    Struct,
    Term,
    Var,
    VarNames,
    apply_subst,
    compose,
    format_term,
    parse_program,
    parse_term,
    rename_clause,
    unify,
)
from .engine import (
    EPSILON,
    DeterminismViolation,
    NodeId,
    RuleId,
    RunResult,
    VirtualState,
    applicable_rule,
    box_init,
    greatest_choice_point,
    has_choice_point,
    init_state,
    lpath,
    may_have_new_brother,
    run_virtual,
    step,
    updated_pred,
)
from .tracing import (
    Port,
    TraceEvent,
    TraceResult,
    extract_event,
    format_event,
    format_trace,
    parse_event,
    parse_trace,
    run_actual_trace,
)
from .rebuild import (
    AmbiguousOrUndecidable,
    CondViolation,
    MalformedTrace,
    ReconstructionResult,
    RestrictedState,
    format_restricted,
    identify_rule,
    initial_restricted,
    reconstruct_step,
    reconstruct_trace,
    restrict,
)
from .adequacy import (
    HARD_FORBIDDEN,
    AdequacyReport,
    check_adequacy,
    check_cond_exclusivity,
    check_port_sequence,
    derive_port_table,
    port_warnings,
)
from .multimodel import (
    ExtendedState,
    ExtRuleId,
    ModelComparison,
    ModelId,
    ModelRun,
    compare_models,
    init_extended,
    run_model,
    step_extended,
)
from .corpus import corpus, program_source, random_program

__version__ = "0.1.0"
