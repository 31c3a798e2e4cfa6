"""Toolkit for synthesizing and executing goal-oriented dialogue agents.

Declarative action libraries are compiled into planning problems whose
solutions are dialogue plans: directed graphs executed turn by turn by an
orchestrator that mirrors the conversation context into planning fluents.
"""

from .model import (
    FONDProblem,
    Formula,
    NDAction,
    Outcome,
    State,
    applicable,
    apply_outcome,
    eval_formula,
    formula_text,
    outcome,
    state,
)
from .pddl import ground, parse_domain, parse_problem, print_domain, print_problem
from .plan import (
    DialoguePlan,
    compile_plan,
    from_json,
    resolve_branch,
    to_dot,
    to_json,
    to_json_text,
)
from .planner import (
    FONDSolution,
    PlanningBudgetExceeded,
    Unsolvable,
    ValidationReport,
    enumerate_reachable,
    solve,
    validate,
)

__all__ = [
    "FONDProblem",
    "FONDSolution",
    "Formula",
    "NDAction",
    "Outcome",
    "DialoguePlan",
    "PlanningBudgetExceeded",
    "State",
    "Unsolvable",
    "ValidationReport",
    "applicable",
    "apply_outcome",
    "compile_plan",
    "enumerate_reachable",
    "eval_formula",
    "formula_text",
    "from_json",
    "ground",
    "outcome",
    "parse_domain",
    "parse_problem",
    "print_domain",
    "print_problem",
    "resolve_branch",
    "solve",
    "state",
    "to_dot",
    "to_json",
    "to_json_text",
    "validate",
]
