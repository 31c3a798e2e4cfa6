"""Dialogue plans: policy graphs compiled for execution.

A dialogue plan keeps the solution's shape but labels nodes with action
name strings and every edge with the outcome it stands for, plus that
outcome read as a formula (added fluents positively, deleted negatively,
the empty outcome as true). Goal nodes are the ones without outgoing
edges. At run time `resolve_branch` picks the edge whose outcome explains
the observed state transition.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from .model import (
    FONDProblem,
    Formula,
    Outcome,
    State,
    apply_outcome,
    formula_text,
    outcome_formula,
)
from .planner import DONE_LABEL, FONDSolution, SolutionNode, _structural_violations

logger = logging.getLogger(__name__)

PLAN_SCHEMA_VERSION = "dialoplan-plan/1"

NO_CONSISTENT_BRANCH = "no-consistent-branch"
AMBIGUOUS_BRANCHES = "ambiguous-branches"


class PlanCompileError(ValueError):
    pass


class PlanDocumentError(ValueError):
    """A plan JSON document is malformed or violates plan invariants."""


@dataclass(frozen=True)
class PlanNode:
    id: int
    action: str
    kind: str


@dataclass(frozen=True)
class PlanEdge:
    source: int
    target: int
    outcome: Outcome
    formula: Formula


@dataclass(frozen=True)
class BranchResolution:
    edge: PlanEdge | None = None
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.edge is not None


@dataclass(frozen=True)
class DialoguePlan:
    nodes: tuple[PlanNode, ...]
    edges: tuple[PlanEdge, ...]  # per-source order encodes outcome order
    initial: int
    goals: frozenset[int]

    def node(self, node_id: int) -> PlanNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def out_edges(self, node_id: int) -> tuple[PlanEdge, ...]:
        return tuple(e for e in self.edges if e.source == node_id)

    def is_goal(self, node_id: int) -> bool:
        return node_id in self.goals


def check_plan(plan: DialoguePlan) -> None:
    """Raise `PlanDocumentError` on any violated plan invariant."""
    ids = [n.id for n in plan.nodes]
    if len(set(ids)) != len(ids):
        raise PlanDocumentError("duplicate node ids")
    known = set(ids)
    if plan.initial not in known:
        raise PlanDocumentError(f"initial node {plan.initial} does not exist")
    for e in plan.edges:
        if e.source not in known or e.target not in known:
            raise PlanDocumentError(f"edge {e.source}->{e.target} references unknown node")
    sinks = known - {e.source for e in plan.edges}
    if not plan.goals:
        raise PlanDocumentError("goal set is empty")
    if sinks != plan.goals:
        raise PlanDocumentError(
            f"goal nodes must be exactly the nodes without outgoing edges; "
            f"goals={sorted(plan.goals)} sinks={sorted(sinks)}"
        )


def compile_plan(sol: FONDSolution) -> DialoguePlan:
    """Turn a validated solution graph into a dialogue plan.

    Structural soundness is re-checked here so a malformed or goal-less
    graph is rejected even if the caller skipped validation.
    """
    problems = _structural_violations(sol)
    if problems:
        raise PlanCompileError(f"solution is not structurally valid: {problems[0].detail}")
    # reject graphs with nodes that cannot reach any terminal leaf
    can_finish = {n.id for n in sol.nodes if n.is_done}
    grew = True
    while grew:
        grew = False
        for f, _, t in sol.edges:
            if f not in can_finish and t in can_finish:
                can_finish.add(f)
                grew = True
    stuck = [n.id for n in sol.nodes if n.id not in can_finish]
    if stuck:
        raise PlanCompileError(f"nodes {stuck} cannot reach any terminal leaf")

    nodes = tuple(PlanNode(n.id, n.label, n.kind) for n in sol.nodes)
    edges: list[PlanEdge] = []
    for n in sol.nodes:
        if n.is_done:
            continue
        targets = sol.edges_from(n.id)
        for oi, o in enumerate(n.action.outcomes):
            edges.append(PlanEdge(n.id, targets[oi], o, outcome_formula(o)))
    goals = frozenset(n.id for n in sol.nodes if n.is_done)
    plan = DialoguePlan(nodes, tuple(edges), sol.root, goals)
    check_plan(plan)
    return plan


def resolve_branch(
    plan: DialoguePlan, at: int, prev: State, cur: State
) -> BranchResolution:
    """Pick the outgoing edge whose outcome maps `prev` to `cur`.

    Exactly one consistent edge is the expected case. Several consistent
    edges with literally identical outcomes collapse to the first one (they
    are indistinguishable at execution time); otherwise multiple matches
    report ambiguity and zero matches report inconsistency.
    """
    if plan.is_goal(at):
        raise ValueError(f"node {at} is a goal node and has no branches")
    consistent = [e for e in plan.out_edges(at) if apply_outcome(prev, e.outcome) == cur]
    if not consistent:
        return BranchResolution(failure=NO_CONSISTENT_BRANCH)
    if len(consistent) > 1:
        outcomes = {e.outcome for e in consistent}
        if len(outcomes) == 1:
            logger.warning(
                "node %s has duplicate outcomes; taking the first of %d consistent edges",
                at,
                len(consistent),
            )
            return BranchResolution(edge=consistent[0])
        return BranchResolution(failure=AMBIGUOUS_BRANCHES)
    return BranchResolution(edge=consistent[0])


# ---------------------------------------------------------------------------
# Serialization


def to_json(plan: DialoguePlan) -> dict:
    return {
        "version": PLAN_SCHEMA_VERSION,
        "nodes": [{"id": n.id, "action": n.action, "kind": n.kind} for n in plan.nodes],
        "edges": [
            {
                "from": e.source,
                "to": e.target,
                "outcome": {"adds": sorted(e.outcome.adds), "dels": sorted(e.outcome.deletes)},
                "formula": formula_text(e.formula),
            }
            for e in plan.edges
        ],
        "initial": plan.initial,
        "goals": sorted(plan.goals),
    }


def to_json_text(plan: DialoguePlan) -> str:
    return json.dumps(to_json(plan), indent=2, sort_keys=True) + "\n"


def from_json(doc: dict) -> DialoguePlan:
    if not isinstance(doc, dict):
        raise PlanDocumentError("plan document must be an object")
    version = doc.get("version")
    if version != PLAN_SCHEMA_VERSION:
        raise PlanDocumentError(
            f"unsupported plan schema {version!r}, expected {PLAN_SCHEMA_VERSION!r}"
        )
    for key in ("nodes", "edges", "initial", "goals"):
        if key not in doc:
            raise PlanDocumentError(f"plan document missing {key!r}")
    try:
        nodes = tuple(
            PlanNode(int(n["id"]), str(n["action"]), str(n["kind"])) for n in doc["nodes"]
        )
        edges = []
        for e in doc["edges"]:
            out = Outcome(
                frozenset(e["outcome"]["adds"]), frozenset(e["outcome"]["dels"])
            )
            formula = outcome_formula(out)
            stated = e.get("formula")
            if stated is not None and stated != formula_text(formula):
                raise PlanDocumentError(
                    f"edge {e['from']}->{e['to']}: formula {stated!r} does not match "
                    f"its outcome ({formula_text(formula)!r})"
                )
            edges.append(PlanEdge(int(e["from"]), int(e["to"]), out, formula))
        plan = DialoguePlan(
            nodes, tuple(edges), int(doc["initial"]), frozenset(int(g) for g in doc["goals"])
        )
    except PlanDocumentError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanDocumentError(f"malformed plan document: {exc}") from exc
    check_plan(plan)
    return plan


def load_json_text(text: str) -> DialoguePlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanDocumentError(f"not valid JSON: {exc}") from exc
    return from_json(doc)


# ---------------------------------------------------------------------------
# Visualization


_KIND_SHAPE = {"dialogue": "box", "service": "ellipse", "system": "diamond"}


def branch_label(o: Outcome) -> str:
    """Edge annotation: literals of the outcome, `[ ]` when empty."""
    if o.empty:
        return "[ ]"
    lits = sorted(o.adds) + ["!" + f for f in sorted(o.deletes)]
    return "[" + ", ".join(lits) + "]"


def to_dot(plan: DialoguePlan) -> str:
    lines = ["digraph dialogue_plan {", "  rankdir=TB;"]
    for n in plan.nodes:
        attrs = [f'label="{n.action}"']
        if n.id in plan.goals:
            attrs.append("shape=box")
            attrs.append("peripheries=2")
        else:
            attrs.append(f"shape={_KIND_SHAPE.get(n.kind, 'box')}")
        lines.append(f"  n{n.id} [{', '.join(attrs)}];")
    for n in plan.nodes:
        out = plan.out_edges(n.id)
        branching = len(out) > 1
        for e in out:
            if branching:
                lines.append(f'  n{e.source} -> n{e.target} [label="{branch_label(e.outcome)}"];')
            else:
                lines.append(f"  n{e.source} -> n{e.target};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reconstructing a solution graph from a plan document


def solution_from_plan(problem: FONDProblem, plan: DialoguePlan) -> FONDSolution:
    """Rebuild the solution graph for a plan so it can be validated against
    a problem. Node states are recovered by propagating outcomes from the
    initial state; plans where one node would be reached with two distinct
    states are rejected.
    """
    check_plan(plan)
    actions = {a.name: a for a in problem.actions}
    node_action: dict[int, object] = {}
    edge_index: dict[int, dict[int, int]] = {}
    for n in plan.nodes:
        if n.id in plan.goals:
            if n.action != DONE_LABEL:
                raise PlanDocumentError(
                    f"goal node {n.id} is labelled {n.action!r}, expected {DONE_LABEL!r}"
                )
            node_action[n.id] = None
            continue
        if n.action not in actions:
            raise PlanDocumentError(f"node {n.id} references unknown action {n.action!r}")
        action = actions[n.action]
        node_action[n.id] = action
        remaining = list(enumerate(action.outcomes))
        idx: dict[int, int] = {}
        for pos, e in enumerate(plan.out_edges(n.id)):
            match = next((i for i, (oi, o) in enumerate(remaining) if o == e.outcome), None)
            if match is None:
                raise PlanDocumentError(
                    f"node {n.id} edge #{pos} outcome does not belong to action {n.action!r}"
                )
            oi, _ = remaining.pop(match)
            idx[pos] = oi
        if remaining:
            raise PlanDocumentError(
                f"node {n.id} is missing edges for {len(remaining)} outcome(s) of {n.action!r}"
            )
        edge_index[n.id] = idx

    states: dict[int, State] = {plan.initial: problem.init}
    order = [plan.initial]
    pos = 0
    while pos < len(order):
        nid = order[pos]
        pos += 1
        for e in plan.out_edges(nid):
            nxt = apply_outcome(states[nid], e.outcome)
            if e.target in states:
                if states[e.target] != nxt:
                    raise PlanDocumentError(
                        f"node {e.target} is reached with two distinct states; "
                        "plans must be state-deterministic"
                    )
            else:
                states[e.target] = nxt
                order.append(e.target)
    missing = {n.id for n in plan.nodes} - set(states)
    if missing:
        raise PlanDocumentError(f"nodes {sorted(missing)} unreachable from the initial node")

    nodes = tuple(
        SolutionNode(n.id, node_action[n.id], states[n.id]) for n in plan.nodes
    )
    edges: list[tuple[int, int, int]] = []
    for n in plan.nodes:
        if n.id in plan.goals:
            continue
        for pos, e in enumerate(plan.out_edges(n.id)):
            edges.append((n.id, edge_index[n.id][pos], e.target))
    edges.sort()
    return FONDSolution(nodes, tuple(edges), plan.initial)
