"""Strong-cyclic planner and plan validator.

`solve` runs a forward exploration of the reachable state space followed by
an iterative fixpoint that prunes state/action pairs which either escape the
candidate set or cannot reach the goal inside it. What remains is the
maximal strong-cyclic policy; a concrete policy is extracted from it by
always picking an action with at least one outcome strictly closer to the
goal, so the result never loses goal reachability.

`validate` is deliberately independent of the solver: it re-derives the
reachable (state, node) pairs directly from the returned graph with the
plain model-level operations and checks the three solution properties
(root applicability, applicability at every reachable pair, leaf
reachability), plus the structural shape of the graph.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .model import (
    And,
    FONDProblem,
    Formula,
    Lit,
    NDAction,
    Not,
    Or,
    Outcome,
    State,
    apply_outcome,
    applicable,
    eval_formula,
)

DONE_LABEL = "Done"


class Unsolvable(Exception):
    """No strong-cyclic solution exists for the problem."""


class PlanningBudgetExceeded(Exception):
    """The node or time budget ran out before the search finished."""


@dataclass(frozen=True)
class SolutionNode:
    """A policy node: the action applied at `state`. `action` is None for
    the synthesized terminal action (labelled `Done`), which has no
    outgoing edges and whose implicit precondition is the goal."""

    id: int
    action: NDAction | None
    state: State

    @property
    def is_done(self) -> bool:
        return self.action is None

    @property
    def label(self) -> str:
        return DONE_LABEL if self.action is None else self.action.name

    @property
    def kind(self) -> str:
        return "system" if self.action is None else self.action.kind


@dataclass(frozen=True)
class FONDSolution:
    """Directed policy graph. Each non-terminal node has exactly one
    outgoing edge per outcome of its action; edges are (from, outcome
    index, to) triples kept in a canonical sorted order."""

    nodes: tuple[SolutionNode, ...]
    edges: tuple[tuple[int, int, int], ...]
    root: int

    def node(self, node_id: int) -> SolutionNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def edges_from(self, node_id: int) -> dict[int, int]:
        """outcome index -> target node id"""
        return {i: t for f, i, t in self.edges if f == node_id}

    @property
    def done_nodes(self) -> tuple[SolutionNode, ...]:
        return tuple(n for n in self.nodes if n.is_done)


@dataclass(frozen=True)
class Violation:
    property: str  # root-applicable | all-applicable | leaf-reachable | structural
    detail: str
    node: int | None = None
    state: State | None = None


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


# ---------------------------------------------------------------------------
# Solving


def _compile_formula(f: Formula, index: dict[str, int]) -> Callable[[frozenset[int]], bool]:
    if isinstance(f, Lit):
        i = index[f.fluent]
        if f.positive:
            return lambda s: i in s
        return lambda s: i not in s
    if isinstance(f, And):
        subs = tuple(_compile_formula(p, index) for p in f.parts)
        return lambda s: all(fn(s) for fn in subs)
    if isinstance(f, Or):
        subs = tuple(_compile_formula(p, index) for p in f.parts)
        return lambda s: any(fn(s) for fn in subs)
    if isinstance(f, Not):
        sub = _compile_formula(f.sub, index)
        return lambda s: not sub(s)
    raise TypeError(f"not a formula: {f!r}")


def solve(
    problem: FONDProblem,
    *,
    max_expansions: int = 1_000_000,
    max_seconds: float = 60.0,
) -> FONDSolution:
    """Compute a strong-cyclic solution as a policy graph.

    Raises `Unsolvable` if none exists and `PlanningBudgetExceeded` when the
    expansion or time budget runs out first.
    """
    t0 = time.monotonic()
    index = {f: i for i, f in enumerate(sorted(problem.fluents))}
    names = sorted(problem.fluents)
    goal_fn = _compile_formula(problem.goal, index)
    acts = [
        (
            a,
            _compile_formula(a.precondition, index),
            tuple(
                (frozenset(index[f] for f in o.adds), frozenset(index[f] for f in o.deletes))
                for o in a.outcomes
            ),
        )
        for a in problem.actions
    ]

    init = frozenset(index[f] for f in problem.init)

    # Phase 1: forward closure over all applicable actions. Goal states are
    # terminal (the policy will stop there) and are not expanded.
    pairs: dict[frozenset[int], list[tuple[int, tuple[frozenset[int], ...]]]] = {}
    goal_states: dict[frozenset[int], None] = {}  # insertion-ordered set
    queue: deque[frozenset[int]] = deque([init])
    seen = {init}
    expansions = 0
    while queue:
        s = queue.popleft()
        if goal_fn(s):
            goal_states[s] = None
            continue
        expansions += 1
        if expansions > max_expansions:
            raise PlanningBudgetExceeded(f"more than {max_expansions} state expansions")
        if expansions % 1024 == 0 and time.monotonic() - t0 > max_seconds:
            raise PlanningBudgetExceeded(f"time budget of {max_seconds}s exceeded")
        row = []
        for ai, (a, pre_fn, outs) in enumerate(acts):
            if not pre_fn(s):
                continue
            succs = tuple((s - dels) | adds for adds, dels in outs)
            row.append((ai, succs))
            for t in succs:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        pairs[s] = row

    # Phase 2: iterative strong-cyclic fixpoint. Drop pairs that leave the
    # candidate set, then states that cannot reach the goal inside it.
    goal_set = set(goal_states)
    changed = True
    while changed:
        changed = False
        alive = {s for s, row in pairs.items() if row} | goal_set
        for s, row in pairs.items():
            kept = [(ai, succs) for ai, succs in row if all(t in alive for t in succs)]
            if len(kept) != len(row):
                pairs[s] = kept
                changed = True
        connected = set(goal_set)
        grew = True
        while grew:
            grew = False
            for s, row in pairs.items():
                if s in connected or not row:
                    continue
                if any(t in connected for _, succs in row for t in succs):
                    connected.add(s)
                    grew = True
        for s, row in pairs.items():
            if row and s not in connected:
                pairs[s] = []
                changed = True

    solvable = {s for s, row in pairs.items() if row} | goal_set
    if init not in solvable:
        raise Unsolvable(f"no strong-cyclic solution for {problem.name!r}")

    # Distance-to-goal levels over the surviving pairs; the policy picks, per
    # state, the first declared action with an outcome at a strictly lower
    # level, which keeps the goal reachable from everywhere.
    level: dict[frozenset[int], int] = {s: 0 for s in goal_states}
    undecided = [s for s, row in pairs.items() if row]
    k = 1
    while undecided:
        newly = [
            s
            for s in undecided
            if any(t in level for _, succs in pairs[s] for t in succs)
        ]
        if not newly:
            break
        for s in newly:
            level[s] = k
        newly_set = set(newly)
        undecided = [s for s in undecided if s not in newly_set]
        k += 1

    policy: dict[frozenset[int], tuple[int, tuple[frozenset[int], ...]]] = {}
    for s, row in pairs.items():
        if not row:
            continue
        lvl = level[s]
        for ai, succs in row:
            if any(t in level and level[t] < lvl for t in succs):
                policy[s] = (ai, succs)
                break

    # Build the node graph by walking the policy from the initial state.
    def to_state(s: frozenset[int]) -> State:
        return frozenset(names[i] for i in s)

    node_ids: dict[frozenset[int], int] = {}
    nodes: list[SolutionNode] = []
    edges: list[tuple[int, int, int]] = []
    walk: deque[frozenset[int]] = deque([init])
    node_ids[init] = 0
    while walk:
        s = walk.popleft()
        nid = node_ids[s]
        if s in goal_set:
            nodes.append(SolutionNode(nid, None, to_state(s)))
            continue
        ai, succs = policy[s]
        nodes.append(SolutionNode(nid, acts[ai][0], to_state(s)))
        for oi, t in enumerate(succs):
            if t not in node_ids:
                node_ids[t] = len(node_ids)
                walk.append(t)
            edges.append((nid, oi, node_ids[t]))

    # The root must have no incoming edges from other nodes (self-loops are
    # fine). When the plan genuinely cycles back to the initial state, route
    # those re-entries through a twin of the root carrying the same action.
    if any(f != 0 and t == 0 for f, _, t in edges):
        twin = len(nodes)
        nodes.append(SolutionNode(twin, nodes[0].action, nodes[0].state))
        root_edges = [(f, i, t) for f, i, t in edges if f == 0]
        edges = [
            (f, i, twin if (t == 0 and f != 0) else t) for f, i, t in edges
        ]
        edges.extend((twin, i, twin if t == 0 else t) for _, i, t in root_edges)

    nodes.sort(key=lambda n: n.id)
    edges.sort()
    return FONDSolution(tuple(nodes), tuple(edges), root=0)


# ---------------------------------------------------------------------------
# Validation


def _structural_violations(sol: FONDSolution) -> list[Violation]:
    out: list[Violation] = []
    ids = [n.id for n in sol.nodes]
    if len(set(ids)) != len(ids):
        out.append(Violation("structural", "duplicate node ids"))
        return out
    by_id = {n.id: n for n in sol.nodes}
    if sol.root not in by_id:
        out.append(Violation("structural", f"root {sol.root} is not a node"))
        return out
    for f, i, t in sol.edges:
        if f not in by_id or t not in by_id:
            out.append(Violation("structural", f"edge ({f},{i},{t}) references unknown node"))
    if out:
        return out
    incoming_others: dict[int, int] = {n.id: 0 for n in sol.nodes}
    for f, _, t in sol.edges:
        if f != t:
            incoming_others[t] += 1
    if incoming_others[sol.root] > 0:
        out.append(
            Violation("structural", "root has incoming edges from other nodes", node=sol.root)
        )
    for n in sol.nodes:
        out_edges = sol.edges_from(n.id)
        if n.is_done:
            if out_edges:
                out.append(
                    Violation("structural", f"terminal node {n.id} has outgoing edges", node=n.id)
                )
            continue
        want = set(range(len(n.action.outcomes)))
        got = set(out_edges)
        if got != want:
            out.append(
                Violation(
                    "structural",
                    f"node {n.id} ({n.label}) has edges for outcomes {sorted(got)}, "
                    f"expected one per outcome {sorted(want)}",
                    node=n.id,
                )
            )
    if not any(n.is_done for n in sol.nodes):
        out.append(Violation("structural", "no terminal (Done) leaf node"))
    # every node reachable from the root, graph-wise
    reached = {sol.root}
    stack = [sol.root]
    while stack:
        cur = stack.pop()
        for t in sol.edges_from(cur).values():
            if t not in reached:
                reached.add(t)
                stack.append(t)
    for n in sol.nodes:
        if n.id not in reached:
            out.append(Violation("structural", f"node {n.id} unreachable from root", node=n.id))
    return out


def enumerate_reachable(problem: FONDProblem, sol: FONDSolution) -> set[tuple[State, int]]:
    """Least fixpoint of (state, node) pairs from (init, root), following
    each outcome of the node's action along the matching edge."""
    by_id = {n.id: n for n in sol.nodes}
    start = (problem.init, sol.root)
    reached: set[tuple[State, int]] = {start}
    queue: deque[tuple[State, int]] = deque([start])
    while queue:
        s, nid = queue.popleft()
        node = by_id[nid]
        if node.is_done:
            continue
        targets = sol.edges_from(nid)
        for oi, o in enumerate(node.action.outcomes):
            if oi not in targets:
                continue  # structurally broken; reported by validate
            nxt = (apply_outcome(s, o), targets[oi])
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    return reached


def validate(problem: FONDProblem, sol: FONDSolution) -> ValidationReport:
    """Check the solution against the problem: structure, applicability at
    the root and at every reachable pair, and reachability of a terminal
    leaf from every reachable pair."""
    violations = _structural_violations(sol)
    if violations:
        return ValidationReport(False, tuple(violations))

    by_id = {n.id: n for n in sol.nodes}
    reachable = enumerate_reachable(problem, sol)

    for s, nid in sorted(reachable, key=lambda p: (p[1], sorted(p[0]))):
        node = by_id[nid]
        if node.state != s:
            violations.append(
                Violation(
                    "structural",
                    f"node {nid} recorded state {sorted(node.state)} but is reached in "
                    f"{sorted(s)}",
                    node=nid,
                    state=s,
                )
            )
        if node.is_done:
            ok = eval_formula(problem.goal, s)
        else:
            ok = applicable(node.action, s)
        if not ok:
            prop = (
                "root-applicable"
                if nid == sol.root and s == problem.init
                else "all-applicable"
            )
            violations.append(
                Violation(
                    prop,
                    f"action {node.label!r} not applicable in state {sorted(s)}",
                    node=nid,
                    state=s,
                )
            )

    # Leaf reachability over the reachable pair graph.
    succs: dict[tuple[State, int], list[tuple[State, int]]] = {}
    for s, nid in reachable:
        node = by_id[nid]
        if node.is_done:
            continue
        targets = sol.edges_from(nid)
        succs[(s, nid)] = [
            (apply_outcome(s, o), targets[oi])
            for oi, o in enumerate(node.action.outcomes)
            if oi in targets
        ]
    can_finish = {p for p in reachable if by_id[p[1]].is_done}
    grew = True
    while grew:
        grew = False
        for p, nxt in succs.items():
            if p not in can_finish and any(q in can_finish for q in nxt):
                can_finish.add(p)
                grew = True
    for s, nid in sorted(reachable - can_finish, key=lambda p: (p[1], sorted(p[0]))):
        violations.append(
            Violation(
                "leaf-reachable",
                f"no terminal leaf reachable from node {nid} in state {sorted(s)}",
                node=nid,
                state=s,
            )
        )

    return ValidationReport(not violations, tuple(violations))
