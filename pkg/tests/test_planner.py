"""Solver and validator behaviour on small hand-checkable problems."""

import pytest

from dialoplan.model import (
    FONDProblem,
    NDAction,
    TRUE,
    conj,
    lit,
    neg,
    outcome,
    state,
)
from dialoplan.planner import (
    FONDSolution,
    PlanningBudgetExceeded,
    SolutionNode,
    Unsolvable,
    enumerate_reachable,
    solve,
    validate,
)


class TestSolve:
    def test_goal_already_true_yields_single_done_node(self):
        p = FONDProblem(frozenset(["g"]), state("g"), (), lit("g"))
        sol = solve(p)
        assert len(sol.nodes) == 1
        assert sol.nodes[0].is_done
        assert sol.nodes[0].id == sol.root
        assert sol.edges == ()

    def test_luggage_plan_shape(self, luggage_problem):
        sol = solve(luggage_problem)
        labels = sorted(n.label for n in sol.nodes)
        assert labels == [
            "Done",
            "Done",
            "ask-checkin-luggage",
            "ask-how-many",
            "set-luggage-checkin",
        ]
        assert len(sol.nodes) == 5
        by_label = {n.label: n for n in sol.nodes if not n.is_done}
        ask = by_label["ask-checkin-luggage"]
        how_many = by_label["ask-how-many"]
        # both question nodes keep a self-loop for the no-progress outcome
        assert sol.edges_from(ask.id)[3] == ask.id
        assert sol.edges_from(how_many.id)[1] == how_many.id
        assert validate(luggage_problem, sol).valid

    def test_cyclic_solution_when_no_acyclic_exists(self, coin_flip):
        sol = solve(coin_flip)
        # exhaustive check of the 2-state space: the only policy assigns
        # try-flip at {} and terminates at {g}; its bad outcome loops back,
        # so any solution must contain a cycle
        assert len(sol.nodes) == 2
        flip_node = next(n for n in sol.nodes if not n.is_done)
        done_node = next(n for n in sol.nodes if n.is_done)
        assert flip_node.action.name == "try-flip"
        assert sol.edges_from(flip_node.id) == {0: done_node.id, 1: flip_node.id}
        assert validate(coin_flip, sol).valid

    def test_unsolvable_when_goal_never_added(self):
        a = NDAction("noop", "system", TRUE, (outcome(add=["p"]),))
        p = FONDProblem(frozenset(["p", "g"]), state(), (a,), lit("g"))
        with pytest.raises(Unsolvable):
            solve(p)

    def test_dead_end_outcome_prunes_action(self):
        # risky's bad outcome reaches a state with no way forward; the
        # strong-cyclic fixpoint must fall back to the safe action
        risky = NDAction(
            "risky",
            "service",
            conj(neg("g"), neg("dead")),
            (outcome(add=["g"]), outcome(add=["dead"])),
        )
        safe = NDAction("safe", "service", neg("dead"), (outcome(add=["g"]),))
        p = FONDProblem(frozenset(["g", "dead"]), state(), (risky, safe), lit("g"))
        sol = solve(p)
        used = {n.label for n in sol.nodes if not n.is_done}
        assert used == {"safe"}
        assert validate(p, sol).valid

    def test_budget_exceeded(self, luggage_problem):
        with pytest.raises(PlanningBudgetExceeded):
            solve(luggage_problem, max_expansions=1)

    def test_deterministic_output(self, luggage_problem):
        assert solve(luggage_problem) == solve(luggage_problem)

    def test_policy_is_function_of_state(self, luggage_problem):
        sol = solve(luggage_problem)
        states = [n.state for n in sol.nodes]
        assert len(states) == len(set(states))


class TestEnumerateReachable:
    def test_single_done(self):
        p = FONDProblem(frozenset(["g"]), state("g"), (), lit("g"))
        sol = solve(p)
        assert enumerate_reachable(p, sol) == {(state("g"), sol.root)}

    def test_luggage_one_pair_per_node(self, luggage_problem):
        sol = solve(luggage_problem)
        pairs = enumerate_reachable(luggage_problem, sol)
        assert len(pairs) == 5
        assert {nid for _, nid in pairs} == {n.id for n in sol.nodes}

    def test_cyclic_two_pairs(self, coin_flip):
        sol = solve(coin_flip)
        assert len(enumerate_reachable(coin_flip, sol)) == 2


class TestValidate:
    def test_root_inapplicable_flagged(self, coin_flip):
        flip = coin_flip.actions[0]
        wrong = NDAction("wrong", "service", lit("g"), (outcome(),))
        p = FONDProblem(frozenset(["g"]), state(), (flip, wrong), lit("g"))
        sol = FONDSolution(
            nodes=(
                SolutionNode(0, wrong, state()),
                SolutionNode(1, None, state("g")),
            ),
            edges=((0, 0, 1),),
            root=0,
        )
        report = validate(p, sol)
        assert not report.valid
        assert any(v.property == "root-applicable" for v in report.violations)

    def test_cycle_without_exit_flagged_leaf_reachable(self):
        # root branches into a finishing region and a closed spin cycle;
        # property 3 must fail exactly for the spinning pair
        choose = NDAction(
            "choose", "dialogue", TRUE, (outcome(add=["p"]), outcome(add=["q"]))
        )
        spin = NDAction("spin", "system", lit("q"), (outcome(),))
        prob = FONDProblem(
            frozenset(["p", "q"]), state(), (choose, spin), lit("p")
        )
        sol = FONDSolution(
            nodes=(
                SolutionNode(0, choose, state()),
                SolutionNode(1, None, state("p")),
                SolutionNode(2, spin, state("q")),
            ),
            edges=((0, 0, 1), (0, 1, 2), (2, 0, 2)),
            root=0,
        )
        report = validate(prob, sol)
        assert not report.valid
        assert [v.property for v in report.violations] == ["leaf-reachable"]
        assert report.violations[0].node == 2

    def test_structural_missing_outcome_edge(self, coin_flip):
        flip = coin_flip.actions[0]
        sol = FONDSolution(
            nodes=(
                SolutionNode(0, flip, state()),
                SolutionNode(1, None, state("g")),
            ),
            edges=((0, 0, 1),),  # second outcome has no edge
            root=0,
        )
        report = validate(coin_flip, sol)
        assert not report.valid
        assert all(v.property == "structural" for v in report.violations)

    def test_dangling_edge_is_violation_not_exception(self, coin_flip):
        flip = coin_flip.actions[0]
        sol = FONDSolution(
            nodes=(SolutionNode(0, flip, state()),),
            edges=((0, 0, 7), (0, 1, 0)),
            root=0,
        )
        report = validate(coin_flip, sol)
        assert not report.valid
        assert any("unknown node" in v.detail for v in report.violations)

    def test_solve_output_validates_on_fixtures(self, luggage_problem, coin_flip):
        for p in (luggage_problem, coin_flip):
            report = validate(p, solve(p))
            assert report.valid
            assert report.violations == ()

    def test_node_count_bounded_by_states_plus_terminals(self, luggage_problem, coin_flip):
        from dialoplan.fixtures import make_fixture

        problems = [luggage_problem, coin_flip] + [
            make_fixture(n).ground_problem()
            for n in ("trip", "career", "trip-intents")
        ]
        for p in problems:
            sol = solve(p)
            states = {s for s, _ in enumerate_reachable(p, sol)}
            terminals = sum(1 for n in sol.nodes if n.is_done)
            assert len(sol.nodes) <= len(states) + terminals
