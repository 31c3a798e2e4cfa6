"""Core model: formula evaluation, outcome application, applicability."""

from itertools import combinations, product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dialoplan.model import (
    And,
    FONDProblem,
    Lit,
    ModelError,
    NDAction,
    Not,
    Or,
    Outcome,
    TRUE,
    applicable,
    apply_outcome,
    conj,
    disj,
    eval_formula,
    formula_text,
    lit,
    neg,
    outcome,
    state,
)

FLUENTS = ["a", "b", "c", "d", "e"]


def brute_force_eval(f, s):
    """Independent reference evaluator: structural recursion written from the
    truth-table definition, sharing no code with eval_formula."""
    match f:
        case Lit(fluent=name, positive=True):
            return name in s
        case Lit(fluent=name, positive=False):
            return name not in s
        case And(parts=parts):
            result = True
            for p in parts:
                result = result and brute_force_eval(p, s)
            return result
        case Or(parts=parts):
            result = False
            for p in parts:
                result = result or brute_force_eval(p, s)
            return result
        case Not(sub=sub):
            return not brute_force_eval(sub, s)
    raise AssertionError(f"unknown node {f!r}")


def all_states(fluents):
    for r in range(len(fluents) + 1):
        for combo in combinations(fluents, r):
            yield frozenset(combo)


formulas = st.recursive(
    st.sampled_from(FLUENTS).map(lit) | st.sampled_from(FLUENTS).map(neg),
    lambda sub: st.one_of(
        st.lists(sub, max_size=3).map(lambda ps: And(tuple(ps))),
        st.lists(sub, max_size=3).map(lambda ps: Or(tuple(ps))),
        sub.map(Not),
    ),
    max_leaves=12,
)

states = st.frozensets(st.sampled_from(FLUENTS))


class TestEvalFormula:
    def test_true_on_empty_state(self):
        assert eval_formula(TRUE, state()) is True

    def test_literal_lookup(self):
        assert eval_formula(lit("have-number"), state("have-number")) is True
        assert eval_formula(neg("have-number"), state("have-number")) is False

    def test_disjunction_example(self):
        f = disj(lit("no-checkin"), lit("luggage-checkin-set"))
        assert eval_formula(f, state("luggage-checkin-set")) is True
        # cross-check against the exhaustive evaluator on every state over
        # the formula's fluents
        for s in all_states(["no-checkin", "luggage-checkin-set"]):
            assert eval_formula(f, s) == brute_force_eval(f, s)

    @given(formulas)
    def test_agrees_with_truth_table_evaluator(self, f):
        for s in all_states(FLUENTS):
            assert eval_formula(f, s) == brute_force_eval(f, s)

    def test_non_formula_rejected(self):
        with pytest.raises(ModelError):
            eval_formula("have-number", state())  # type: ignore[arg-type]


class TestApplyOutcome:
    def test_single_add(self):
        assert apply_outcome(state(), outcome(add=["have-number"])) == state("have-number")

    def test_add_preserves_existing(self):
        # set-algebra oracle: (s - dels) | adds
        s = state("ok-checkin")
        o = outcome(add=["luggage-checkin-set"])
        assert apply_outcome(s, o) == (s - o.deletes) | o.adds
        assert apply_outcome(s, o) == state("ok-checkin", "luggage-checkin-set")

    def test_empty_outcome_is_identity(self):
        s = state("a")
        assert apply_outcome(s, outcome()) == s

    def test_input_unmodified(self):
        s = state("a")
        apply_outcome(s, outcome(add=["b"], delete=["a"]))
        assert s == state("a")

    def test_adds_deletes_must_be_disjoint(self):
        with pytest.raises(ModelError):
            outcome(add=["a"], delete=["a"])

    @given(states, st.frozensets(st.sampled_from(FLUENTS)), st.frozensets(st.sampled_from(FLUENTS)))
    def test_idempotent(self, s, adds, dels):
        o = Outcome(adds - dels, dels - adds)
        once = apply_outcome(s, o)
        assert apply_outcome(once, o) == once

    @given(states, st.frozensets(st.sampled_from(FLUENTS)), st.frozensets(st.sampled_from(FLUENTS)))
    def test_matches_set_algebra(self, s, adds, dels):
        o = Outcome(adds - dels, dels - adds)
        assert apply_outcome(s, o) == (s - o.deletes) | o.adds


class TestApplicable:
    def test_done_style_action_on_goal_state(self):
        goal = disj(lit("no-checkin"), lit("luggage-checkin-set"))
        done = NDAction("finish", "system", goal, (outcome(),))
        assert applicable(done, state("no-checkin")) is True

    def test_negative_precondition(self):
        a = NDAction("ask", "dialogue", neg("have-number"), (outcome(),))
        assert applicable(a, state("have-number")) is False

    def test_conjunction_with_negation(self):
        pre = conj(lit("maybe-location-dest"), neg("have-location-dest"))
        confirm = NDAction("confirm-user-dest", "dialogue", pre, (outcome(),))
        s = state("maybe-location-dest")
        assert applicable(confirm, s) is True
        assert applicable(confirm, s) == eval_formula(pre, s)


class TestFormulaText:
    def test_renderings(self):
        assert formula_text(lit("a")) == "a"
        assert formula_text(neg("a")) == "(not a)"
        assert formula_text(conj(lit("a"), neg("b"))) == "(and a (not b))"
        assert formula_text(disj(lit("a"), lit("b"))) == "(or a b)"
        assert formula_text(TRUE) == "(and)"


class TestProblem:
    def test_undeclared_fluent_rejected(self):
        with pytest.raises(ModelError):
            FONDProblem(
                fluents=frozenset(["a"]),
                init=state(),
                actions=(NDAction("x", "dialogue", lit("b"), (outcome(),)),),
                goal=lit("a"),
            )

    def test_duplicate_action_names_rejected(self):
        a = NDAction("x", "dialogue", TRUE, (outcome(add=["a"]),))
        with pytest.raises(ModelError):
            FONDProblem(frozenset(["a"]), state(), (a, a), lit("a"))

    def test_bad_fluent_name_rejected(self):
        with pytest.raises(ModelError):
            FONDProblem(frozenset(["Bad_Name"]), state(), (), TRUE)

    def test_action_needs_outcome(self):
        with pytest.raises(ModelError):
            NDAction("x", "dialogue", TRUE, ())

    def test_unknown_kind_rejected(self):
        with pytest.raises(ModelError):
            NDAction("x", "robot", TRUE, (outcome(),))
