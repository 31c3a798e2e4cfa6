"""Parsing, printing and grounding of the PDDL subset."""

from itertools import product

import pytest

from dialoplan.model import eval_formula, formula_text
from dialoplan.pddl import (
    Atom,
    GroundingCapExceeded,
    GroundingError,
    LiftedProblem,
    ParseError,
    TypedObject,
    ground,
    ground_atom_name,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
)

LUGGAGE_DOMAIN = """
(define (domain luggage)
  (:requirements :strips :negative-preconditions :non-deterministic)
  (:predicates (ok-checkin) (no-checkin) (have-number) (luggage-checkin-set))
  (:action ask-checkin-luggage
    :parameters ()
    :precondition (and (not (ok-checkin)) (not (no-checkin)))
    :effect (oneof (no-checkin)
                   (and (ok-checkin) (have-number))
                   (ok-checkin)
                   (and)))
  (:action ask-how-many
    :parameters ()
    :precondition (and (ok-checkin) (not (have-number)))
    :effect (oneof (have-number) (and)))
  (:action set-luggage-checkin
    :kind service
    :parameters ()
    :precondition (and (ok-checkin) (have-number))
    :effect (luggage-checkin-set))
  (:action done
    :kind system
    :parameters ()
    :precondition (luggage-checkin-set)
    :effect (and)
  )
)
"""

LUGGAGE_PROBLEM = """
(define (problem luggage-1)
  (:domain luggage)
  (:init)
  (:goal (or (no-checkin) (luggage-checkin-set))))
"""

FORCED_DOMAIN = """
(define (domain forced)
  (:requirements :strips :typing :negative-preconditions :universal-preconditions
                 :non-deterministic)
  (:types followup-type reason)
  (:predicates (ok-weather) (forced-followup (?t - followup-type))
               (force-reason (?r - reason)) (goal))
  (:action check-weather
    :kind service
    :parameters ()
    :precondition (and (not (ok-weather))
                       (forall ((?t - followup-type)) (not (forced-followup ?t))))
    :effect (oneof (ok-weather)
                   (and (forced-followup dialogue) (force-reason bad-weather))))
  (:action handle-forced-dialogue
    :parameters ((?r - reason))
    :precondition (and (forced-followup dialogue) (force-reason ?r))
    :effect (and (not (forced-followup dialogue)) (not (force-reason ?r))))
  (:action finish
    :kind system
    :parameters ()
    :precondition (and (ok-weather)
                       (forall ((?t - followup-type)) (not (forced-followup ?t))))
    :effect (goal))
)
"""

FORCED_PROBLEM = """
(define (problem forced-1)
  (:domain forced)
  (:objects (dialogue - followup-type)
            (bad-weather - reason) (no-weather-service - reason) (affirm-ok - reason))
  (:init)
  (:goal (goal)))
"""


class TestParseDomain:
    def test_luggage_shape(self):
        dom = parse_domain(LUGGAGE_DOMAIN)
        assert len(dom.actions) == 4
        assert [a.name for a in dom.actions] == [
            "ask-checkin-luggage",
            "ask-how-many",
            "set-luggage-checkin",
            "done",
        ]
        assert dom.actions[0].effect_oneofs[0].branches[3] == ()  # empty self-loop branch
        assert dom.actions[2].kind == "service"

    def test_empty_action_list_is_valid(self):
        dom = parse_domain("(define (domain empty) (:predicates (p)))")
        assert dom.actions == ()

    def test_zero_arity_oneof_rejected(self):
        text = """
        (define (domain bad) (:predicates (p))
          (:action a :parameters () :precondition (p) :effect (oneof)))
        """
        with pytest.raises(ParseError):
            parse_domain(text)

    def test_unknown_requirement_rejected(self):
        with pytest.raises(ParseError, match="unknown requirement"):
            parse_domain("(define (domain d) (:requirements :adl) (:predicates (p)))")

    def test_undeclared_predicate_rejected(self):
        text = """
        (define (domain d) (:predicates (p))
          (:action a :parameters () :precondition (q) :effect (p)))
        """
        with pytest.raises(ParseError, match="undeclared predicate"):
            parse_domain(text)

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_domain("(define (domain d)\n  (:predicates (p)")
        assert err.value.line is not None

    def test_or_rejected_in_preconditions(self):
        text = """
        (define (domain d) (:predicates (p) (q))
          (:action a :parameters () :precondition (or (p) (q)) :effect (p)))
        """
        with pytest.raises(ParseError, match="goal conditions"):
            parse_domain(text)


class TestParseProblem:
    def test_luggage_problem(self):
        dom = parse_domain(LUGGAGE_DOMAIN)
        prob = parse_problem(LUGGAGE_PROBLEM, dom)
        assert prob.init == ()
        assert formula_text(ground(dom, prob).goal) == "(or no-checkin luggage-checkin-set)"

    def test_goal_with_undeclared_predicate_rejected(self):
        dom = parse_domain(LUGGAGE_DOMAIN)
        bad = LUGGAGE_PROBLEM.replace("(no-checkin)", "(nope)")
        with pytest.raises(ParseError, match="undeclared predicate"):
            parse_problem(bad, dom)

    def test_arity_mismatch_rejected(self):
        dom = parse_domain(FORCED_DOMAIN)
        bad = FORCED_PROBLEM.replace("(:init)", "(:init (force-reason))")
        with pytest.raises(ParseError, match="expects 1"):
            parse_problem(bad, dom)

    def test_undeclared_object_type_rejected(self):
        dom = parse_domain(LUGGAGE_DOMAIN)
        bad = LUGGAGE_PROBLEM.replace("(:init)", "")
        bad = bad.replace("(:domain luggage)", "(:domain luggage) (:objects (x - widget)) (:init)")
        with pytest.raises(ParseError, match="undeclared object type"):
            parse_problem(bad, dom)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "dom_text,prob_text",
        [(LUGGAGE_DOMAIN, LUGGAGE_PROBLEM), (FORCED_DOMAIN, FORCED_PROBLEM)],
    )
    def test_parse_print_parse_is_identity(self, dom_text, prob_text):
        dom = parse_domain(dom_text)
        assert parse_domain(print_domain(dom)) == dom
        prob = parse_problem(prob_text, dom)
        assert parse_problem(print_problem(prob), dom) == prob


class TestGround:
    def test_zero_parameter_schema_yields_one_action(self):
        dom = parse_domain(LUGGAGE_DOMAIN)
        prob = parse_problem(LUGGAGE_PROBLEM, dom)
        problem = ground(dom, prob)
        assert sum(1 for a in problem.actions if a.name == "ask-how-many") == 1

    def test_lifted_handler_grounds_per_reason(self):
        dom = parse_domain(FORCED_DOMAIN)
        prob = parse_problem(FORCED_PROBLEM, dom)
        problem = ground(dom, prob, prune_static=False)
        handlers = [a for a in problem.actions if a.name.startswith("handle-forced-dialogue")]
        assert len(handlers) == 3
        assert {a.name for a in handlers} == {
            "handle-forced-dialogue-bad-weather",
            "handle-forced-dialogue-no-weather-service",
            "handle-forced-dialogue-affirm-ok",
        }

    def test_forall_expands_to_ground_negatives(self):
        dom = parse_domain(FORCED_DOMAIN)
        prob = parse_problem(FORCED_PROBLEM, dom)
        problem = ground(dom, prob)
        check = problem.action("check-weather")
        # with a single followup type the quantifier expands to one negative
        assert eval_formula(check.precondition, frozenset()) is True
        assert (
            eval_formula(check.precondition, frozenset(["forced-followup-dialogue"])) is False
        )

    def test_conjoined_oneofs_cross_product(self):
        text = """
        (define (domain x)
          (:requirements :strips :non-deterministic)
          (:predicates (a) (b) (c) (d) (p))
          (:action act :parameters () :precondition (p)
            :effect (and (oneof (a) (b)) (oneof (c) (d)))))
        """
        dom = parse_domain(text)
        prob = LiftedProblem("p1", "x", (), (Atom("p"),), Atom("p"))
        problem = ground(dom, prob)
        act = problem.action("act")
        got = {frozenset(o.adds) for o in act.outcomes}
        # oracle: enumerate all branch combinations directly
        expected = {
            frozenset(combo) for combo in product(("a", "b"), ("c", "d"))
        }
        assert got == expected
        assert len(act.outcomes) == 4

    def test_static_pruning_drops_unreachable_actions(self):
        text = """
        (define (domain x)
          (:requirements :strips)
          (:predicates (p) (q) (r))
          (:action needs-q :parameters () :precondition (q) :effect (r))
          (:action works :parameters () :precondition (p) :effect (r)))
        """
        dom = parse_domain(text)
        prob = LiftedProblem("p1", "x", (), (Atom("p"),), Atom("r"))
        pruned = ground(dom, prob)
        assert [a.name for a in pruned.actions] == ["works"]
        kept = ground(dom, prob, prune_static=False)
        assert len(kept.actions) == 2

    def test_grounding_cap(self):
        lines = ["(define (domain big)", "  (:requirements :strips :typing)", "  (:types t)"]
        lines.append("  (:predicates (p (?a - t) (?b - t) (?c - t)))")
        lines.append(
            "  (:action a :parameters ((?a - t) (?b - t) (?c - t))"
            " :precondition (p ?a ?b ?c) :effect (not (p ?a ?b ?c))))"
        )
        dom = parse_domain("\n".join(lines))
        objs = tuple(TypedObject(f"o{i}", "t") for i in range(30))
        prob = LiftedProblem("p1", "big", objs, (), CondAtom := Atom("p", ("o0", "o0", "o0")))
        with pytest.raises(GroundingCapExceeded) as err:
            ground(dom, prob, max_ground_actions=1000)
        assert err.value.schema == "a"

    def test_ground_atom_naming(self):
        assert ground_atom_name(Atom("force-reason", ("bad-weather",))) == (
            "force-reason-bad-weather"
        )

    def test_add_delete_conflict_rejected(self):
        text = """
        (define (domain x)
          (:requirements :strips)
          (:predicates (p) (q))
          (:action a :parameters () :precondition (p) :effect (and (q) (not (q)))))
        """
        dom = parse_domain(text)
        prob = LiftedProblem("p1", "x", (), (Atom("p"),), Atom("q"))
        with pytest.raises(GroundingError):
            ground(dom, prob)


class TestGroundingSemantics:
    def test_ground_matches_lifted_interpretation(self):
        """Exhaustive cross-check on a 3-object domain: each ground action's
        applicability agrees with direct substitution into the schema."""
        dom = parse_domain(FORCED_DOMAIN)
        prob = parse_problem(FORCED_PROBLEM, dom)
        problem = ground(dom, prob, prune_static=False)
        reasons = ["bad-weather", "no-weather-service", "affirm-ok"]
        schema = next(a for a in dom.actions if a.name == "handle-forced-dialogue")
        sample_states = [
            frozenset(),
            frozenset(["forced-followup-dialogue"]),
            frozenset(["forced-followup-dialogue", "force-reason-bad-weather"]),
            frozenset(["force-reason-affirm-ok"]),
            frozenset(["ok-weather", "forced-followup-dialogue", "force-reason-affirm-ok"]),
        ]
        for r in reasons:
            action = problem.action(f"handle-forced-dialogue-{r}")
            for s in sample_states:
                # direct lifted interpretation: both precondition atoms with
                # ?r substituted must hold
                expected = ("forced-followup-dialogue" in s) and (f"force-reason-{r}" in s)
                assert eval_formula(action.precondition, s) is expected
                assert eval_formula(action.precondition, s) == eval_formula(
                    action.precondition, s
                )
        assert schema.params[0].type == "reason"
