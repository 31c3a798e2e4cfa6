"""Context, NLU stub, sessions, scripted execution."""

import httpx
import pytest

from dialoplan.fixtures import make_fixture, make_library
from dialoplan.model import apply_outcome, eval_formula
from dialoplan.orchestrator import (
    ABORTED,
    AWAITING_USER,
    DONE,
    ERROR,
    ConfigurationError,
    Context,
    EntityExtractor,
    Fixture,
    NLURule,
    NLURuleSet,
    NoPlanError,
    SessionStateError,
    classify,
    evaluate_state,
    http_service_transformer,
    run_script,
    session_for_fixture,
    start_session,
    step,
)


@pytest.fixture(scope="module")
def library():
    return make_library()


@pytest.fixture(scope="module")
def luggage_fixture():
    return make_fixture("luggage")


class TestClassify:
    NLU = NLURuleSet(
        rules=(
            NLURule("asked-about-weather", (r"\bweather\b",)),
            NLURule("affirm", (r"^\s*(yes|yeah)\b",)),
        ),
        extractors=(
            EntityExtractor("@place", r"\b(?:in|at)\s+([A-Z][a-zA-Z]+)"),
            EntityExtractor("number", r"\b(\d+)\b", int),
        ),
    )

    def test_weather_with_place(self):
        c = classify(self.NLU, "I wonder how the weather is in Paris")
        assert c.intent == "asked-about-weather"
        assert c.assignments == {"@place": "Paris"}

    def test_affirm_with_number(self):
        c = classify(self.NLU, "Yes, 2 pieces")
        assert c.intent == "affirm"
        assert c.assignments["number"] == 2

    def test_no_match(self):
        c = classify(self.NLU, "asdfgh")
        assert c.intent is None
        assert c.assignments == {}

    def test_deterministic(self):
        a = classify(self.NLU, "yes, the weather at Rome; 3 bags")
        b = classify(self.NLU, "yes, the weather at Rome; 3 bags")
        assert a == b


class TestContext:
    def test_undeclared_variable_rejected(self):
        ctx = Context(("a",))
        with pytest.raises(ConfigurationError):
            ctx.apply({"b": 1})

    def test_none_unsets(self):
        ctx = Context(("a",), {"a": 1})
        ctx.apply({"a": None})
        assert "a" not in ctx

    def test_overwrite_keeps_latest(self):
        ctx = Context(("a",), {"a": 1})
        ctx.apply({"a": 2})
        assert ctx["a"] == 2


class TestEvaluateState:
    def test_presence_rule(self, luggage_fixture):
        ctx = Context(luggage_fixture.variables, {"number": 2, "checkin": True})
        s = evaluate_state(luggage_fixture.fluent_rules, ctx)
        assert s == frozenset(["have-number", "ok-checkin"])

    def test_empty_context(self, luggage_fixture):
        ctx = Context(luggage_fixture.variables)
        assert evaluate_state(luggage_fixture.fluent_rules, ctx) == frozenset()

    def test_three_valued_flag(self, luggage_fixture):
        ctx = Context(luggage_fixture.variables, {"checkin": False})
        s = evaluate_state(luggage_fixture.fluent_rules, ctx)
        assert "no-checkin" in s and "ok-checkin" not in s


class TestStartSession:
    def test_top_intent_selects_luggage(self, library):
        session = start_session(library, {}, "help me check in my luggage please")
        assert session.fixture.name == "luggage"
        assert session.plan.node(session.current).action == "ask-checkin-luggage"

    def test_unknown_utterance_raises(self, library):
        with pytest.raises(NoPlanError):
            start_session(library, {}, "sing me a song")

    def test_goal_satisfying_context_is_done_immediately(self, luggage_fixture):
        session = session_for_fixture(luggage_fixture, {"checkin": False})
        assert session.status == DONE

    def test_missing_fluent_rule_fails_at_start(self, luggage_fixture):
        import dataclasses

        broken = dataclasses.replace(
            luggage_fixture,
            fluent_rules={
                k: v for k, v in luggage_fixture.fluent_rules.items() if k != "have-number"
            },
        )
        broken._ground = None
        with pytest.raises(ConfigurationError, match="have-number"):
            session_for_fixture(broken)


class TestStep:
    def test_reject_path(self, luggage_fixture):
        session = session_for_fixture(luggage_fixture)
        first = step(session)
        assert session.status == AWAITING_USER
        assert any("luggage" in (e.text or "") for e in first.events)
        result = step(session, "no")
        assert result.status == DONE
        assert session.plan.is_goal(session.current)

    def test_affirm_with_number_runs_service(self, luggage_fixture):
        session = session_for_fixture(luggage_fixture)
        step(session)
        result = step(session, "yes, 2 pieces")
        assert result.status == DONE
        kinds = [e.kind for e in result.events]
        assert "service" in kinds

    def test_affirm_then_number(self, luggage_fixture):
        session = session_for_fixture(luggage_fixture)
        step(session)
        mid = step(session, "yes")
        assert mid.status == AWAITING_USER
        assert session.plan.node(session.current).action == "ask-how-many"
        done = step(session, "2")
        assert done.status == DONE

    def test_input_when_not_awaiting_rejected(self, luggage_fixture):
        session = session_for_fixture(luggage_fixture)
        with pytest.raises(SessionStateError):
            step(session, "hello")

    def test_step_after_done_rejected(self, luggage_fixture):
        session = session_for_fixture(luggage_fixture)
        step(session)
        step(session, "no")
        with pytest.raises(SessionStateError):
            step(session)

    def test_goal_status_implies_goal_formula(self, luggage_fixture):
        session = session_for_fixture(luggage_fixture)
        step(session)
        step(session, "yes, 3 pieces")
        assert session.status == DONE
        assert eval_formula(session.problem.goal, session.prev_state)

    def test_precondition_holds_on_arrival(self, luggage_fixture):
        # execution soundness: each visited node's action was applicable in
        # the state the session was in when it arrived
        session = session_for_fixture(luggage_fixture)
        visited = [(session.current, session.prev_state)]
        step(session)
        for turn in ["yes", "2"]:
            before = step(session, turn)
            visited.append((session.current, session.prev_state))
        problem = session.problem
        for nid, s in visited:
            node = session.plan.node(nid)
            if session.plan.is_goal(nid):
                assert eval_formula(problem.goal, s)
            else:
                from dialoplan.model import applicable

                assert applicable(problem.action(node.action), s)

    def test_stay_on_topic(self, library):
        session = start_session(library, {}, "check in my luggage")
        step(session)
        result = step(session, "actually, can we plan a trip to Rome")
        assert session.status == AWAITING_USER
        assert any(e.kind == "note" for e in result.events)
        assert session.plan.node(session.current).action == "ask-checkin-luggage"


class TestRunScript:
    def test_four_reply_cases(self, luggage_fixture):
        plan = None
        cases = [
            (["no"], ["ask-checkin-luggage", "Done"]),
            (["yes, 2 pieces"], ["ask-checkin-luggage", "set-luggage-checkin", "Done"]),
            (
                ["yes", "2"],
                ["ask-checkin-luggage", "ask-how-many", "set-luggage-checkin", "Done"],
            ),
            (["qwerty", "no"], ["ask-checkin-luggage", "ask-checkin-luggage", "Done"]),
        ]
        for turns, want in cases:
            t = run_script(luggage_fixture, turns)
            assert t.final_status == DONE, turns
            if plan is None:
                from dialoplan.plan import compile_plan
                from dialoplan.planner import solve

                plan = compile_plan(solve(luggage_fixture.ground_problem()))
            names = {n.id: n.action for n in plan.nodes}
            assert [names[i] for i in t.node_path] == want

    def test_gibberish_only_aborts(self, luggage_fixture):
        t = run_script(luggage_fixture, ["x"] * 6, max_loop_visits=3)
        assert t.final_status == ABORTED

    def test_trip_unavailable_weather_path(self):
        trip = make_fixture("trip")
        t = run_script(
            trip,
            ["Oslo", "yes", "next week"],
            context0={"weather-script": ["unavailable"]},
        )
        assert t.final_status == DONE
        from dialoplan.plan import compile_plan
        from dialoplan.planner import solve

        plan = compile_plan(solve(trip.ground_problem()))
        names = {n.id: n.action for n in plan.nodes}
        path = [names[i] for i in t.node_path]
        assert "handle-forced-dialogue-no-weather-service" in path

    def test_empty_script_on_done_session(self, luggage_fixture):
        t = run_script(luggage_fixture, [], context0={"checkin": False})
        assert t.final_status == DONE
        assert t.records == []

    def test_replay_is_deterministic(self, luggage_fixture):
        a = run_script(luggage_fixture, ["yes", "2"])
        b = run_script(luggage_fixture, ["yes", "2"])
        assert a.node_path == b.node_path
        assert a.to_json() == b.to_json()

    def test_career_full_loop(self):
        career = make_fixture("career")
        t = run_script(
            career,
            [
                "why these?",
                "none of these fit",
                "I want something more hands-on",
                "research engineer",
                "yes",
            ],
        )
        assert t.final_status == DONE


class TestHttpTransformer:
    def test_posts_and_maps_response(self):
        captured = {}

        def handler(request: httpx.Request) -> httpx.Response:
            captured["url"] = str(request.url)
            return httpx.Response(200, json={"temp": "sunny"})

        client = httpx.Client(transport=httpx.MockTransport(handler))
        tf = http_service_transformer(
            "http://weather.test/check",
            build_request=lambda ctx: {"city": ctx.get("city")},
            apply_response=lambda body: {"weather-ok": body["temp"] == "sunny"},
            client=client,
        )
        ctx = Context(("city", "weather-ok"), {"city": "Oslo"})
        result = tf.run(ctx)
        assert result.updates == {"weather-ok": True}
        assert captured["url"] == "http://weather.test/check"
        assert result.trace["status"] == 200
