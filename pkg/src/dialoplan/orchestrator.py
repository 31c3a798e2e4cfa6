"""Execution engine for dialogue plans.

A session walks a plan node by node. The context is the knowledge store of
the conversation; every planning fluent has a rule that evaluates it from
the context, so after each step the current planning state can be inferred
and compared with the previous one to resolve which branch the conversation
took. Node transformers are the code behind action labels: they emit
utterances, interpret user replies into context updates, or call services.

Utterance understanding is a deterministic pattern stub: intents are
matched by prioritized regular expressions and entities extracted by
pattern captures, which keeps scripted runs reproducible.
"""

from __future__ import annotations

import json
import re
import uuid
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from .model import FONDProblem, State, apply_outcome
from .pddl import LiftedDomain, LiftedProblem, ground
from .plan import DialoguePlan, branch_label, compile_plan, resolve_branch
from .planner import FONDSolution, solve

AWAITING_USER = "awaiting-user"
RUNNING = "running"
DONE = "done"
ABORTED = "aborted"
ERROR = "error"


class OrchestratorError(Exception):
    pass


class ConfigurationError(OrchestratorError):
    """A fixture is missing a fluent rule or a transformer; raised at session
    start, never mid-dialogue."""


class NoPlanError(OrchestratorError):
    """No top-level intent matched the utterance."""


class SessionStateError(OrchestratorError):
    """step() called in a status that cannot accept it."""


# ---------------------------------------------------------------------------
# Context


class Context:
    """Partial instantiation of the declared dialogue variables."""

    def __init__(self, variables: Iterable[str], values: Mapping[str, object] | None = None):
        self._declared = tuple(variables)
        self._values: dict[str, object] = {}
        if values:
            self.apply(values)

    @property
    def declared(self) -> tuple[str, ...]:
        return self._declared

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def get(self, name: str, default=None):
        return self._values.get(name, default)

    def __getitem__(self, name: str):
        return self._values[name]

    def apply(self, updates: Mapping[str, object]) -> None:
        """Set variables; a value of None unsets. Undeclared names are
        configuration mistakes and raise."""
        for name, value in updates.items():
            if name not in self._declared:
                raise ConfigurationError(f"context variable {name!r} is not declared")
            if value is None:
                self._values.pop(name, None)
            else:
                self._values[name] = value

    def snapshot(self) -> dict[str, object]:
        return dict(self._values)


FluentRules = Mapping[str, Callable[[Context], bool]]


def present(var: str) -> Callable[[Context], bool]:
    return lambda ctx: var in ctx


def truthy(var: str) -> Callable[[Context], bool]:
    return lambda ctx: bool(ctx.get(var))


def equals(var: str, value: object) -> Callable[[Context], bool]:
    return lambda ctx: ctx.get(var) == value


def evaluate_state(rules: FluentRules, ctx: Context) -> State:
    """The planning state mirrored out of the context: a fluent holds iff
    its rule evaluates true."""
    return frozenset(name for name, rule in rules.items() if rule(ctx))


# ---------------------------------------------------------------------------
# Rule-based utterance understanding


@dataclass(frozen=True)
class NLURule:
    intent: str
    patterns: tuple[str, ...]


@dataclass(frozen=True)
class EntityExtractor:
    variable: str
    pattern: str
    convert: Callable[[str], object] = str


@dataclass(frozen=True)
class NLURuleSet:
    rules: tuple[NLURule, ...] = ()
    extractors: tuple[EntityExtractor, ...] = ()


@dataclass(frozen=True)
class Classification:
    intent: str | None
    assignments: dict[str, object]


def classify(rules: NLURuleSet, utterance: str) -> Classification:
    """First matching intent in rule order; every extractor that matches
    contributes an assignment. No match leaves the intent unset."""
    intent = None
    for rule in rules.rules:
        if any(re.search(p, utterance, re.IGNORECASE) for p in rule.patterns):
            intent = rule.intent
            break
    assignments: dict[str, object] = {}
    for ex in rules.extractors:
        m = re.search(ex.pattern, utterance)
        if m:
            raw = m.group(1) if m.groups() else m.group(0)
            assignments[ex.variable] = ex.convert(raw)
    return Classification(intent, assignments)


# ---------------------------------------------------------------------------
# Transformers


@dataclass(frozen=True)
class ServiceOutcome:
    updates: Mapping[str, object]
    trace: Mapping[str, object] | None = None


@dataclass(frozen=True)
class Transformer:
    """Code behind an action label.

    `say` produces the utterance emitted when the node runs. `on_reply`
    turns the user's answer into context updates (question nodes only).
    `run` performs service or system work and returns updates plus an
    optional trace entry. Transformers only touch the context; the plan and
    the planning state stay with the session.
    """

    say: str | Callable[[Context], str] | None = None
    on_reply: Callable[[Context, str], Mapping[str, object]] | None = None
    run: Callable[[Context], ServiceOutcome] | None = None

    def utterance(self, ctx: Context) -> str | None:
        if self.say is None:
            return None
        return self.say(ctx) if callable(self.say) else self.say


def http_service_transformer(
    url: str,
    *,
    build_request: Callable[[Context], Mapping[str, object]],
    apply_response: Callable[[Mapping[str, object]], Mapping[str, object]],
    client=None,
) -> Transformer:
    """Generic transformer for real REST endpoints: posts the built payload
    to `url` and maps the JSON response into context updates."""
    import httpx

    def run(ctx: Context) -> ServiceOutcome:
        owned = client or httpx.Client()
        try:
            resp = owned.post(url, json=dict(build_request(ctx)))
            resp.raise_for_status()
            updates = apply_response(resp.json())
            return ServiceOutcome(updates, {"url": url, "status": resp.status_code})
        finally:
            if owned is not client:
                owned.close()

    return Transformer(run=run)


# ---------------------------------------------------------------------------
# Fixtures and the plan library


@dataclass
class Fixture:
    """Everything needed to plan and execute one dialogue goal."""

    name: str
    title: str
    top_intent: str
    domain: LiftedDomain
    problem: LiftedProblem
    nlu: NLURuleSet
    variables: tuple[str, ...]
    fluent_rules: FluentRules
    transformers: Mapping[str, Transformer]
    context0: Mapping[str, object] = field(default_factory=dict)
    max_loop_visits: int = 5

    _ground: FONDProblem | None = field(default=None, repr=False, compare=False)

    def ground_problem(self) -> FONDProblem:
        if self._ground is None:
            self._ground = ground(self.domain, self.problem)
        return self._ground


class PlanLibrary:
    """Fixtures indexed by name and top-level intent, with solved plans
    cached per initial state (plans are immutable and shared)."""

    def __init__(self, fixtures: Iterable[Fixture]):
        self._fixtures = {f.name: f for f in fixtures}
        self._plans: dict[tuple[str, State], tuple[FONDSolution, DialoguePlan]] = {}

    def names(self) -> tuple[str, ...]:
        return tuple(self._fixtures)

    def fixture(self, name: str) -> Fixture:
        try:
            return self._fixtures[name]
        except KeyError:
            raise KeyError(f"unknown fixture {name!r}") from None

    def match_intent(self, utterance: str) -> tuple[Fixture, Classification] | None:
        for fixture in self._fixtures.values():
            c = classify(fixture.nlu, utterance)
            if c.intent == fixture.top_intent:
                return fixture, c
        return None

    def top_intents(self) -> tuple[str, ...]:
        return tuple(f.top_intent for f in self._fixtures.values())

    def plan_for(self, fixture: Fixture, init: State) -> tuple[FONDSolution, DialoguePlan]:
        key = (fixture.name, init)
        if key not in self._plans:
            base = fixture.ground_problem()
            problem = base if init == base.init else replace(base, init=init)
            sol = solve(problem)
            self._plans[key] = (sol, compile_plan(sol))
        return self._plans[key]


# ---------------------------------------------------------------------------
# Sessions


@dataclass
class Event:
    kind: str  # agent | service | branch | note
    text: str | None = None
    data: Mapping[str, object] | None = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.text is not None:
            out["text"] = self.text
        if self.data is not None:
            out["data"] = dict(self.data)
        return out


@dataclass
class StepResult:
    events: list[Event]
    status: str


@dataclass
class Session:
    id: str
    fixture: Fixture
    library: PlanLibrary | None
    plan: DialoguePlan
    problem: FONDProblem
    context: Context
    current: int
    prev_state: State
    status: str = RUNNING
    visits: dict[int, int] = field(default_factory=dict)
    transcript: list[dict] = field(default_factory=list)
    max_loop_visits: int = 5
    last_branch: str | None = None
    error: dict | None = None

    @property
    def awaiting_user(self) -> bool:
        return self.status == AWAITING_USER

    def node(self):
        return self.plan.node(self.current)


def _check_fixture_config(fixture: Fixture, problem: FONDProblem, plan: DialoguePlan) -> None:
    missing = set(problem.fluents) - set(fixture.fluent_rules)
    if missing:
        raise ConfigurationError(
            f"fixture {fixture.name!r} lacks fluent rules for: {sorted(missing)}"
        )
    needed = {n.action for n in plan.nodes if not plan.is_goal(n.id)}
    missing = needed - set(fixture.transformers)
    if missing:
        raise ConfigurationError(
            f"fixture {fixture.name!r} lacks transformers for: {sorted(missing)}"
        )


def session_for_fixture(
    fixture: Fixture,
    context0: Mapping[str, object] | None = None,
    *,
    library: PlanLibrary | None = None,
    max_loop_visits: int | None = None,
) -> Session:
    """Create a session on a fixture's plan. The plan is solved for the
    initial state the context actually evaluates to, so a pre-filled context
    gets a correspondingly shorter plan."""
    lib = library or PlanLibrary([fixture])
    ctx = Context(fixture.variables, {**fixture.context0, **(context0 or {})})
    init = evaluate_state(fixture.fluent_rules, ctx)
    init = frozenset(f for f in init if f in fixture.ground_problem().fluents)
    sol, plan = lib.plan_for(fixture, init)
    problem = fixture.ground_problem()
    if init != problem.init:
        problem = replace(problem, init=init)
    _check_fixture_config(fixture, problem, plan)
    session = Session(
        id=uuid.uuid4().hex,
        fixture=fixture,
        library=library,
        plan=plan,
        problem=problem,
        context=ctx,
        current=plan.initial,
        prev_state=init,
        max_loop_visits=(
            max_loop_visits if max_loop_visits is not None else fixture.max_loop_visits
        ),
    )
    if plan.is_goal(plan.initial):
        session.status = DONE
    return session


def start_session(
    library: PlanLibrary,
    context0: Mapping[str, object] | None,
    utterance: str,
    *,
    max_loop_visits: int | None = None,
) -> Session:
    """Classify the utterance into a top-level intent and open a session on
    the plan for the matching goal."""
    match = library.match_intent(utterance)
    if match is None:
        raise NoPlanError(f"no top-level intent matches {utterance!r}")
    fixture, classification = match
    ctx0 = dict(context0 or {})
    ctx0.update(classification.assignments)
    return session_for_fixture(
        fixture, ctx0, library=library, max_loop_visits=max_loop_visits
    )


def _fail(session: Session, events: list[Event], diagnostic: dict) -> StepResult:
    session.status = ERROR
    session.error = diagnostic
    events.append(Event("note", data=diagnostic))
    return StepResult(events, session.status)


def _enter(session: Session, events: list[Event]) -> bool:
    """Count a node visit; False means the loop bound tripped."""
    n = session.visits.get(session.current, 0) + 1
    session.visits[session.current] = n
    if n > session.max_loop_visits:
        session.status = ABORTED
        events.append(
            Event(
                "note",
                text="conversation aborted: no progress at this step",
                data={"node": session.current, "visits": n},
            )
        )
        return False
    return True


def step(session: Session, user_input: str | None = None) -> StepResult:
    """Advance the session: run transformers and follow branches through
    deterministic nodes until user input is needed, a goal node is reached,
    or resolution fails.
    """
    events: list[Event] = []
    if session.status not in (RUNNING, AWAITING_USER):
        raise SessionStateError(f"session is {session.status}")
    if session.awaiting_user and user_input is None:
        raise SessionStateError("session is awaiting user input")
    if not session.awaiting_user and user_input is not None:
        raise SessionStateError("session is not awaiting user input")

    pending_input = user_input
    if pending_input is not None and session.library is not None:
        switch = session.library.match_intent(pending_input)
        if switch is not None and switch[0].name != session.fixture.name:
            events.append(
                Event(
                    "note",
                    text="let's stay on topic; we can talk about that after this",
                    data={"rejected-intent": switch[0].top_intent},
                )
            )
            session.transcript.append(
                {"user": pending_input, "events": [e.to_dict() for e in events]}
            )
            return StepResult(events, session.status)

    session.status = RUNNING

    while True:
        node = session.plan.node(session.current)
        if session.plan.is_goal(session.current):
            session.status = DONE
            break

        transformer = session.fixture.transformers[node.action]
        out_edges = session.plan.out_edges(session.current)
        is_question = node.kind == "dialogue" and len(out_edges) > 1

        if is_question and pending_input is None:
            if not _enter(session, events):
                break
            utterance = transformer.utterance(session.context)
            if utterance:
                events.append(Event("agent", text=utterance))
            session.status = AWAITING_USER
            break

        updates: Mapping[str, object] = {}
        try:
            if is_question:
                updates = transformer.on_reply(session.context, pending_input) or {}
                pending_input = None
            else:
                if not _enter(session, events):
                    break
                utterance = transformer.utterance(session.context)
                if utterance:
                    events.append(Event("agent", text=utterance))
                if transformer.run is not None:
                    result = transformer.run(session.context)
                    updates = result.updates
                    if result.trace is not None:
                        events.append(Event("service", data=result.trace))
        except OrchestratorError:
            raise
        except Exception as exc:  # transformer bug: surface, do not crash
            return _fail(
                session,
                events,
                {"failure": "transformer-error", "node": node.id, "detail": repr(exc)},
            )

        session.context.apply(updates)
        cur = evaluate_state(session.fixture.fluent_rules, session.context)
        res = resolve_branch(session.plan, session.current, session.prev_state, cur)
        if not res.ok:
            return _fail(
                session,
                events,
                {
                    "failure": res.failure,
                    "node": node.id,
                    "prev": sorted(session.prev_state),
                    "cur": sorted(cur),
                    "outcomes": [
                        {"adds": sorted(e.outcome.adds), "dels": sorted(e.outcome.deletes)}
                        for e in out_edges
                    ],
                },
            )
        assert apply_outcome(session.prev_state, res.edge.outcome) == cur
        label = branch_label(res.edge.outcome)
        events.append(
            Event(
                "branch",
                text=label,
                data={"from": res.edge.source, "to": res.edge.target},
            )
        )
        session.last_branch = label
        session.prev_state = cur
        session.current = res.edge.target

    record = {"events": [e.to_dict() for e in events], "status": session.status}
    if user_input is not None:
        record["user"] = user_input
    record["node"] = session.current
    record["state"] = sorted(session.prev_state)
    session.transcript.append(record)
    return StepResult(events, session.status)


# ---------------------------------------------------------------------------
# Scripted runs


@dataclass
class Transcript:
    fixture: str
    records: list[dict]
    final_status: str
    node_path: list[int]
    error: dict | None = None

    def to_json(self) -> dict:
        return {
            "fixture": self.fixture,
            "records": self.records,
            "final_status": self.final_status,
            "node_path": self.node_path,
            "error": self.error,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def run_script(
    fixture: Fixture,
    turns: Sequence[str],
    *,
    context0: Mapping[str, object] | None = None,
    max_loop_visits: int | None = None,
) -> Transcript:
    """Replay scripted user turns headlessly and record the walk."""
    session = session_for_fixture(fixture, context0, max_loop_visits=max_loop_visits)
    path = [session.current]

    def consume(result: StepResult) -> None:
        for e in result.events:
            if e.kind == "branch":
                path.append(e.data["to"])

    if session.status == RUNNING:
        consume(step(session))
    for turn in turns:
        if session.status != AWAITING_USER:
            break
        consume(step(session, turn))
    return Transcript(
        fixture=fixture.name,
        records=session.transcript,
        final_status=session.status,
        node_path=path,
        error=session.error,
    )
