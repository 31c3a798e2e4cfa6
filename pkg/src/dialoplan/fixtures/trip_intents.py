"""Weather-or-booking: a compact agent with two top-level intents.

Both intent fluents can hold at once; the plan then satisfies whichever is
confirmed first by its dedicated goal-asserting action, so every trace
contains exactly one of them.
"""

from __future__ import annotations

from ..domainkit import DomainBuilder, IntentSpec
from ..orchestrator import (
    Context,
    EntityExtractor,
    Fixture,
    NLURule,
    NLURuleSet,
    ServiceOutcome,
    Transformer,
    classify,
    equals,
    present,
    truthy,
)

NLU = NLURuleSet(
    rules=(
        NLURule("asked-about-weather", (r"\bweather\b",)),
        NLURule("affirm", (r"^\s*(yes|yeah|yep|sure|right|ok(ay)?)\b",)),
        NLURule("deny", (r"^\s*(no|nope|nah|wrong)\b",)),
    ),
    extractors=(EntityExtractor("@place", r"\b(?:in|at|to|for)\s+([A-Z][a-zA-Z]+)"),),
)


def build_domain() -> DomainBuilder:
    b = DomainBuilder("trip-intents")
    b.declare_slot("location-dest")
    b.declare_flag("weather")
    b.declare_fluent("trip-booked")
    b.add_dialogue_action(
        "ask-user-dest",
        "(and (not (have-location-dest)) (not (maybe-location-dest)))",
        [{"add": ["have-location-dest"]}, {}],
    )
    b.add_dialogue_action(
        "confirm-user-dest",
        "(and (maybe-location-dest) (not (have-location-dest)))",
        [
            {"add": ["have-location-dest"], "delete": ["maybe-location-dest"]},
            {"delete": ["maybe-location-dest"]},
        ],
    )
    b.add_service_action(
        "check-weather",
        "(and (have-location-dest) (not (ok-weather)))",
        [{"add": ["ok-weather"]}, {}],
    )
    b.add_service_action(
        "book-trip",
        "(and (ok-weather) (not (trip-booked)))",
        [{"add": ["trip-booked"]}],
    )
    b.compile_intents(
        IntentSpec(
            intents=(
                ("book-trip", "(trip-booked)"),
                ("weather-only", "(ok-weather)"),
            )
        )
    )
    return b


def _take_place(ctx: Context, text: str) -> dict:
    c = classify(NLU, text)
    if "@place" in c.assignments:
        return {"location-dest": c.assignments["@place"]}
    stripped = text.strip()
    if stripped.istitle():
        return {"location-dest": stripped}
    return {}


def _confirm_dest(ctx: Context, text: str) -> dict:
    c = classify(NLU, text)
    if c.intent == "affirm":
        return {
            "location-dest": ctx.get("location-dest-hypothesis"),
            "location-dest-hypothesis": None,
        }
    return {"location-dest-hypothesis": None}


def _check_weather(ctx: Context) -> ServiceOutcome:
    script = list(ctx.get("weather-script", ()))
    response = script.pop(0) if script else "ok"
    updates: dict = {"weather-script": script or None}
    if response == "ok":
        updates["weather-ok"] = True
    return ServiceOutcome(updates, trace={"service": "weather", "response": response})


def make_fixture() -> Fixture:
    builder = build_domain()
    domain, _ = builder.build()
    problem = builder.make_problem(
        "trip-intents-1",
        init=["intent-book-trip", "intent-weather-only", "maybe-location-dest"],
    )
    rules = {
        "have-location-dest": present("location-dest"),
        "maybe-location-dest": present("location-dest-hypothesis"),
        "ok-weather": truthy("weather-ok"),
        "trip-booked": truthy("booked"),
        "goal": truthy("goal-asserted"),
        "intent-book-trip": truthy("intent-book-trip"),
        "intent-weather-only": truthy("intent-weather-only"),
    }
    transformers = {
        "ask-user-dest": Transformer(
            say="Which city should I look at?", on_reply=_take_place
        ),
        "confirm-user-dest": Transformer(
            say=lambda ctx: f"{ctx.get('location-dest-hypothesis')}, right?",
            on_reply=_confirm_dest,
        ),
        "check-weather": Transformer(run=_check_weather),
        "book-trip": Transformer(
            run=lambda ctx: ServiceOutcome(
                {"booked": True}, {"service": "booking", "to": ctx.get("location-dest")}
            )
        ),
        "assert-intent-book-trip": Transformer(
            run=lambda ctx: ServiceOutcome({"goal-asserted": True})
        ),
        "assert-intent-weather-only": Transformer(
            run=lambda ctx: ServiceOutcome({"goal-asserted": True})
        ),
    }
    return Fixture(
        name="trip-intents",
        title="Weather lookup or full booking (two intents)",
        top_intent="asked-about-weather",
        domain=domain,
        problem=problem,
        nlu=NLU,
        variables=(
            "location-dest",
            "location-dest-hypothesis",
            "weather-ok",
            "weather-script",
            "booked",
            "goal-asserted",
            "intent-book-trip",
            "intent-weather-only",
            "@place",
        ),
        fluent_rules=rules,
        transformers=transformers,
        context0={
            "intent-book-trip": True,
            "intent-weather-only": True,
            "location-dest-hypothesis": "Paris",
        },
    )
