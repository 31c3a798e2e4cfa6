"""Trip planning: nine-action agent with uncertainty handling.

Collects origin, destination and dates, validates them, checks the weather
and books. The destination may start out as a hypothesis (from history or
fuzzy recognition), in which case the agent confirms it instead of asking
from scratch. Service hiccups and bad data raise forced followups that the
lifted handler action clears, one ground handler per reason.
"""

from __future__ import annotations

import re

from ..domainkit import DomainBuilder, FollowupSpec
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

REASONS = ("affirm-ok", "bad-dates", "bad-weather", "no-weather-service")

KNOWN_PLACES = {
    "amsterdam",
    "berlin",
    "london",
    "oslo",
    "paris",
    "prague",
    "rome",
    "vienna",
}

NLU = NLURuleSet(
    rules=(
        NLURule("plan-trip", (r"\b(plan|book)\b.*\btrip\b", r"\btravel\b.*\bto\b")),
        NLURule("affirm", (r"^\s*(yes|yeah|yep|sure|right|correct|ok(ay)?)\b",)),
        NLURule("deny", (r"^\s*(no|nope|nah|wrong)\b",)),
    ),
    extractors=(
        EntityExtractor("@place", r"\b(?:to|from|in)\s+([A-Z][a-zA-Z]+)"),
    ),
)

_DATE_HINT = re.compile(
    r"\d|next week|next month|tomorrow|weekend|monday|tuesday|wednesday|thursday|"
    r"friday|saturday|sunday|january|february|march|april|may|june|july|august|"
    r"september|october|november|december",
    re.IGNORECASE,
)

_PLACE_WORD = re.compile(r"^\s*([A-Z][a-zA-Z]+)\s*$")


def build_domain() -> DomainBuilder:
    b = DomainBuilder("trip")
    b.declare_slot("location-orig")
    b.declare_slot("location-dest")
    b.declare_slot("dates")
    b.declare_flag("locations")
    b.declare_flag("weather")
    b.declare_fluent("goal")
    b.add_dialogue_action(
        "ask-user-orig",
        "(and (not (have-location-orig)) (not (maybe-location-orig)))",
        [{"add": ["have-location-orig"]}, {}],
    )
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
    b.add_dialogue_action(
        "ask-dates",
        "(and (not (have-dates)) (not (ok-locations)))",
        [{"add": ["have-dates"]}, {}],
    )
    b.add_system_action(
        "validate-locations",
        "(and (have-location-orig) (have-location-dest) (have-dates) (not (ok-locations)))",
        [
            {"add": ["ok-locations"]},
            {"delete": ["have-location-orig", "have-location-dest"]},
            {
                "add": ["forced-followup dialogue", "force-reason bad-dates"],
                "delete": ["have-dates"],
            },
        ],
    )
    b.add_service_action(
        "check-weather",
        "(and (ok-locations) (have-dates) (not (ok-weather)))",
        [
            {"add": ["ok-weather"]},
            {
                "add": ["forced-followup dialogue", "force-reason bad-weather"],
                "delete": ["have-dates"],
            },
            {
                "add": [
                    "ok-weather",
                    "forced-followup dialogue",
                    "force-reason no-weather-service",
                ]
            },
        ],
    )
    b.add_dialogue_action(
        "suggest-change-dates",
        "(and (ok-locations) (not (have-dates)))",
        [{"add": ["have-dates"]}, {}],
    )
    b.add_service_action(
        "book-trip",
        "(and (have-location-orig) (have-location-dest) (have-dates)"
        " (ok-locations) (ok-weather))",
        [{"add": ["goal"]}],
    )
    b.add_dialogue_action(
        "handle-forced-dialogue",
        "(and (forced-followup dialogue) (force-reason ?r))",
        [{"delete": ["forced-followup dialogue", "force-reason ?r"]}],
        parameters=[("?r", "reason")],
    )
    b.compile_followups(
        FollowupSpec(
            types=("dialogue",),
            reasons=REASONS,
            handlers={"dialogue": ("handle-forced-dialogue",)},
        )
    )
    return b


def _take_place(var: str):
    def interpret(ctx: Context, text: str) -> dict:
        c = classify(NLU, text)
        if "@place" in c.assignments:
            return {var: c.assignments["@place"]}
        m = _PLACE_WORD.match(text)
        if m:
            return {var: m.group(1)}
        return {}

    return interpret


def _take_dates(ctx: Context, text: str) -> dict:
    return {"dates": text.strip()} if _DATE_HINT.search(text) else {}


def _confirm_dest(ctx: Context, text: str) -> dict:
    # the plan has no self-loop here: anything but a clear confirmation
    # drops the hypothesis and the destination is asked from scratch
    c = classify(NLU, text)
    if c.intent == "affirm":
        return {"location-dest": ctx.get("location-dest-hypothesis"),
                "location-dest-hypothesis": None}
    return {"location-dest-hypothesis": None}


def _validate_locations(ctx: Context) -> ServiceOutcome:
    dates = str(ctx.get("dates", ""))
    if re.search(r"\byesterday\b|\blast\b", dates, re.IGNORECASE):
        return ServiceOutcome(
            updates={"forced-followup": "dialogue", "force-reason": "bad-dates", "dates": None},
            trace={"service": "validator", "result": "bad-dates"},
        )
    orig = str(ctx.get("location-orig", "")).lower()
    dest = str(ctx.get("location-dest", "")).lower()
    if orig in KNOWN_PLACES and dest in KNOWN_PLACES:
        return ServiceOutcome(
            updates={"locations-ok": True},
            trace={"service": "validator", "result": "ok"},
        )
    return ServiceOutcome(
        updates={"location-orig": None, "location-dest": None},
        trace={"service": "validator", "result": "unknown-location"},
    )


def _check_weather(ctx: Context) -> ServiceOutcome:
    script = list(ctx.get("weather-script", ()))
    response = script.pop(0) if script else "ok"
    updates: dict = {"weather-script": script or None}
    if response == "bad":
        updates.update(
            {"forced-followup": "dialogue", "force-reason": "bad-weather", "dates": None}
        )
    elif response == "unavailable":
        updates.update(
            {
                "weather-ok": True,
                "forced-followup": "dialogue",
                "force-reason": "no-weather-service",
            }
        )
    else:
        updates["weather-ok"] = True
    return ServiceOutcome(updates, trace={"service": "weather", "response": response})


def _book_trip(ctx: Context) -> ServiceOutcome:
    return ServiceOutcome(
        updates={"booked": True},
        trace={
            "service": "booking",
            "from": ctx.get("location-orig"),
            "to": ctx.get("location-dest"),
            "dates": ctx.get("dates"),
        },
    )


_HANDLER_MESSAGES = {
    "affirm-ok": "Great, noted!",
    "bad-dates": "Those dates don't work (they seem to be in the past).",
    "bad-weather": "The weather at your destination looks bad for those dates.",
    "no-weather-service": "I couldn't reach the weather service, continuing without a forecast.",
}


def _handler(reason: str) -> Transformer:
    return Transformer(
        say=_HANDLER_MESSAGES[reason],
        run=lambda ctx: ServiceOutcome({"forced-followup": None, "force-reason": None}),
    )


def make_fixture() -> Fixture:
    builder = build_domain()
    domain, _ = builder.build()
    problem = builder.make_problem("trip-1", init=["maybe-location-dest"], goal="(goal)")
    rules = {
        "have-location-orig": present("location-orig"),
        "maybe-location-orig": present("location-orig-hypothesis"),
        "have-location-dest": present("location-dest"),
        "maybe-location-dest": present("location-dest-hypothesis"),
        "have-dates": present("dates"),
        "maybe-dates": lambda ctx: False,
        "ok-locations": truthy("locations-ok"),
        "ok-weather": truthy("weather-ok"),
        "goal": truthy("booked"),
    }
    for r in REASONS:
        rules[f"force-reason-{r}"] = equals("force-reason", r)
    rules["forced-followup-dialogue"] = equals("forced-followup", "dialogue")
    transformers = {
        "ask-user-orig": Transformer(
            say="Where will you be traveling from?", on_reply=_take_place("location-orig")
        ),
        "ask-user-dest": Transformer(
            say="Where will you be traveling to?", on_reply=_take_place("location-dest")
        ),
        "confirm-user-dest": Transformer(
            say=lambda ctx: (
                f"You'll be traveling to {ctx.get('location-dest-hypothesis')}, right?"
            ),
            on_reply=_confirm_dest,
        ),
        "ask-dates": Transformer(
            say="What dates are you thinking of?", on_reply=_take_dates
        ),
        "suggest-change-dates": Transformer(
            say="Would you like to pick different dates?", on_reply=_take_dates
        ),
        "validate-locations": Transformer(run=_validate_locations),
        "check-weather": Transformer(run=_check_weather),
        "book-trip": Transformer(run=_book_trip),
    }
    for r in REASONS:
        transformers[f"handle-forced-dialogue-{r}"] = _handler(r)
    return Fixture(
        name="trip",
        title="Trip planning with weather checks",
        top_intent="plan-trip",
        domain=domain,
        problem=problem,
        nlu=NLU,
        variables=(
            "location-orig",
            "location-orig-hypothesis",
            "location-dest",
            "location-dest-hypothesis",
            "dates",
            "locations-ok",
            "weather-ok",
            "weather-script",
            "booked",
            "forced-followup",
            "force-reason",
            "@place",
        ),
        fluent_rules=rules,
        transformers=transformers,
        context0={"location-dest-hypothesis": "Berlin"},
    )
