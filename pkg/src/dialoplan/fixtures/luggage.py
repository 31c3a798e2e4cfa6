"""Luggage check-in: the smallest bundled agent.

One yes/no question with an optional count, a follow-up question for the
count, and a booking-form service call. The goal is reached either by
declining check-in or by the service call completing.
"""

from __future__ import annotations

import re

from ..domainkit import DomainBuilder
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
        NLURule("request-checkin", (r"check\W*in.*(luggage|bag|suitcase)", r"(luggage|bags?).*check")),
        NLURule("affirm", (r"^\s*(yes|yeah|yep|sure|ok(ay)?|please)\b",)),
        NLURule("deny", (r"^\s*(no|nope|nah)\b", r"\bno (luggage|bags?)\b")),
    ),
    extractors=(EntityExtractor("number", r"\b(\d+)\b", int),),
)


def build_domain() -> DomainBuilder:
    b = DomainBuilder("luggage")
    b.declare_flag("checkin")
    b.declare_fluent("no-checkin")
    b.declare_slot("number")
    b.declare_fluent("luggage-checkin-set")
    b.add_dialogue_action(
        "ask-checkin-luggage",
        "(and (not (ok-checkin)) (not (no-checkin)))",
        [
            {"add": ["no-checkin"]},
            {"add": ["ok-checkin", "have-number"]},
            {"add": ["ok-checkin"]},
            {},
        ],
    )
    b.add_dialogue_action(
        "ask-how-many",
        "(and (ok-checkin) (not (have-number)))",
        [{"add": ["have-number"]}, {}],
    )
    b.add_service_action(
        "set-luggage-checkin",
        "(and (ok-checkin) (have-number))",
        [{"add": ["luggage-checkin-set"]}],
    )
    return b


def _interpret_checkin(ctx: Context, text: str) -> dict:
    c = classify(NLU, text)
    if c.intent == "affirm":
        updates: dict = {"checkin": True}
        if "number" in c.assignments:
            updates["number"] = c.assignments["number"]
        return updates
    if c.intent == "deny":
        return {"checkin": False}
    return {}


def _interpret_count(ctx: Context, text: str) -> dict:
    m = re.search(r"\b(\d+)\b", text)
    return {"number": int(m.group(1))} if m else {}


def _set_checkin(ctx: Context) -> ServiceOutcome:
    return ServiceOutcome(
        updates={"luggage-checkin-set": True},
        trace={"service": "booking-form", "field": "checked-luggage", "count": ctx.get("number")},
    )


def make_fixture() -> Fixture:
    builder = build_domain()
    domain, _ = builder.build()
    problem = builder.make_problem(
        "luggage-1", init=[], goal="(or (no-checkin) (luggage-checkin-set))"
    )
    return Fixture(
        name="luggage",
        title="Flight luggage check-in",
        top_intent="request-checkin",
        domain=domain,
        problem=problem,
        nlu=NLU,
        variables=("checkin", "number", "luggage-checkin-set"),
        fluent_rules={
            "ok-checkin": equals("checkin", True),
            "no-checkin": equals("checkin", False),
            "have-number": present("number"),
            "maybe-number": lambda ctx: False,  # never hypothesized in this agent
            "luggage-checkin-set": truthy("luggage-checkin-set"),
        },
        transformers={
            "ask-checkin-luggage": Transformer(
                say="Should I check in any luggage for your flight?",
                on_reply=_interpret_checkin,
            ),
            "ask-how-many": Transformer(
                say="How many pieces of luggage?",
                on_reply=_interpret_count,
            ),
            "set-luggage-checkin": Transformer(run=_set_checkin),
        },
    )
