"""Career coaching: recommend-present-refine loops for two chained goals.

A recommender service proposes long-term career goals; the user picks one,
asks for an explanation, or rejects the batch and states why, after which
recommendations are recomputed. Once a career goal exists the same pattern
repeats for a pathway towards it. Starting with a career goal already in
the context skips the first phase entirely: the pathway-only plan falls
out of the same domain with a different initial state.
"""

from __future__ import annotations

from ..domainkit import DomainBuilder
from ..orchestrator import (
    Context,
    Fixture,
    NLURule,
    NLURuleSet,
    ServiceOutcome,
    Transformer,
    classify,
    present,
    truthy,
)

NLU = NLURuleSet(
    rules=(
        NLURule("career-advice", (r"\bcareer\b", r"\bpathway\b")),
        NLURule("explain", (r"\bwhy\b", r"\bexplain\b", r"tell me more")),
        NLURule("affirm", (r"^\s*(yes|yeah|yep|sure|ok(ay)?|sounds good)\b",)),
        NLURule("deny", (r"^\s*(no|nope|nah|none)\b", r"\bdon'?t like\b", r"\breject\b")),
    ),
)

CAREER_GOALS = ("data scientist", "ml engineer", "product manager")
CAREER_GOALS_ALT = ("research engineer", "solutions architect", "team lead")
PATHWAYS = ("senior role, then staff role", "mentorship track, then lead role")


def build_domain() -> DomainBuilder:
    b = DomainBuilder("career")
    b.declare_slot("career-goal")
    b.declare_slot("pathway")
    b.declare_slot("cg-recs")
    b.declare_slot("pw-recs")
    b.declare_slot("cg-reason")
    b.declare_slot("pw-reason")
    b.declare_fluent("cg-info-requested")
    b.declare_fluent("cg-rejected")
    b.declare_fluent("pw-rejected")
    b.add_service_action(
        "get-cg-recs",
        "(and (not (have-career-goal)) (not (have-cg-recs)) (not (cg-rejected)))",
        [{"add": ["have-cg-recs"], "delete": ["have-cg-reason"]}],
    )
    b.add_dialogue_action(
        "present-cg-recs",
        "(and (have-cg-recs) (not (have-career-goal)) (not (cg-info-requested))"
        " (not (cg-rejected)))",
        [
            {"add": ["have-career-goal"]},
            {"add": ["cg-info-requested"]},
            {"add": ["cg-rejected"], "delete": ["have-cg-recs"]},
            {},
        ],
    )
    b.add_dialogue_action(
        "explain-cg", "(cg-info-requested)", [{"delete": ["cg-info-requested"]}]
    )
    b.add_dialogue_action(
        "elicit-cg-reason",
        "(cg-rejected)",
        [{"add": ["have-cg-reason"], "delete": ["cg-rejected"]}, {}],
    )
    b.add_service_action(
        "get-pw-recs",
        "(and (have-career-goal) (not (have-pathway)) (not (have-pw-recs))\n"
        " (not (pw-rejected)))",
        [{"add": ["have-pw-recs"], "delete": ["have-pw-reason"]}],
    )
    b.add_dialogue_action(
        "present-pw-recs",
        "(and (have-pw-recs) (not (have-pathway)) (not (pw-rejected)))",
        [
            {"add": ["have-pathway"]},
            {"add": ["pw-rejected"], "delete": ["have-pw-recs"]},
            {},
        ],
    )
    b.add_dialogue_action(
        "elicit-pw-reason",
        "(pw-rejected)",
        [{"add": ["have-pw-reason"], "delete": ["pw-rejected"]}, {}],
    )
    return b


def _get_cg_recs(ctx: Context) -> ServiceOutcome:
    recs = CAREER_GOALS_ALT if "cg-reason" in ctx else CAREER_GOALS
    return ServiceOutcome(
        updates={"cg-recs": list(recs), "cg-reason": None},
        trace={"service": "career-goal-recommender", "count": len(recs)},
    )


def _present_cg(ctx: Context) -> str:
    recs = ctx.get("cg-recs", ())
    listing = "; ".join(recs)
    return f"Based on your profile I recommend: {listing}. Pick one, ask why, or reject."


def _choose_cg(ctx: Context, text: str) -> dict:
    c = classify(NLU, text)
    recs = list(ctx.get("cg-recs", ()))
    lowered = text.lower()
    for rec in recs:
        if rec in lowered:
            return {"career-goal": rec}
    if c.intent == "explain":
        return {"cg-info-requested": True}
    if c.intent == "deny":
        return {"cg-rejected": True, "cg-recs": None}
    if c.intent == "affirm" and recs:
        return {"career-goal": recs[0]}
    return {}


def _elicit_cg_reason(ctx: Context, text: str) -> dict:
    if text.strip():
        return {"cg-reason": text.strip(), "cg-rejected": None}
    return {}


def _get_pw_recs(ctx: Context) -> ServiceOutcome:
    pw = PATHWAYS[1] if "pw-reason" in ctx else PATHWAYS[0]
    return ServiceOutcome(
        updates={"pw-recs": [pw], "pw-reason": None},
        trace={"service": "pathway-recommender", "goal": ctx.get("career-goal")},
    )


def _present_pw(ctx: Context) -> str:
    recs = ctx.get("pw-recs", ())
    return f"A pathway towards {ctx.get('career-goal')}: {recs[0]}. Shall we go with it?"


def _choose_pw(ctx: Context, text: str) -> dict:
    c = classify(NLU, text)
    recs = list(ctx.get("pw-recs", ()))
    if c.intent == "affirm" and recs:
        return {"pathway": recs[0]}
    if c.intent == "deny":
        return {"pw-rejected": True, "pw-recs": None}
    return {}


def _elicit_pw_reason(ctx: Context, text: str) -> dict:
    if text.strip():
        return {"pw-reason": text.strip(), "pw-rejected": None}
    return {}


def make_fixture() -> Fixture:
    builder = build_domain()
    domain, _ = builder.build()
    problem = builder.make_problem("career-chained", init=[], goal="(have-pathway)")
    rules = {
        "have-career-goal": present("career-goal"),
        "maybe-career-goal": lambda ctx: False,
        "have-pathway": present("pathway"),
        "maybe-pathway": lambda ctx: False,
        "have-cg-recs": present("cg-recs"),
        "maybe-cg-recs": lambda ctx: False,
        "have-pw-recs": present("pw-recs"),
        "maybe-pw-recs": lambda ctx: False,
        "have-cg-reason": present("cg-reason"),
        "maybe-cg-reason": lambda ctx: False,
        "have-pw-reason": present("pw-reason"),
        "maybe-pw-reason": lambda ctx: False,
        "cg-info-requested": truthy("cg-info-requested"),
        "cg-rejected": truthy("cg-rejected"),
        "pw-rejected": truthy("pw-rejected"),
    }
    transformers = {
        "get-cg-recs": Transformer(run=_get_cg_recs),
        "present-cg-recs": Transformer(say=_present_cg, on_reply=_choose_cg),
        "explain-cg": Transformer(
            say="These match the skills and interests in your profile.",
            run=lambda ctx: ServiceOutcome({"cg-info-requested": None}),
        ),
        "elicit-cg-reason": Transformer(
            say="What didn't you like about these options?", on_reply=_elicit_cg_reason
        ),
        "get-pw-recs": Transformer(run=_get_pw_recs),
        "present-pw-recs": Transformer(say=_present_pw, on_reply=_choose_pw),
        "elicit-pw-reason": Transformer(
            say="What makes that pathway a bad fit?", on_reply=_elicit_pw_reason
        ),
    }
    return Fixture(
        name="career",
        title="Career goal and pathway coaching",
        top_intent="career-advice",
        domain=domain,
        problem=problem,
        nlu=NLU,
        variables=(
            "career-goal",
            "pathway",
            "cg-recs",
            "pw-recs",
            "cg-reason",
            "pw-reason",
            "cg-info-requested",
            "cg-rejected",
            "pw-rejected",
        ),
        fluent_rules=rules,
        transformers=transformers,
    )
