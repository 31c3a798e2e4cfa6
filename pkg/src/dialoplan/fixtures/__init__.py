"""Bundled example agents: domain, problem, language rules, transformers."""

from __future__ import annotations

from ..orchestrator import Fixture, PlanLibrary
from . import career, luggage, trip, trip_intents

_BUILDERS = {
    "luggage": luggage.make_fixture,
    "trip": trip.make_fixture,
    "career": career.make_fixture,
    "trip-intents": trip_intents.make_fixture,
}


def fixture_names() -> tuple[str, ...]:
    return tuple(_BUILDERS)


def make_fixture(name: str) -> Fixture:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}") from None


def make_library(names: tuple[str, ...] | None = None) -> PlanLibrary:
    chosen = names or fixture_names()
    return PlanLibrary([make_fixture(n) for n in chosen])
