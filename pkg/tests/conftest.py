import pytest

from dialoplan.model import FONDProblem, NDAction, TRUE, conj, disj, lit, neg, outcome, state


def luggage_ground_problem() -> FONDProblem:
    """Hand-grounded luggage check-in problem, built straight on the model
    API so planner tests do not depend on the PDDL or builder layers."""
    ask_checkin = NDAction(
        "ask-checkin-luggage",
        "dialogue",
        conj(neg("ok-checkin"), neg("no-checkin")),
        (
            outcome(add=["no-checkin"]),
            outcome(add=["ok-checkin", "have-number"]),
            outcome(add=["ok-checkin"]),
            outcome(),
        ),
    )
    ask_how_many = NDAction(
        "ask-how-many",
        "dialogue",
        conj(lit("ok-checkin"), neg("have-number")),
        (outcome(add=["have-number"]), outcome()),
    )
    set_checkin = NDAction(
        "set-luggage-checkin",
        "service",
        conj(lit("ok-checkin"), lit("have-number")),
        (outcome(add=["luggage-checkin-set"]),),
    )
    return FONDProblem(
        fluents=frozenset(
            ["ok-checkin", "no-checkin", "have-number", "luggage-checkin-set"]
        ),
        init=state(),
        actions=(ask_checkin, ask_how_many, set_checkin),
        goal=disj(lit("no-checkin"), lit("luggage-checkin-set")),
        name="luggage-1",
    )


def coin_flip_problem() -> FONDProblem:
    """One action that either achieves the goal or does nothing: the only
    solution is cyclic (retry until the good outcome occurs)."""
    flip = NDAction(
        "try-flip", "service", neg("g"), (outcome(add=["g"]), outcome())
    )
    return FONDProblem(
        fluents=frozenset(["g"]),
        init=state(),
        actions=(flip,),
        goal=lit("g"),
        name="coin-flip",
    )


@pytest.fixture
def luggage_problem() -> FONDProblem:
    return luggage_ground_problem()


@pytest.fixture
def coin_flip() -> FONDProblem:
    return coin_flip_problem()
