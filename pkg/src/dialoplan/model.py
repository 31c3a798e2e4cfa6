"""Propositional model for non-deterministic planning.

States are closed-world sets of true fluents; everything not listed is
false. Actions carry an ordered list of outcomes: the order is load-bearing,
it identifies plan edges downstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

FLUENT_NAME = re.compile(r"^[a-z][a-z0-9-]*$")

ACTION_KINDS = ("dialogue", "service", "system")

State = frozenset[str]


class ModelError(ValueError):
    """A structural problem in a model object (bad name, undeclared fluent...)."""


def state(*fluents: str) -> State:
    return frozenset(fluents)


class Formula:
    """Base for propositional formulas; atoms are fluent names.

    Subclasses are frozen dataclasses, so formulas are hashable values and
    support `&`, `|` and `~` for construction.
    """

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class Lit(Formula):
    fluent: str
    positive: bool = True


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...] = ()


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...] = ()


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula = field(default_factory=lambda: TRUE)


#: The identity of conjunction; evaluates to true in every state.
TRUE: Formula = And(())


def lit(name: str) -> Lit:
    return Lit(name, True)


def neg(name: str) -> Lit:
    return Lit(name, False)


def conj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        flat.extend(p.parts) if isinstance(p, And) else flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        flat.extend(p.parts) if isinstance(p, Or) else flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def eval_formula(f: Formula, s: State) -> bool:
    """Closed-world evaluation: a fluent holds iff it is in the state."""
    if isinstance(f, Lit):
        return (f.fluent in s) == f.positive
    if isinstance(f, And):
        return all(eval_formula(p, s) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_formula(p, s) for p in f.parts)
    if isinstance(f, Not):
        return not eval_formula(f.sub, s)
    raise ModelError(f"cannot evaluate non-ground formula node {f!r}")


def formula_fluents(f: Formula) -> frozenset[str]:
    """All fluent names mentioned anywhere in the formula."""
    if isinstance(f, Lit):
        return frozenset((f.fluent,))
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for p in f.parts:
            out |= formula_fluents(p)
        return out
    if isinstance(f, Not):
        return formula_fluents(f.sub)
    raise ModelError(f"not a formula node: {f!r}")


def formula_text(f: Formula) -> str:
    """Canonical s-expression rendering: `(and ...)`, `(or ...)`, `(not ...)`,
    bare fluent names. `TRUE` renders as the empty conjunction `(and)`."""
    if isinstance(f, Lit):
        return f.fluent if f.positive else f"(not {f.fluent})"
    if isinstance(f, And):
        return "(and" + "".join(" " + formula_text(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + formula_text(p) for p in f.parts) + ")"
    if isinstance(f, Not):
        return f"(not {formula_text(f.sub)})"
    raise ModelError(f"not a formula node: {f!r}")


@dataclass(frozen=True)
class Outcome:
    """One possible effect of an action: fluents to add and to delete."""

    adds: frozenset[str] = frozenset()
    deletes: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        overlap = self.adds & self.deletes
        if overlap:
            raise ModelError(f"outcome adds and deletes overlap: {sorted(overlap)}")

    @property
    def empty(self) -> bool:
        return not self.adds and not self.deletes

    def fluents(self) -> frozenset[str]:
        return self.adds | self.deletes


def outcome(add: Iterable[str] = (), delete: Iterable[str] = ()) -> Outcome:
    return Outcome(frozenset(add), frozenset(delete))


def apply_outcome(s: State, o: Outcome) -> State:
    """Next state after the outcome occurs; the input state is untouched."""
    return (s - o.deletes) | o.adds


def outcome_formula(o: Outcome) -> Formula:
    """The outcome read as a formula: added fluents positively, deleted ones
    negated. The empty outcome reads as `TRUE`."""
    parts: list[Formula] = [Lit(f, True) for f in sorted(o.adds)]
    parts += [Lit(f, False) for f in sorted(o.deletes)]
    return conj(*parts) if parts else TRUE


@dataclass(frozen=True)
class NDAction:
    """Action with a precondition and one or more alternative outcomes.

    Exactly one outcome occurs per execution; which one is only known
    afterwards. An action with a single outcome is deterministic. `kind`
    says how the executor realizes the action: by messaging the user
    (dialogue), by calling an external service (service), or by an internal
    computation (system).
    """

    name: str
    kind: str
    precondition: Formula
    outcomes: tuple[Outcome, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ModelError("action name must be non-empty")
        if self.kind not in ACTION_KINDS:
            raise ModelError(f"unknown action kind {self.kind!r} for {self.name}")
        if not self.outcomes:
            raise ModelError(f"action {self.name} needs at least one outcome")

    @property
    def deterministic(self) -> bool:
        return len(self.outcomes) == 1

    def fluents(self) -> frozenset[str]:
        out = formula_fluents(self.precondition)
        for o in self.outcomes:
            out |= o.fluents()
        return out


def applicable(a: NDAction, s: State) -> bool:
    return eval_formula(a.precondition, s)


@dataclass(frozen=True)
class FONDProblem:
    """A planning problem: fluent vocabulary, initial state, actions, goal."""

    fluents: frozenset[str]
    init: State
    actions: tuple[NDAction, ...]
    goal: Formula
    name: str = "problem"

    def __post_init__(self) -> None:
        for f in self.fluents:
            if not FLUENT_NAME.match(f):
                raise ModelError(f"bad fluent name {f!r}")
        undeclared = self.init - self.fluents
        if undeclared:
            raise ModelError(f"init uses undeclared fluents: {sorted(undeclared)}")
        undeclared = formula_fluents(self.goal) - self.fluents
        if undeclared:
            raise ModelError(f"goal uses undeclared fluents: {sorted(undeclared)}")
        seen: set[str] = set()
        for a in self.actions:
            if a.name in seen:
                raise ModelError(f"duplicate action name {a.name!r}")
            seen.add(a.name)
            undeclared = a.fluents() - self.fluents
            if undeclared:
                raise ModelError(
                    f"action {a.name} uses undeclared fluents: {sorted(undeclared)}"
                )

    def action(self, name: str) -> NDAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def goal_satisfied(self, s: State) -> bool:
        return eval_formula(self.goal, s)

    def applicable_actions(self, s: State) -> Iterator[NDAction]:
        return (a for a in self.actions if applicable(a, s))
