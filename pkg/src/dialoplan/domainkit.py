"""Declarative builder for dialogue planning domains.

Encodes the modeling conventions the other modules rely on:

* slots: a context value `x` becomes the fluent pair `have-x` / `maybe-x`,
  a three-valued scheme (unknown / uncertain / known) in which at most one
  of the pair may hold in any reachable state;
* flags: plain booleans named `ok-x`;
* dialogue vs service vs system actions, with multi-outcome dialogue
  actions standing for questions;
* forced followups: fluents `forced-followup-<type>` and
  `force-reason-<reason>` that, while set, make the designated handler
  actions the only applicable ones; every other action gets the negated
  followup fluents conjoined onto its precondition;
* top-level intents: per intent `i` a fluent `intent-i` plus an action
  `assert-intent-i` whose sole effect adds the `goal` fluent.

The builder collects declarations and emits a lifted domain for the PDDL
layer, together with a static report of the checks that were enforced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .pddl import (
    ActionSchema,
    Atom,
    Cond,
    CondAnd,
    CondForallNot,
    CondNot,
    CondOr,
    EffectLit,
    LiftedDomain,
    LiftedProblem,
    OneOf,
    ParseError,
    Predicate,
    TypedObject,
    TypedVar,
    parse_condition_text,
)

FOLLOWUP_TYPE = "followup-type"
REASON_TYPE = "reason"
FORCED_FOLLOWUP = "forced-followup"
FORCE_REASON = "force-reason"
GOAL_FLUENT = "goal"


class DomainBuildError(ValueError):
    pass


@dataclass(frozen=True)
class FollowupSpec:
    """Followup types, their reason vocabulary, and the handler actions
    responsible for clearing each type."""

    types: tuple[str, ...]
    reasons: tuple[str, ...]
    handlers: Mapping[str, tuple[str, ...]]


@dataclass(frozen=True)
class IntentSpec:
    """Top-level intents as (name, condition) pairs; the condition says when
    the intent counts as satisfied."""

    intents: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class CheckResult:
    check: str
    subject: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class StaticReport:
    entries: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(e for e in self.entries if not e.passed)


@dataclass
class _ActionDraft:
    name: str
    kind: str
    precondition: Cond
    outcomes: tuple[tuple[tuple[Atom, ...], tuple[Atom, ...]], ...]  # (adds, dels)
    params: tuple[TypedVar, ...]


def _parse_effect_atom(text: str) -> Atom:
    parts = text.split()
    if not parts:
        raise DomainBuildError("empty effect atom")
    return Atom(parts[0], tuple(parts[1:]))


class DomainBuilder:
    """Single-owner mutable builder; `build()` freezes it into a domain."""

    def __init__(self, name: str):
        self.name = name
        self._slots: list[str] = []
        self._flags: list[str] = []
        self._fluents: list[str] = []
        self._actions: list[_ActionDraft] = []
        self._followups: FollowupSpec | None = None
        self._intents: IntentSpec | None = None

    # -- declarations -------------------------------------------------------

    def _all_names(self) -> set[str]:
        names = set(self._fluents)
        for s in self._slots:
            names |= {f"have-{s}", f"maybe-{s}"}
        names |= {f"ok-{f}" for f in self._flags}
        if self._followups:
            names |= {f"{FORCED_FOLLOWUP}-{t}" for t in self._followups.types}
            names |= {f"{FORCE_REASON}-{r}" for r in self._followups.reasons}
        if self._intents:
            names.add(GOAL_FLUENT)
            names |= {f"intent-{i}" for i, _ in self._intents.intents}
        return names

    def _check_fresh(self, *names: str) -> None:
        existing = self._all_names()
        for n in names:
            if n in existing:
                raise DomainBuildError(f"fluent {n!r} already declared")

    def declare_slot(self, name: str) -> "DomainBuilder":
        """Register a context value: fluents `have-<name>` and `maybe-<name>`,
        with the at-most-one-of-the-two obligation recorded for checking."""
        self._check_fresh(f"have-{name}", f"maybe-{name}")
        self._slots.append(name)
        return self

    def declare_flag(self, name: str) -> "DomainBuilder":
        self._check_fresh(f"ok-{name}")
        self._flags.append(name)
        return self

    def declare_fluent(self, name: str) -> "DomainBuilder":
        self._check_fresh(name)
        self._fluents.append(name)
        return self

    @property
    def slots(self) -> tuple[str, ...]:
        return tuple(self._slots)

    # -- actions ------------------------------------------------------------

    def _add_action(
        self,
        name: str,
        kind: str,
        precondition: str | Cond,
        outcomes: Sequence[Mapping[str, Iterable[str]] | None],
        parameters: Sequence[tuple[str, str]] = (),
    ) -> "DomainBuilder":
        if any(a.name == name for a in self._actions):
            raise DomainBuildError(f"action {name!r} already registered")
        if not outcomes:
            raise DomainBuildError(f"action {name!r} needs at least one outcome")
        cond = (
            parse_condition_text(precondition)
            if isinstance(precondition, str)
            else precondition
        )
        params = tuple(TypedVar(v, t) for v, t in parameters)
        parsed: list[tuple[tuple[Atom, ...], tuple[Atom, ...]]] = []
        for spec in outcomes:
            spec = spec or {}
            unknown = set(spec) - {"add", "delete"}
            if unknown:
                raise DomainBuildError(f"action {name!r}: unknown outcome keys {sorted(unknown)}")
            adds = tuple(_parse_effect_atom(a) for a in spec.get("add", ()))
            dels = tuple(_parse_effect_atom(a) for a in spec.get("delete", ()))
            parsed.append((adds, dels))
        draft = _ActionDraft(name, kind, cond, tuple(parsed), params)
        self._check_action_fluents(draft)
        self._actions.append(draft)
        return self

    def add_dialogue_action(self, name, precondition, outcomes, parameters=()):
        """A message to the user; more than one outcome means it is a
        question and the outcomes categorize the possible replies."""
        return self._add_action(name, "dialogue", precondition, outcomes, parameters)

    def add_service_action(self, name, precondition, outcomes, parameters=()):
        """An external call; outcomes categorize the responses worth
        distinguishing (including catch-all error outcomes)."""
        return self._add_action(name, "service", precondition, outcomes, parameters)

    def add_system_action(self, name, precondition, outcomes, parameters=()):
        return self._add_action(name, "system", precondition, outcomes, parameters)

    # -- pattern compilation --------------------------------------------------

    def compile_followups(self, spec: FollowupSpec) -> "DomainBuilder":
        if self._followups is not None:
            raise DomainBuildError("followups already compiled")
        for t in spec.types:
            if t not in spec.handlers or not spec.handlers[t]:
                raise DomainBuildError(f"followup type {t!r} has no handler")
        registered = {a.name for a in self._actions}
        for t, handlers in spec.handlers.items():
            if t not in spec.types:
                raise DomainBuildError(f"handler given for undeclared followup type {t!r}")
            missing = set(handlers) - registered
            if missing:
                raise DomainBuildError(
                    f"followup handlers reference unregistered actions: {sorted(missing)}"
                )
        self._followups = spec
        return self

    def compile_intents(self, spec: IntentSpec) -> "DomainBuilder":
        if self._intents is not None:
            raise DomainBuildError("intents already compiled")
        seen: set[str] = set()
        for name, _ in spec.intents:
            if name in seen:
                raise DomainBuildError(f"duplicate intent {name!r}")
            seen.add(name)
        self._intents = spec
        return self

    # -- reference checking ---------------------------------------------------

    def _atom_ok(self, atom: Atom, params: tuple[TypedVar, ...], lenient: bool) -> bool:
        if atom.args:
            # only the followup machinery is lifted at this level
            return atom.name in (FORCED_FOLLOWUP, FORCE_REASON)
        if atom.name in self._all_names():
            return True
        if lenient and atom.name in (FORCED_FOLLOWUP, FORCE_REASON, GOAL_FLUENT):
            return True
        if lenient and atom.name.startswith("intent-"):
            return True
        return False

    def _cond_atoms(self, cond: Cond) -> list[Atom]:
        if isinstance(cond, Atom):
            return [cond]
        if isinstance(cond, CondNot):
            return [cond.atom]
        if isinstance(cond, (CondAnd, CondOr)):
            out: list[Atom] = []
            for p in cond.parts:
                out.extend(self._cond_atoms(p))
            return out
        if isinstance(cond, CondForallNot):
            return [cond.atom]
        raise TypeError(f"not a condition: {cond!r}")

    def _check_action_fluents(self, draft: _ActionDraft) -> None:
        # followup/intent fluents may be referenced before their compile_*
        # call; everything else must already be declared
        atoms = self._cond_atoms(draft.precondition)
        for adds, dels in draft.outcomes:
            atoms.extend(adds)
            atoms.extend(dels)
        for atom in atoms:
            if not self._atom_ok(atom, draft.params, lenient=True):
                raise DomainBuildError(
                    f"action {draft.name!r} references undeclared fluent {atom.name!r}"
                )

    # -- build ----------------------------------------------------------------

    def _handled_types(self, action_name: str) -> set[str]:
        if not self._followups:
            return set()
        return {t for t, hs in self._followups.handlers.items() if action_name in hs}

    def _augment_precondition(self, draft: _ActionDraft) -> Cond:
        """Conjoin the negation of every followup type the action cannot
        handle; when it can handle none, use a quantified negation."""
        if not self._followups:
            return draft.precondition
        handled = self._handled_types(draft.name)
        unhandled = [t for t in self._followups.types if t not in handled]
        if not unhandled:
            return draft.precondition
        base = (
            list(draft.precondition.parts)
            if isinstance(draft.precondition, CondAnd)
            else [draft.precondition]
        )
        if not handled and len(unhandled) == len(self._followups.types):
            extra: list[Cond] = [
                CondForallNot(TypedVar("?t", FOLLOWUP_TYPE), Atom(FORCED_FOLLOWUP, ("?t",)))
            ]
        else:
            extra = [CondNot(Atom(FORCED_FOLLOWUP, (t,))) for t in unhandled]
        return CondAnd(tuple(base + extra))

    def _static_checks(self) -> list[CheckResult]:
        entries: list[CheckResult] = []
        if not self._actions:
            entries.append(CheckResult("non-empty", self.name, False, "no actions registered"))
        # slot scheme: three-valued pairs must stay exclusive; statically we
        # reject outcomes asserting both at once, the reachable-state check
        # runs against solved plans
        for s in self._slots:
            have, maybe = f"have-{s}", f"maybe-{s}"
            bad = [
                a.name
                for a in self._actions
                for adds, _ in a.outcomes
                if have in [x.name for x in adds] and maybe in [x.name for x in adds]
            ]
            entries.append(
                CheckResult(
                    "slot-exclusive",
                    s,
                    not bad,
                    f"outcome adds both {have} and {maybe} in {bad}" if bad else
                    f"no outcome asserts {have} and {maybe} together",
                )
            )
        if self._followups:
            for t, handlers in self._followups.handlers.items():
                for h in handlers:
                    draft = next(a for a in self._actions if a.name == h)
                    for i, (adds, dels) in enumerate(draft.outcomes):
                        deleted = any(
                            d.name == FORCED_FOLLOWUP and d.args == (t,) for d in dels
                        )
                        entries.append(
                            CheckResult(
                                "followup-deletion",
                                f"{h}[{i}]",
                                deleted,
                                f"outcome {i} of handler {h!r} must delete "
                                f"{FORCED_FOLLOWUP}-{t}" if not deleted else
                                f"handler clears {FORCED_FOLLOWUP}-{t}",
                            )
                        )
            # reasons ride along with a type, never alone
            for a in self._actions:
                for i, (adds, _) in enumerate(a.outcomes):
                    asserts_reason = any(x.name == FORCE_REASON for x in adds)
                    asserts_type = any(x.name == FORCED_FOLLOWUP for x in adds)
                    if asserts_reason:
                        entries.append(
                            CheckResult(
                                "reason-with-type",
                                f"{a.name}[{i}]",
                                asserts_type,
                                f"{FORCE_REASON} asserted without a {FORCED_FOLLOWUP} fluent"
                                if not asserts_type
                                else "reason asserted together with its followup type",
                            )
                        )
        return entries

    def build(self) -> tuple[LiftedDomain, StaticReport]:
        report = StaticReport(tuple(self._static_checks()))
        if not report.ok:
            bad = report.failures()[0]
            raise DomainBuildError(f"static check {bad.check!r} failed: {bad.detail}")

        types: list[str] = []
        predicates: list[Predicate] = []
        for s in self._slots:
            predicates.append(Predicate(f"have-{s}"))
            predicates.append(Predicate(f"maybe-{s}"))
        for f in self._flags:
            predicates.append(Predicate(f"ok-{f}"))
        for f in self._fluents:
            predicates.append(Predicate(f))
        if self._followups:
            types += [FOLLOWUP_TYPE, REASON_TYPE]
            predicates.append(
                Predicate(FORCED_FOLLOWUP, (TypedVar("?t", FOLLOWUP_TYPE),))
            )
            predicates.append(Predicate(FORCE_REASON, (TypedVar("?r", REASON_TYPE),)))
        if self._intents:
            predicates.append(Predicate(GOAL_FLUENT))
            for name, _ in self._intents.intents:
                predicates.append(Predicate(f"intent-{name}"))

        schemas: list[ActionSchema] = []
        for draft in self._actions:
            lits = tuple(
                [EffectLit(a, True) for a in draft.outcomes[0][0]]
                + [EffectLit(a, False) for a in draft.outcomes[0][1]]
            )
            if len(draft.outcomes) == 1:
                schemas.append(
                    ActionSchema(
                        draft.name,
                        draft.params,
                        self._augment_precondition(draft),
                        lits,
                        (),
                        draft.kind,
                    )
                )
            else:
                # an empty branch is legal (the self-loop outcome); it prints
                # as the empty conjunction
                branches = tuple(
                    tuple(
                        [EffectLit(a, True) for a in adds]
                        + [EffectLit(a, False) for a in dels]
                    )
                    for adds, dels in draft.outcomes
                )
                schemas.append(
                    ActionSchema(
                        draft.name,
                        draft.params,
                        self._augment_precondition(draft),
                        (),
                        (OneOf(branches),),
                        draft.kind,
                    )
                )
        if self._intents:
            for name, cond_text in self._intents.intents:
                pre = CondAnd(
                    (
                        Atom(f"intent-{name}"),
                        parse_condition_text(cond_text),
                    )
                )
                schemas.append(
                    ActionSchema(
                        f"assert-intent-{name}",
                        (),
                        pre,
                        (EffectLit(Atom(GOAL_FLUENT), True),),
                        (),
                        "system",
                    )
                )

        requirements = [":strips"]
        if types:
            requirements.append(":typing")
        requirements.append(":negative-preconditions")
        if any(
            isinstance(p, CondForallNot)
            for s in schemas
            for p in (
                s.precondition.parts if isinstance(s.precondition, CondAnd) else (s.precondition,)
            )
        ):
            requirements.append(":universal-preconditions")
        if any(s.effect_oneofs for s in schemas):
            requirements.append(":non-deterministic")

        domain = LiftedDomain(
            self.name,
            tuple(requirements),
            tuple(types),
            tuple(predicates),
            tuple(schemas),
        )
        self._verify_against_domain(domain)
        return domain, report

    def _verify_against_domain(self, domain: LiftedDomain) -> None:
        declared = {p.name: len(p.params) for p in domain.predicates}
        for schema in domain.actions:
            for atom in self._cond_atoms(schema.precondition):
                if atom.name not in declared or declared[atom.name] != len(atom.args):
                    raise DomainBuildError(
                        f"action {schema.name!r} references unknown fluent {atom.name!r}"
                    )
            for lit in schema.effect_lits:
                if lit.atom.name not in declared or declared[lit.atom.name] != len(lit.atom.args):
                    raise DomainBuildError(
                        f"action {schema.name!r} effect references unknown fluent "
                        f"{lit.atom.name!r}"
                    )
            for oneof in schema.effect_oneofs:
                for branch in oneof.branches:
                    for lit in branch:
                        if (
                            lit.atom.name not in declared
                            or declared[lit.atom.name] != len(lit.atom.args)
                        ):
                            raise DomainBuildError(
                                f"action {schema.name!r} effect references unknown fluent "
                                f"{lit.atom.name!r}"
                            )

    def make_problem(
        self, name: str, init: Sequence[str], goal: str | None = None
    ) -> LiftedProblem:
        """Assemble a problem for this domain: followup types and reasons
        become the object universe, intents default the goal to `(goal)`."""
        objects: list[TypedObject] = []
        if self._followups:
            objects += [TypedObject(t, FOLLOWUP_TYPE) for t in self._followups.types]
            objects += [TypedObject(r, REASON_TYPE) for r in self._followups.reasons]
        if goal is None:
            if not self._intents:
                raise DomainBuildError("a goal is required when no intents are declared")
            goal = f"({GOAL_FLUENT})"
        init_atoms = tuple(_parse_effect_atom(a) for a in init)
        return LiftedProblem(
            name,
            self.name,
            tuple(objects),
            init_atoms,
            parse_condition_text(goal, allow_or=True),
        )


# ---------------------------------------------------------------------------
# Declarative spec files (TOML or JSON)


def builder_from_spec(data: Mapping) -> DomainBuilder:
    try:
        b = DomainBuilder(data["domain"])
    except KeyError:
        raise DomainBuildError("spec needs a top-level 'domain' name") from None
    for s in data.get("slots", ()):
        b.declare_slot(s)
    for f in data.get("flags", ()):
        b.declare_flag(f)
    for f in data.get("fluents", ()):
        b.declare_fluent(f)
    for a in data.get("action", data.get("actions", ())):
        kind = a.get("kind", "dialogue")
        if kind not in ("dialogue", "service", "system"):
            raise DomainBuildError(f"action {a.get('name')!r}: unknown kind {kind!r}")
        params = tuple((p[0], p[1]) for p in a.get("parameters", ()))
        adder = {
            "dialogue": b.add_dialogue_action,
            "service": b.add_service_action,
            "system": b.add_system_action,
        }[kind]
        try:
            adder(a["name"], a["precondition"], a.get("outcomes", [{}]), params)
        except ParseError as exc:
            raise DomainBuildError(f"action {a.get('name')!r}: {exc}") from exc
    if "followups" in data:
        fu = data["followups"]
        b.compile_followups(
            FollowupSpec(
                tuple(fu.get("types", ())),
                tuple(fu.get("reasons", ())),
                {t: tuple(hs) for t, hs in fu.get("handlers", {}).items()},
            )
        )
    intents = data.get("intent", data.get("intents", ()))
    if intents:
        b.compile_intents(IntentSpec(tuple((i["name"], i["condition"]) for i in intents)))
    return b


def load_spec_text(text: str, format: str = "toml") -> DomainBuilder:
    if format == "toml":
        try:
            import tomllib  # py311+
        except ImportError:
            import tomli as tomllib
        data = tomllib.loads(text)
    elif format == "json":
        import json

        data = json.loads(text)
    else:
        raise DomainBuildError(f"unknown spec format {format!r}")
    return builder_from_spec(data)


def spec_problems(data: Mapping, builder: DomainBuilder) -> list[LiftedProblem]:
    problems = []
    for p in data.get("problem", data.get("problems", ())):
        problems.append(builder.make_problem(p["name"], p.get("init", ()), p.get("goal")))
    return problems
