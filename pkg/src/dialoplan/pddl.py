"""Parser, printer and grounder for a small non-deterministic PDDL subset.

Supported requirements: :strips :typing :negative-preconditions
:universal-preconditions :non-deterministic (the `oneof` effect keyword).
Types are flat, effects are literal trees with `oneof` at the top level of
the effect or one level under `and`.

One extension over plain PDDL: an action may carry `:kind dialogue|service|
system` so a domain file is self-contained about how each action is
executed. Absent means dialogue; the printer only emits non-defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .model import (
    ACTION_KINDS,
    And,
    FLUENT_NAME,
    FONDProblem,
    Formula,
    Lit,
    NDAction,
    Or,
    Outcome,
    TRUE,
    conj,
    eval_formula,
)

KNOWN_REQUIREMENTS = (
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":universal-preconditions",
    ":non-deterministic",
)

DEFAULT_GROUND_ACTION_CAP = 100_000


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)


class GroundingError(ValueError):
    pass


class GroundingCapExceeded(GroundingError):
    """Grounding would produce more actions than the configured cap."""

    def __init__(self, schema: str, cap: int):
        self.schema = schema
        self.cap = cap
        super().__init__(
            f"grounding schema {schema!r} exceeds the cap of {cap} ground actions"
        )


# ---------------------------------------------------------------------------
# Lifted structures


@dataclass(frozen=True)
class TypedVar:
    name: str  # includes the leading '?'
    type: str


@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[TypedVar, ...] = ()


@dataclass(frozen=True)
class Atom:
    """Possibly-lifted atom; args are variables (`?x`) or object names."""

    name: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class CondNot:
    atom: Atom


@dataclass(frozen=True)
class CondAnd:
    parts: tuple["Cond", ...] = ()


@dataclass(frozen=True)
class CondForallNot:
    var: TypedVar
    atom: Atom


@dataclass(frozen=True)
class CondOr:
    """Disjunction; accepted in goal conditions only."""

    parts: tuple["Cond", ...] = ()


Cond = Atom | CondNot | CondAnd | CondForallNot | CondOr


@dataclass(frozen=True)
class EffectLit:
    atom: Atom
    positive: bool = True


@dataclass(frozen=True)
class OneOf:
    """Non-deterministic choice; each branch is a conjunction of literals."""

    branches: tuple[tuple[EffectLit, ...], ...]


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[TypedVar, ...] = ()
    precondition: Cond = CondAnd()
    effect_lits: tuple[EffectLit, ...] = ()
    effect_oneofs: tuple[OneOf, ...] = ()
    kind: str = "dialogue"


@dataclass(frozen=True)
class LiftedDomain:
    name: str
    requirements: tuple[str, ...] = ()
    types: tuple[str, ...] = ()
    predicates: tuple[Predicate, ...] = ()
    actions: tuple[ActionSchema, ...] = ()

    def predicate(self, name: str) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class TypedObject:
    name: str
    type: str


@dataclass(frozen=True)
class LiftedProblem:
    name: str
    domain_name: str
    objects: tuple[TypedObject, ...] = ()
    init: tuple[Atom, ...] = ()
    goal: Cond = CondAnd()


# ---------------------------------------------------------------------------
# Tokenizer / s-expression reader


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            col += 1
            i += 1
            continue
        if c in "()":
            toks.append(_Tok(c, line, col))
            col += 1
            i += 1
            continue
        start, start_col = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        toks.append(_Tok(text[start:i], line, start_col))
    return toks


_SExpr = "_Tok | list"


def _read_sexprs(toks: list[_Tok]) -> list:
    stack: list[list] = [[]]
    opens: list[_Tok] = []
    for t in toks:
        if t.text == "(":
            lst: list = []
            lst.append(t)  # position marker, stripped below
            stack[-1].append(lst)
            stack.append(lst)
            opens.append(t)
        elif t.text == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", t.line, t.col)
            stack.pop()
            opens.pop()
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        t = opens[-1]
        raise ParseError("unclosed '('", t.line, t.col)
    return stack[0]


def _pos(node) -> tuple[int, int]:
    if isinstance(node, _Tok):
        return node.line, node.col
    if node and isinstance(node[0], _Tok):
        return node[0].line, node[0].col
    return 0, 0


def _items(node: list) -> list:
    """Children of a parenthesized node, without the position marker."""
    return node[1:]


def _expect_list(node, what: str) -> list:
    if not isinstance(node, list):
        line, col = _pos(node)
        raise ParseError(f"expected {what}, got {node.text!r}", line, col)
    return node


def _expect_word(node, what: str) -> _Tok:
    if isinstance(node, list):
        line, col = _pos(node)
        raise ParseError(f"expected {what}, got a list", line, col)
    return node


# ---------------------------------------------------------------------------
# Domain parsing


def _parse_typed_vars(items: list, what: str) -> tuple[TypedVar, ...]:
    """Parse `VAR - TYPE` triples from a flat token list."""
    out: list[TypedVar] = []
    i = 0
    while i < len(items):
        var = _expect_word(items[i], f"{what} variable")
        if not var.text.startswith("?"):
            raise ParseError(f"{what} variable must start with '?'", var.line, var.col)
        if i + 2 >= len(items) or _expect_word(items[i + 1], "'-'").text != "-":
            raise ParseError(f"{what} variable {var.text} needs '- TYPE'", var.line, var.col)
        typ = _expect_word(items[i + 2], f"{what} type")
        out.append(TypedVar(var.text, typ.text))
        i += 3
    return tuple(out)


def _parse_atom(node, preds: dict[str, Predicate] | None) -> Atom:
    lst = _expect_list(node, "atom")
    items = _items(lst)
    if not items:
        line, col = _pos(lst)
        raise ParseError("empty atom", line, col)
    head = _expect_word(items[0], "predicate name")
    args = tuple(_expect_word(a, "atom argument").text for a in items[1:])
    if preds is not None:
        if head.text not in preds:
            raise ParseError(f"undeclared predicate {head.text!r}", head.line, head.col)
        arity = len(preds[head.text].params)
        if arity != len(args):
            raise ParseError(
                f"atom {head.text!r} has {len(args)} args, predicate expects {arity}",
                head.line,
                head.col,
            )
    return Atom(head.text, args)


def _parse_cond(
    node, preds: dict[str, Predicate] | None, types: Sequence[str], allow_or: bool = False
) -> Cond:
    lst = _expect_list(node, "condition")
    items = _items(lst)
    if not items:
        line, col = _pos(lst)
        raise ParseError("empty condition", line, col)
    head = items[0]
    if not isinstance(head, _Tok) or head.text not in ("and", "or", "not", "forall"):
        return _parse_atom(lst, preds)
    if head.text == "and":
        return CondAnd(tuple(_parse_cond(p, preds, types, allow_or) for p in items[1:]))
    if head.text == "or":
        if not allow_or:
            raise ParseError("(or ...) is only allowed in goal conditions", head.line, head.col)
        return CondOr(tuple(_parse_cond(p, preds, types, allow_or) for p in items[1:]))
    if head.text == "not":
        if len(items) != 2:
            raise ParseError("(not ...) takes exactly one atom", head.line, head.col)
        return CondNot(_parse_atom(items[1], preds))
    # forall
    if len(items) != 3:
        raise ParseError("(forall ((?v - type)) (not atom)) expected", head.line, head.col)
    var_outer = _expect_list(items[1], "forall variable list")
    var_items = _items(var_outer)
    # accept both ((?v - t)) and (?v - t)
    if len(var_items) == 1 and isinstance(var_items[0], list):
        var_items = _items(var_items[0])
    tvars = _parse_typed_vars(var_items, "forall")
    if len(tvars) != 1:
        raise ParseError("forall supports exactly one variable", head.line, head.col)
    if tvars[0].type not in types:
        raise ParseError(f"undeclared type {tvars[0].type!r}", head.line, head.col)
    body = _expect_list(items[2], "forall body")
    body_items = _items(body)
    if (
        not body_items
        or not isinstance(body_items[0], _Tok)
        or body_items[0].text != "not"
        or len(body_items) != 2
    ):
        line, col = _pos(body)
        raise ParseError("forall body must be (not atom)", line, col)
    return CondForallNot(tvars[0], _parse_atom(body_items[1], preds))


def _parse_effect_lit(node, preds) -> EffectLit:
    lst = _expect_list(node, "effect literal")
    items = _items(lst)
    if items and isinstance(items[0], _Tok) and items[0].text == "not":
        if len(items) != 2:
            raise ParseError("(not ...) takes exactly one atom", items[0].line, items[0].col)
        return EffectLit(_parse_atom(items[1], preds), False)
    return EffectLit(_parse_atom(lst, preds), True)


def _parse_oneof(node, preds) -> OneOf:
    items = _items(node)
    head = items[0]
    if len(items) < 2:
        raise ParseError("(oneof ...) needs at least one branch", head.line, head.col)
    branches: list[tuple[EffectLit, ...]] = []
    for br in items[1:]:
        lst = _expect_list(br, "oneof branch")
        br_items = _items(lst)
        if br_items and isinstance(br_items[0], _Tok) and br_items[0].text == "and":
            branches.append(tuple(_parse_effect_lit(p, preds) for p in br_items[1:]))
        else:
            branches.append((_parse_effect_lit(lst, preds),))
    return OneOf(tuple(branches))


def _head_word(node) -> str | None:
    if isinstance(node, list):
        items = _items(node)
        if items and isinstance(items[0], _Tok):
            return items[0].text
    return None


def _parse_effect(node, preds) -> tuple[tuple[EffectLit, ...], tuple[OneOf, ...]]:
    lits: list[EffectLit] = []
    oneofs: list[OneOf] = []
    head = _head_word(node)
    if head == "and":
        for part in _items(_expect_list(node, "effect"))[1:]:
            inner = _head_word(part)
            if inner == "oneof":
                oneofs.append(_parse_oneof(part, preds))
            elif inner == "and":
                line, col = _pos(part)
                raise ParseError("nested (and ...) not allowed in effects", line, col)
            else:
                lits.append(_parse_effect_lit(part, preds))
    elif head == "oneof":
        oneofs.append(_parse_oneof(node, preds))
    else:
        lits.append(_parse_effect_lit(node, preds))
    return tuple(lits), tuple(oneofs)


def _parse_action(node: list, preds: dict[str, Predicate], types: Sequence[str]) -> ActionSchema:
    items = _items(node)
    if len(items) < 2:
        line, col = _pos(node)
        raise ParseError("(:action NAME ...) expected", line, col)
    name_tok = _expect_word(items[1], "action name")
    fields: dict[str, object] = {}
    i = 2
    while i < len(items):
        key = _expect_word(items[i], "action keyword")
        if not key.text.startswith(":"):
            raise ParseError(f"expected keyword, got {key.text!r}", key.line, key.col)
        if i + 1 >= len(items):
            raise ParseError(f"missing value for {key.text}", key.line, key.col)
        fields[key.text] = items[i + 1]
        i += 2
    unknown = set(fields) - {":parameters", ":precondition", ":effect", ":kind"}
    if unknown:
        raise ParseError(
            f"unknown action field(s) {sorted(unknown)}", name_tok.line, name_tok.col
        )
    params: tuple[TypedVar, ...] = ()
    if ":parameters" in fields:
        plist = _expect_list(fields[":parameters"], "parameter list")
        pitems = _items(plist)
        if pitems and all(isinstance(p, list) for p in pitems):
            flat: list = []
            for p in pitems:
                flat.extend(_items(p))
            pitems = flat
        params = _parse_typed_vars(pitems, "parameter")
        for tv in params:
            if tv.type not in types:
                raise ParseError(f"undeclared type {tv.type!r}", name_tok.line, name_tok.col)
    kind = "dialogue"
    if ":kind" in fields:
        ktok = _expect_word(fields[":kind"], "action kind")
        if ktok.text not in ACTION_KINDS:
            raise ParseError(f"unknown action kind {ktok.text!r}", ktok.line, ktok.col)
        kind = ktok.text
    pre: Cond = CondAnd()
    if ":precondition" in fields:
        pre = _parse_cond(fields[":precondition"], preds, types)
    if ":effect" not in fields:
        raise ParseError(f"action {name_tok.text} has no :effect", name_tok.line, name_tok.col)
    lits, oneofs = _parse_effect(fields[":effect"], preds)
    return ActionSchema(name_tok.text, params, pre, lits, oneofs, kind)


def parse_domain(text: str) -> LiftedDomain:
    forms = _read_sexprs(_tokenize(text))
    if len(forms) != 1:
        raise ParseError("expected exactly one (define ...) form")
    top = _expect_list(forms[0], "(define ...)")
    items = _items(top)
    if not items or _expect_word(items[0], "define").text != "define":
        line, col = _pos(top)
        raise ParseError("expected (define (domain ...) ...)", line, col)
    header = _items(_expect_list(items[1], "(domain NAME)"))
    if len(header) != 2 or _expect_word(header[0], "domain").text != "domain":
        line, col = _pos(items[1])
        raise ParseError("expected (domain NAME)", line, col)
    name = _expect_word(header[1], "domain name").text

    requirements: tuple[str, ...] = ()
    types: tuple[str, ...] = ()
    predicates: list[Predicate] = []
    actions: list[ActionSchema] = []
    preds_by_name: dict[str, Predicate] = {}

    for section in items[2:]:
        lst = _expect_list(section, "domain section")
        head = _expect_word(_items(lst)[0], "section keyword")
        body = _items(lst)[1:]
        if head.text == ":requirements":
            requirements = tuple(_expect_word(r, "requirement").text for r in body)
            for r, tok in zip(requirements, body):
                if r not in KNOWN_REQUIREMENTS:
                    raise ParseError(f"unknown requirement {r!r}", tok.line, tok.col)
        elif head.text == ":types":
            types = tuple(_expect_word(t, "type name").text for t in body)
        elif head.text == ":predicates":
            for pnode in body:
                plist = _expect_list(pnode, "predicate declaration")
                pitems = _items(plist)
                pname = _expect_word(pitems[0], "predicate name")
                rest: list = []
                for it in pitems[1:]:
                    rest.extend(_items(it)) if isinstance(it, list) else rest.append(it)
                params = _parse_typed_vars(rest, "predicate")
                for tv in params:
                    if tv.type not in types:
                        raise ParseError(
                            f"undeclared type {tv.type!r}", pname.line, pname.col
                        )
                if pname.text in preds_by_name:
                    raise ParseError(f"duplicate predicate {pname.text!r}", pname.line, pname.col)
                pred = Predicate(pname.text, params)
                predicates.append(pred)
                preds_by_name[pname.text] = pred
        elif head.text == ":action":
            actions.append(_parse_action(lst, preds_by_name, types))
        else:
            raise ParseError(f"unknown domain section {head.text!r}", head.line, head.col)

    return LiftedDomain(name, requirements, types, tuple(predicates), tuple(actions))


def parse_problem(text: str, dom: LiftedDomain) -> LiftedProblem:
    forms = _read_sexprs(_tokenize(text))
    if len(forms) != 1:
        raise ParseError("expected exactly one (define ...) form")
    top = _expect_list(forms[0], "(define ...)")
    items = _items(top)
    if not items or _expect_word(items[0], "define").text != "define":
        line, col = _pos(top)
        raise ParseError("expected (define (problem ...) ...)", line, col)
    header = _items(_expect_list(items[1], "(problem NAME)"))
    if len(header) != 2 or _expect_word(header[0], "problem").text != "problem":
        line, col = _pos(items[1])
        raise ParseError("expected (problem NAME)", line, col)
    name = _expect_word(header[1], "problem name").text

    preds = {p.name: p for p in dom.predicates}
    domain_name = ""
    objects: list[TypedObject] = []
    init: list[Atom] = []
    goal: Cond = CondAnd()

    for section in items[2:]:
        lst = _expect_list(section, "problem section")
        head = _expect_word(_items(lst)[0], "section keyword")
        body = _items(lst)[1:]
        if head.text == ":domain":
            domain_name = _expect_word(body[0], "domain name").text
            if domain_name != dom.name:
                raise ParseError(
                    f"problem references domain {domain_name!r}, expected {dom.name!r}",
                    head.line,
                    head.col,
                )
        elif head.text == ":objects":
            flat: list = []
            for entry in body:
                flat.extend(_items(entry)) if isinstance(entry, list) else flat.append(entry)
            i = 0
            while i < len(flat):
                otok = _expect_word(flat[i], "object name")
                if i + 2 >= len(flat) or _expect_word(flat[i + 1], "'-'").text != "-":
                    raise ParseError(f"object {otok.text} needs '- TYPE'", otok.line, otok.col)
                ttok = _expect_word(flat[i + 2], "object type")
                if ttok.text not in dom.types:
                    raise ParseError(f"undeclared object type {ttok.text!r}", ttok.line, ttok.col)
                objects.append(TypedObject(otok.text, ttok.text))
                i += 3
        elif head.text == ":init":
            for atom_node in body:
                atom = _parse_atom(atom_node, preds)
                if any(a.startswith("?") for a in atom.args):
                    line, col = _pos(atom_node)
                    raise ParseError("init atoms must be ground", line, col)
                init.append(atom)
        elif head.text == ":goal":
            goal = _parse_cond(body[0], preds, dom.types, allow_or=True)
        else:
            raise ParseError(f"unknown problem section {head.text!r}", head.line, head.col)

    return LiftedProblem(name, domain_name or dom.name, tuple(objects), tuple(init), goal)


def parse_condition_text(
    text: str, dom: LiftedDomain | None = None, allow_or: bool = False
) -> Cond:
    """Parse a single condition from a string (builder and spec-file input)."""
    forms = _read_sexprs(_tokenize(text))
    if len(forms) != 1:
        raise ParseError("expected exactly one condition")
    preds = {p.name: p for p in dom.predicates} if dom else None
    types = dom.types if dom else ()
    return _parse_cond(forms[0], preds, types, allow_or)


# ---------------------------------------------------------------------------
# Printing


def _atom_text(a: Atom) -> str:
    return "(" + " ".join((a.name,) + a.args) + ")"


def _cond_text(c: Cond) -> str:
    if isinstance(c, Atom):
        return _atom_text(c)
    if isinstance(c, CondNot):
        return f"(not {_atom_text(c.atom)})"
    if isinstance(c, CondAnd):
        return "(and" + "".join(" " + _cond_text(p) for p in c.parts) + ")"
    if isinstance(c, CondOr):
        return "(or" + "".join(" " + _cond_text(p) for p in c.parts) + ")"
    if isinstance(c, CondForallNot):
        return (
            f"(forall (({c.var.name} - {c.var.type})) "
            f"(not {_atom_text(c.atom)}))"
        )
    raise TypeError(f"not a condition: {c!r}")


def _efflit_text(e: EffectLit) -> str:
    return _atom_text(e.atom) if e.positive else f"(not {_atom_text(e.atom)})"


def _oneof_text(o: OneOf) -> str:
    parts = []
    for branch in o.branches:
        if len(branch) == 1:
            parts.append(_efflit_text(branch[0]))
        else:
            parts.append("(and" + "".join(" " + _efflit_text(l) for l in branch) + ")")
    return "(oneof " + " ".join(parts) + ")"


def _effect_text(a: ActionSchema) -> str:
    pieces = [_efflit_text(l) for l in a.effect_lits]
    pieces += [_oneof_text(o) for o in a.effect_oneofs]
    if len(pieces) == 1:
        return pieces[0]
    return "(and " + " ".join(pieces) + ")"


def print_domain(dom: LiftedDomain) -> str:
    lines = [f"(define (domain {dom.name})"]
    if dom.requirements:
        lines.append("  (:requirements " + " ".join(dom.requirements) + ")")
    if dom.types:
        lines.append("  (:types " + " ".join(dom.types) + ")")
    preds = []
    for p in dom.predicates:
        params = "".join(f" ({tv.name} - {tv.type})" for tv in p.params)
        preds.append(f"({p.name}{params})")
    lines.append("  (:predicates " + " ".join(preds) + ")")
    for a in dom.actions:
        lines.append(f"  (:action {a.name}")
        if a.kind != "dialogue":
            lines.append(f"    :kind {a.kind}")
        params = "".join(f"({tv.name} - {tv.type})" for tv in a.params)
        lines.append(f"    :parameters ({params})")
        lines.append(f"    :precondition {_cond_text(a.precondition)}")
        lines.append(f"    :effect {_effect_text(a)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(prob: LiftedProblem) -> str:
    lines = [f"(define (problem {prob.name})", f"  (:domain {prob.domain_name})"]
    if prob.objects:
        objs = " ".join(f"({o.name} - {o.type})" for o in prob.objects)
        lines.append(f"  (:objects {objs})")
    lines.append("  (:init " + " ".join(_atom_text(a) for a in prob.init) + ")")
    lines.append(f"  (:goal {_cond_text(prob.goal)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Grounding


def ground_atom_name(atom: Atom, binding: dict[str, str] | None = None) -> str:
    parts = [atom.name]
    for arg in atom.args:
        if arg.startswith("?"):
            if not binding or arg not in binding:
                raise GroundingError(f"unbound variable {arg} in atom {atom.name}")
            parts.append(binding[arg])
        else:
            parts.append(arg)
    return "-".join(parts)


def _objects_by_type(prob: LiftedProblem) -> dict[str, list[str]]:
    by_type: dict[str, list[str]] = {}
    for o in prob.objects:
        by_type.setdefault(o.type, []).append(o.name)
    return by_type


def _ground_cond(
    c: Cond, binding: dict[str, str], by_type: dict[str, list[str]]
) -> Formula:
    if isinstance(c, Atom):
        return Lit(ground_atom_name(c, binding), True)
    if isinstance(c, CondNot):
        return Lit(ground_atom_name(c.atom, binding), False)
    if isinstance(c, CondAnd):
        return conj(*(_ground_cond(p, binding, by_type) for p in c.parts)) if c.parts else TRUE
    if isinstance(c, CondOr):
        return Or(tuple(_ground_cond(p, binding, by_type) for p in c.parts))
    if isinstance(c, CondForallNot):
        lits = []
        for obj in by_type.get(c.var.type, []):
            inner = dict(binding)
            inner[c.var.name] = obj
            lits.append(Lit(ground_atom_name(c.atom, inner), False))
        return conj(*lits) if lits else TRUE
    raise TypeError(f"not a condition: {c!r}")


def _ground_outcomes(a: ActionSchema, binding: dict[str, str]) -> tuple[Outcome, ...]:
    base_adds: set[str] = set()
    base_dels: set[str] = set()
    for l in a.effect_lits:
        name = ground_atom_name(l.atom, binding)
        (base_adds if l.positive else base_dels).add(name)
    choice_sets: list[list[tuple[set[str], set[str]]]] = []
    for oneof in a.effect_oneofs:
        branches = []
        for branch in oneof.branches:
            adds, dels = set(), set()
            for l in branch:
                name = ground_atom_name(l.atom, binding)
                (adds if l.positive else dels).add(name)
            branches.append((adds, dels))
        choice_sets.append(branches)
    outcomes = []
    for combo in product(*choice_sets) if choice_sets else [()]:
        adds, dels = set(base_adds), set(base_dels)
        for c_adds, c_dels in combo:
            adds |= c_adds
            dels |= c_dels
        try:
            outcomes.append(Outcome(frozenset(adds), frozenset(dels)))
        except ValueError as exc:
            raise GroundingError(f"action {a.name}: {exc}") from exc
    return tuple(outcomes)


def _may_hold(f: Formula, possibly_true: frozenset[str]) -> bool:
    """Optimistic satisfiability: can the formula hold in any reachable state,
    over-approximating reachability by `possibly_true`? Never says no wrongly."""
    if isinstance(f, Lit):
        return f.fluent in possibly_true if f.positive else True
    if isinstance(f, And):
        return all(_may_hold(p, possibly_true) for p in f.parts)
    if isinstance(f, Or):
        return any(_may_hold(p, possibly_true) for p in f.parts) if f.parts else False
    return True  # negated compounds: stay optimistic


def ground(
    dom: LiftedDomain,
    prob: LiftedProblem,
    *,
    prune_static: bool = True,
    max_ground_actions: int = DEFAULT_GROUND_ACTION_CAP,
) -> FONDProblem:
    """Instantiate every action schema over type-consistent object tuples and
    every predicate over object tuples, producing a propositional problem."""
    by_type = _objects_by_type(prob)

    fluents: set[str] = set()
    for p in dom.predicates:
        pools = [by_type.get(tv.type, []) for tv in p.params]
        for combo in product(*pools):
            name = "-".join((p.name,) + combo)
            if not FLUENT_NAME.match(name):
                raise GroundingError(f"ground fluent name {name!r} is not valid")
            fluents.add(name)

    actions: list[NDAction] = []
    names_seen: set[str] = set()
    for schema in dom.actions:
        pools = [by_type.get(tv.type, []) for tv in schema.params]
        for combo in product(*pools):
            if len(actions) + 1 > max_ground_actions:
                raise GroundingCapExceeded(schema.name, max_ground_actions)
            binding = {tv.name: obj for tv, obj in zip(schema.params, combo)}
            name = "-".join((schema.name,) + combo)
            if name in names_seen:
                raise GroundingError(f"duplicate ground action name {name!r}")
            names_seen.add(name)
            pre = _ground_cond(schema.precondition, binding, by_type)
            outcomes = _ground_outcomes(schema, binding)
            actions.append(NDAction(name, schema.kind, pre, outcomes))

    init = frozenset(ground_atom_name(a) for a in prob.init)
    missing = init - fluents
    if missing:
        raise GroundingError(f"init atoms not covered by predicates: {sorted(missing)}")
    goal = _ground_cond(prob.goal, {}, by_type)

    if prune_static:
        possibly_true = frozenset(init) | frozenset(
            f for a in actions for o in a.outcomes for f in o.adds
        )
        actions = [a for a in actions if _may_hold(a.precondition, possibly_true)]

    return FONDProblem(
        fluents=frozenset(fluents),
        init=init,
        actions=tuple(actions),
        goal=goal,
        name=prob.name,
    )


def ground_fixture(dom: LiftedDomain, prob: LiftedProblem, **kwargs) -> FONDProblem:
    return ground(dom, prob, **kwargs)


def lifted_applicable(
    dom: LiftedDomain,
    prob: LiftedProblem,
    schema: ActionSchema,
    binding: dict[str, str],
    s: frozenset[str],
) -> bool:
    """Direct lifted-level applicability under a substitution (used to
    cross-check grounding)."""
    by_type = _objects_by_type(prob)
    return eval_formula(_ground_cond(schema.precondition, binding, by_type), s)
