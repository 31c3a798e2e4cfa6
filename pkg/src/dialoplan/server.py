"""HTTP gateway: a thin adapter over the orchestrator and planner.

Every endpoint delegates to the corresponding library call; the only state
kept here is the in-memory session table with idle expiry. One message per
session at a time: concurrent posts to the same session get 409 with a
retry hint rather than being queued.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import fixtures as fixture_registry
from .orchestrator import (
    AWAITING_USER,
    DONE,
    RUNNING,
    Fixture,
    PlanLibrary,
    Session,
    session_for_fixture,
    step,
)
from .pddl import GroundingError, ParseError, ground, parse_domain, parse_problem
from .plan import DialoguePlan, compile_plan, to_json
from .planner import PlanningBudgetExceeded, Unsolvable, solve

DEFAULT_TTL_SECONDS = 30 * 60


class CreateSessionRequest(BaseModel):
    fixture: str | None = None
    domain: str | None = None
    problem: str | None = None
    context0: dict | None = None
    max_loop_visits: int | None = None


class MessageRequest(BaseModel):
    text: str


@dataclass
class _Entry:
    plan: DialoguePlan
    session: Session | None  # None: plan-only (no execution profile)
    fixture_name: str | None
    last_access: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def status(self) -> str:
        return self.session.status if self.session else "plan-only"

    @property
    def current(self) -> int:
        return self.session.current if self.session else self.plan.initial


def _load_extra_fixtures(directory: str) -> list[tuple[str, DialoguePlan]]:
    """Plan-only fixtures from `<name>.domain.pddl` + `<name>.problem.pddl`
    pairs; they can be listed and viewed but not conversed with."""
    out = []
    root = Path(directory)
    for dom_path in sorted(root.glob("*.domain.pddl")):
        name = dom_path.name[: -len(".domain.pddl")]
        prob_path = root / f"{name}.problem.pddl"
        if not prob_path.exists():
            continue
        dom = parse_domain(dom_path.read_text())
        prob = parse_problem(prob_path.read_text(), dom)
        plan = compile_plan(solve(ground(dom, prob)))
        out.append((name, plan))
    return out


def create_app(
    library: PlanLibrary | None = None,
    *,
    ttl_seconds: float = DEFAULT_TTL_SECONDS,
    fixtures_dir: str | None = None,
    precompute: bool = True,
) -> FastAPI:
    app = FastAPI(title="dialoplan gateway")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    lib = library or fixture_registry.make_library()
    sessions: dict[str, _Entry] = {}
    table_lock = threading.Lock()

    extra_dir = fixtures_dir or os.environ.get("DIALOPLAN_FIXTURES_DIR")
    extra_plans: dict[str, DialoguePlan] = {}
    if extra_dir and Path(extra_dir).is_dir():
        extra_plans = dict(_load_extra_fixtures(extra_dir))

    if precompute:
        for name in lib.names():
            fixture = lib.fixture(name)
            problem = fixture.ground_problem()
            lib.plan_for(fixture, problem.init)

    def _get_entry(session_id: str) -> _Entry:
        with table_lock:
            entry = sessions.get(session_id)
            if entry is None:
                raise HTTPException(404, "unknown session")
            if time.monotonic() - entry.last_access > ttl_seconds:
                del sessions[session_id]
                raise HTTPException(410, "session expired")
            entry.last_access = time.monotonic()
            return entry

    def _snapshot(entry: _Entry, session_id: str, events=None) -> dict:
        out = {
            "id": session_id,
            "fixture": entry.fixture_name,
            "status": entry.status,
            "current_node": entry.current,
            "branch_taken": entry.session.last_branch if entry.session else None,
        }
        if events is not None:
            out["events"] = [e.to_dict() for e in events]
        return out

    @app.get("/fixtures")
    def list_fixtures():
        bundled = [
            {
                "name": name,
                "title": lib.fixture(name).title,
                "top_intent": lib.fixture(name).top_intent,
                "executable": True,
            }
            for name in lib.names()
        ]
        extra = [
            {"name": name, "title": name, "top_intent": None, "executable": False}
            for name in extra_plans
        ]
        return {"fixtures": bundled + extra}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        if req.fixture:
            if req.fixture in extra_plans:
                entry = _Entry(extra_plans[req.fixture], None, req.fixture)
                session_id = f"planonly-{len(sessions)}-{int(time.monotonic()*1000)}"
                with table_lock:
                    sessions[session_id] = entry
                return _snapshot(entry, session_id, events=[])
            try:
                fixture = lib.fixture(req.fixture)
            except KeyError:
                raise HTTPException(404, f"unknown fixture {req.fixture!r}")
            try:
                session = session_for_fixture(
                    fixture,
                    req.context0,
                    library=lib,
                    max_loop_visits=req.max_loop_visits,
                )
            except Unsolvable:
                raise HTTPException(422, "no plan achieves the goal from this context")
            events = []
            if session.status == RUNNING:
                events = step(session).events
            entry = _Entry(session.plan, session, fixture.name)
            with table_lock:
                sessions[session.id] = entry
            return _snapshot(entry, session.id, events)
        if req.domain and req.problem:
            try:
                dom = parse_domain(req.domain)
                prob = parse_problem(req.problem, dom)
                problem = ground(dom, prob)
            except (ParseError, GroundingError) as exc:
                raise HTTPException(400, str(exc))
            try:
                plan = compile_plan(solve(problem))
            except Unsolvable:
                raise HTTPException(422, "unsolvable")
            except PlanningBudgetExceeded as exc:
                raise HTTPException(422, f"budget exceeded: {exc}")
            entry = _Entry(plan, None, None)
            session_id = f"planonly-{len(sessions)}-{int(time.monotonic()*1000)}"
            with table_lock:
                sessions[session_id] = entry
            return _snapshot(entry, session_id, events=[])
        raise HTTPException(400, "body needs either 'fixture' or 'domain'+'problem'")

    @app.post("/sessions/{session_id}/message")
    def post_message(session_id: str, req: MessageRequest):
        entry = _get_entry(session_id)
        if entry.session is None:
            raise HTTPException(409, "session has no execution profile (plan-only)")
        if not entry.lock.acquire(blocking=False):
            raise HTTPException(409, "session is processing another message; retry")
        try:
            if entry.session.status != AWAITING_USER:
                raise HTTPException(
                    409, f"session is {entry.session.status}, not awaiting input"
                )
            result = step(entry.session, req.text)
            return _snapshot(entry, session_id, result.events)
        finally:
            entry.lock.release()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        entry = _get_entry(session_id)
        out = _snapshot(entry, session_id)
        if entry.session is not None:
            out["transcript"] = entry.session.transcript
            out["context"] = entry.session.context.snapshot()
        return out

    @app.get("/sessions/{session_id}/plan")
    def get_plan(session_id: str):
        entry = _get_entry(session_id)
        doc = to_json(entry.plan)
        doc["cursor"] = entry.current
        return doc

    return app
