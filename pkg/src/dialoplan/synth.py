"""Random instance generator and scalability experiment harness.

Instances mirror the texture of real dialogue models: preconditions are
small positive conjunctions (1-5 fluents), effects are either `select`
(exactly one of 2-5 fluents becomes true, like categorizing a user reply)
or `assign` (1-4 fluents flip independently, all polarity combinations as
outcomes, like a reply that settles several context aspects at once),
initial states carry 1-5 fluents and goals 1-2.

The experiment solves each instance, compiles the dialogue plan and
reports solution size (action nodes in the plan) against model size
(unique actions used), terminal nodes excluded from both.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from itertools import product
from random import Random
from typing import Callable, Sequence

from .model import FONDProblem, NDAction, Outcome, conj, lit
from .plan import compile_plan
from .planner import PlanningBudgetExceeded, Unsolvable, solve, validate

DEFAULT_ACTION_RANGE = (8, 20)
DEFAULT_FLUENT_RANGE = (10, 25)
RETRY_CAP = 20

CSV_COLUMNS = (
    "seed",
    "actions",
    "fluents",
    "solved",
    "solution_size",
    "model_size",
    "ratio",
    "attempts",
    "wall_ms",
)


@dataclass(frozen=True)
class GeneratorConfig:
    num_actions: int
    num_fluents: int
    seed: int


@dataclass
class SyntheticInstanceRecord:
    config: GeneratorConfig
    solved: bool
    degenerate: bool = False
    solution_size: int | None = None
    model_size: int | None = None
    ratio: float | None = None
    attempts: int = 1
    wall_ms: int = 0
    plan: object | None = None  # retained only when the experiment asks for it


def generate_instance(cfg: GeneratorConfig) -> FONDProblem:
    """Deterministic instance for a config: the same seed always produces
    the identical problem."""
    if cfg.num_fluents < 6:
        raise ValueError("need at least 6 fluents to cover the sampled ranges")
    if cfg.num_actions < 1:
        raise ValueError("need at least one action")
    rng = Random(cfg.seed)
    fluents = [f"f{i}" for i in range(cfg.num_fluents)]

    actions = []
    for i in range(cfg.num_actions):
        pre = conj(*(lit(f) for f in rng.sample(fluents, rng.randint(1, 5))))
        if rng.random() < 0.5:
            # select: exactly one of 2-5 fluents becomes true
            chosen = rng.sample(fluents, rng.randint(2, 5))
            outcomes = tuple(Outcome(frozenset([f]), frozenset()) for f in chosen)
        else:
            # assign: 1-4 fluents flip, one outcome per polarity combination
            chosen = rng.sample(fluents, rng.randint(1, 4))
            outcomes = tuple(
                Outcome(
                    frozenset(f for f, up in zip(chosen, bits) if up),
                    frozenset(f for f, up in zip(chosen, bits) if not up),
                )
                for bits in product((True, False), repeat=len(chosen))
            )
        actions.append(NDAction(f"a{i}", "dialogue", pre, outcomes))

    init = frozenset(rng.sample(fluents, rng.randint(1, 5)))
    goal = conj(*(lit(f) for f in rng.sample(fluents, rng.randint(1, 2))))
    return FONDProblem(
        fluents=frozenset(fluents),
        init=init,
        actions=tuple(actions),
        goal=goal,
        name=f"synthetic-{cfg.seed}",
    )


def default_sampler(rng: Random) -> tuple[int, int]:
    return (
        rng.randint(*DEFAULT_ACTION_RANGE),
        rng.randint(*DEFAULT_FLUENT_RANGE),
    )


def _derived_seed(base: int, attempt: int) -> int:
    return (base + attempt * 0x9E3779B97F4A7C15) % (2**63)


def _plan_sizes(plan) -> tuple[int, int]:
    action_nodes = [n for n in plan.nodes if n.id not in plan.goals]
    return len(action_nodes), len({n.action for n in action_nodes})


def run_experiment(
    n_instances: int,
    *,
    master_seed: int = 0,
    sampler: Callable[[Random], tuple[int, int]] = default_sampler,
    max_expansions: int = 200_000,
    max_seconds: float = 30.0,
    retry_cap: int = RETRY_CAP,
    record_timing: bool = True,
    check_solutions: bool = False,
    retry_degenerate: bool = True,
    keep_plans: bool = False,
) -> list[SyntheticInstanceRecord]:
    """Generate and solve `n_instances`; unsolvable draws are regenerated
    with derived seeds (counted in `attempts`), budget exhaustion is
    recorded as unsolved. Draws whose goal already holds initially are
    retried the same way by default, since they carry no ratio; pass
    `retry_degenerate=False` to keep them. With `record_timing` off the
    records (and any CSV made from them) are byte-stable across runs."""
    master = Random(master_seed)
    plans_of: list[tuple[int, int, int]] = []
    for _ in range(n_instances):
        na, nf = sampler(master)
        plans_of.append((na, nf, master.randrange(2**62)))

    records: list[SyntheticInstanceRecord] = []
    for na, nf, base_seed in plans_of:
        record = None
        t0 = time.monotonic()
        for attempt in range(retry_cap + 1):
            cfg = GeneratorConfig(na, nf, _derived_seed(base_seed, attempt))
            problem = generate_instance(cfg)
            try:
                sol = solve(problem, max_expansions=max_expansions, max_seconds=max_seconds)
            except Unsolvable:
                continue
            except PlanningBudgetExceeded:
                record = SyntheticInstanceRecord(cfg, solved=False, attempts=attempt + 1)
                break
            if check_solutions:
                report = validate(problem, sol)
                if not report.valid:
                    raise AssertionError(
                        f"solver produced an invalid solution for seed {cfg.seed}: "
                        f"{report.violations[0]}"
                    )
            plan = compile_plan(sol)
            solution_size, model_size = _plan_sizes(plan)
            if solution_size == 0:
                record = SyntheticInstanceRecord(
                    cfg,
                    solved=True,
                    degenerate=True,
                    solution_size=0,
                    model_size=0,
                    attempts=attempt + 1,
                )
                if retry_degenerate and attempt < retry_cap:
                    record = None
                    continue
            else:
                record = SyntheticInstanceRecord(
                    cfg,
                    solved=True,
                    solution_size=solution_size,
                    model_size=model_size,
                    ratio=solution_size / model_size,
                    attempts=attempt + 1,
                    plan=plan if keep_plans else None,
                )
            break
        if record is None:  # every retry came back unsolvable or degenerate
            record = SyntheticInstanceRecord(
                GeneratorConfig(na, nf, base_seed), solved=False, attempts=retry_cap + 1
            )
        if record_timing:
            record.wall_ms = int((time.monotonic() - t0) * 1000)
        records.append(record)
    return records


def records_to_csv(records: Sequence[SyntheticInstanceRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.config.seed,
                r.config.num_actions,
                r.config.num_fluents,
                int(r.solved),
                r.solution_size if r.solution_size is not None else "",
                r.model_size if r.model_size is not None else "",
                f"{r.ratio:.6f}" if r.ratio is not None else "",
                r.attempts,
                r.wall_ms,
            ]
        )
    return buf.getvalue()


def ratio_histogram(
    records: Sequence[SyntheticInstanceRecord], bin_width: float = 1.0
) -> list[tuple[float, float, int]]:
    """Histogram over the ratios of solved, non-degenerate records."""
    ratios = [r.ratio for r in records if r.solved and not r.degenerate]
    if not ratios:
        raise ValueError("no solved, non-degenerate records to bin")
    lo_bin = math.floor(min(ratios) / bin_width)
    hi_bin = math.floor(max(ratios) / bin_width)
    bins = []
    for b in range(lo_bin, hi_bin + 1):
        lo, hi = b * bin_width, (b + 1) * bin_width
        count = sum(1 for x in ratios if lo <= x < hi)
        bins.append((lo, hi, count))
    return bins


def histogram_to_csv(bins: Sequence[tuple[float, float, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("bin_lo", "bin_hi", "count"))
    for lo, hi, count in bins:
        writer.writerow((f"{lo:.3f}", f"{hi:.3f}", count))
    return buf.getvalue()


def histogram_to_gnuplot(bins: Sequence[tuple[float, float, int]]) -> str:
    lines = ["# bin_center count"]
    for lo, hi, count in bins:
        lines.append(f"{(lo + hi) / 2:.3f} {count}")
    return "\n".join(lines) + "\n"


def expected_dialogue_length(plan, *, iters: int = 20_000, tol: float = 1e-9) -> float:
    """Expected number of steps from the initial node to a goal node when
    every outcome of a node is equally likely; value iteration on the
    absorbing chain (finite for any plan whose cycles all have exits)."""
    steps = {n.id: 0.0 for n in plan.nodes}
    for _ in range(iters):
        delta = 0.0
        for n in plan.nodes:
            if plan.is_goal(n.id):
                continue
            edges = plan.out_edges(n.id)
            new = 1.0 + sum(steps[e.target] for e in edges) / len(edges)
            delta = max(delta, abs(new - steps[n.id]))
            steps[n.id] = new
        if delta < tol:
            break
    return steps[plan.initial]
