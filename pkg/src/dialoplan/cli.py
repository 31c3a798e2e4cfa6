"""Command-line surface: plan, validate, compile domains, benchmark, run
scripted dialogues, serve the HTTP API."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import fixtures as fixture_registry
from .domainkit import DomainBuildError, load_spec_text, spec_problems
from .orchestrator import run_script
from .pddl import (
    GroundingError,
    ParseError,
    ground,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
)
from .plan import (
    PlanDocumentError,
    compile_plan,
    load_json_text,
    solution_from_plan,
    to_dot,
    to_json_text,
)
from .planner import PlanningBudgetExceeded, Unsolvable, solve, validate
from .synth import (
    histogram_to_csv,
    histogram_to_gnuplot,
    ratio_histogram,
    records_to_csv,
    run_experiment,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_UNSOLVABLE = 2
EXIT_MISMATCH = 3


@click.group()
def main():
    """Synthesize and run goal-oriented dialogue agents."""


def _load_ground_problem(domain_file: str, problem_file: str):
    try:
        dom = parse_domain(Path(domain_file).read_text())
        prob = parse_problem(Path(problem_file).read_text(), dom)
        return ground(dom, prob)
    except (ParseError, GroundingError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc


@main.command("plan")
@click.argument("domain_file", type=click.Path(exists=True))
@click.argument("problem_file", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path(), required=True, help="plan JSON output")
@click.option("--dot", type=click.Path(), default=None, help="also write a DOT rendering")
@click.option("--max-expansions", type=int, default=1_000_000, show_default=True)
@click.option("--max-seconds", type=float, default=60.0, show_default=True)
def plan_cmd(domain_file, problem_file, out, dot, max_expansions, max_seconds):
    """Solve DOMAIN_FILE + PROBLEM_FILE into a dialogue plan."""
    problem = _load_ground_problem(domain_file, problem_file)
    try:
        sol = solve(problem, max_expansions=max_expansions, max_seconds=max_seconds)
    except Unsolvable:
        click.echo("unsolvable", err=True)
        sys.exit(EXIT_UNSOLVABLE)
    except PlanningBudgetExceeded as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        sys.exit(EXIT_UNSOLVABLE)
    plan = compile_plan(sol)
    Path(out).write_text(to_json_text(plan))
    if dot:
        Path(dot).write_text(to_dot(plan))
    click.echo(f"plan with {len(plan.nodes)} nodes written to {out}")


@main.command("validate")
@click.argument("domain_file", type=click.Path(exists=True))
@click.argument("problem_file", type=click.Path(exists=True))
@click.argument("plan_file", type=click.Path(exists=True))
def validate_cmd(domain_file, problem_file, plan_file):
    """Check PLAN_FILE against the problem; exit 0 when valid."""
    problem = _load_ground_problem(domain_file, problem_file)
    try:
        plan = load_json_text(Path(plan_file).read_text())
        sol = solution_from_plan(problem, plan)
    except (PlanDocumentError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    report = validate(problem, sol)
    if report.valid:
        click.echo("valid")
        sys.exit(EXIT_OK)
    for v in report.violations:
        click.echo(f"violation [{v.property}] {v.detail}", err=True)
    sys.exit(EXIT_INPUT_ERROR)


@main.command("compile-domain")
@click.argument("spec_file", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path(), required=True, help="domain PDDL output")
@click.option(
    "--problems-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="also write each declared problem as PDDL into this directory",
)
def compile_domain_cmd(spec_file, out, problems_dir):
    """Compile a declarative TOML/JSON agent spec into PDDL."""
    text = Path(spec_file).read_text()
    fmt = "json" if spec_file.endswith(".json") else "toml"
    try:
        builder = load_spec_text(text, format=fmt)
        domain, report = builder.build()
    except DomainBuildError as exc:
        raise click.ClickException(str(exc)) from exc
    Path(out).write_text(print_domain(domain))
    click.echo(f"domain with {len(domain.actions)} actions written to {out}")
    for entry in report.entries:
        click.echo(f"check {entry.check} [{entry.subject}]: ok")
    if problems_dir:
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib

        data = tomllib.loads(text) if fmt == "toml" else json.loads(text)
        outdir = Path(problems_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for prob in spec_problems(data, builder):
            path = outdir / f"{prob.name}.pddl"
            path.write_text(print_problem(prob))
            click.echo(f"problem written to {path}")


@main.command("synth")
@click.option("--n", "n_instances", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="results CSV")
@click.option("--hist", type=click.Path(), default=None, help="histogram CSV")
@click.option("--gnuplot", type=click.Path(), default=None, help="histogram gnuplot data")
@click.option("--bin-width", type=float, default=1.0, show_default=True)
@click.option("--max-expansions", type=int, default=200_000, show_default=True)
@click.option("--max-seconds", type=float, default=30.0, show_default=True)
@click.option(
    "--no-timing",
    is_flag=True,
    help="write wall_ms as 0 so repeated runs are byte-identical",
)
def synth_cmd(n_instances, seed, out, hist, gnuplot, bin_width, max_expansions, max_seconds, no_timing):
    """Generate, solve and measure random instances."""
    records = run_experiment(
        n_instances,
        master_seed=seed,
        max_expansions=max_expansions,
        max_seconds=max_seconds,
        record_timing=not no_timing,
    )
    Path(out).write_text(records_to_csv(records))
    solved = sum(1 for r in records if r.solved and not r.degenerate)
    click.echo(f"{n_instances} instances, {solved} with ratios, written to {out}")
    if hist or gnuplot:
        bins = ratio_histogram(records, bin_width)
        if hist:
            Path(hist).write_text(histogram_to_csv(bins))
        if gnuplot:
            Path(gnuplot).write_text(histogram_to_gnuplot(bins))


@main.command("run-script")
@click.argument("script_file", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path(), default=None, help="transcript JSON output")
def run_script_cmd(script_file, out):
    """Replay a scripted conversation; exit 3 when the terminal status
    differs from the script's expectation."""
    try:
        spec = json.loads(Path(script_file).read_text())
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"script is not valid JSON: {exc}") from exc
    try:
        fixture = fixture_registry.make_fixture(spec["fixture"])
    except KeyError as exc:
        raise click.ClickException(str(exc)) from exc
    transcript = run_script(
        fixture,
        spec.get("turns", []),
        context0=spec.get("context0"),
        max_loop_visits=spec.get("max_loop_visits"),
    )
    if out:
        Path(out).write_text(transcript.to_json_text())
    click.echo(f"final status: {transcript.final_status}")
    expected = spec.get("expect_status")
    if expected is not None and transcript.final_status != expected:
        click.echo(f"expected status {expected!r}", err=True)
        sys.exit(EXIT_MISMATCH)


@main.command("export-fixture")
@click.argument("name")
@click.option("--dir", "out_dir", type=click.Path(file_okay=False), required=True)
def export_fixture_cmd(name, out_dir):
    """Write a bundled fixture's domain and problem as PDDL files."""
    try:
        fixture = fixture_registry.make_fixture(name)
    except KeyError as exc:
        raise click.ClickException(str(exc)) from exc
    outdir = Path(out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    dom_path = outdir / f"{name}.domain.pddl"
    prob_path = outdir / f"{name}.problem.pddl"
    dom_path.write_text(print_domain(fixture.domain))
    prob_path.write_text(print_problem(fixture.problem))
    click.echo(f"wrote {dom_path} and {prob_path}")


@main.command("serve")
@click.option("--port", type=int, default=None, help="defaults to $DIALOPLAN_PORT or 8080")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve_cmd(port, host):
    """Run the HTTP gateway."""
    import uvicorn

    from .server import create_app

    if port is None:
        port = int(os.environ.get("DIALOPLAN_PORT", "8080"))
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
