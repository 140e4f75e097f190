"""Command-line entry points: replay, sweep, serve, examples.

Exit codes: 0 on success, 2 for validation problems (bad flags or file
content), 3 for I/O failures.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import click

from .context_builder import ContextVocabulary
from .feature_inference import load_vocabulary, profile_from_json
from .recommenders import default_specs, default_weights_from_survey, load_catalog, load_weights
from .sensor_model import ScenarioError, parse_fault_plan, parse_scenario
from .simulator import dropout_sweep, emit_report, render_report, render_trace, replay

EXIT_VALIDATION = 2
EXIT_IO = 3


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error reading {path}: {exc}", err=True)
        sys.exit(EXIT_IO)


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        click.echo(f"error writing {path}: {exc}", err=True)
        sys.exit(EXIT_IO)


def _load_inputs(scenario, catalog, profile, weights, vocab):
    try:
        scn = parse_scenario(_read(scenario))
        cat = load_catalog(_read(catalog))
        prof = profile_from_json(json.loads(_read(profile)))
        specs = default_specs()
        w = load_weights(_read(weights)) if weights else default_weights_from_survey(specs)
        if vocab:
            voc = ContextVocabulary(values=load_vocabulary(_read(vocab)))
        else:
            voc = ContextVocabulary.default()
    except (ScenarioError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    return scn, cat, prof, w, specs, voc


@click.group()
def main():
    """Ephemeral-context music recommendation toolkit."""


@main.command(name="replay")
@click.option("--scenario", required=True, help="Scenario file (JSONL).")
@click.option("--catalog", required=True, help="Track catalog (JSON).")
@click.option("--profile", required=True, help="User profile (JSON).")
@click.option("--weights", default=None, help="Hybrid weights (JSON); survey defaults otherwise.")
@click.option("--faults", default=None, help="Fault plan (JSON).")
@click.option("--vocab", default=None, help="Vocabulary override (JSON).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--top-n", default=10, show_default=True, type=int)
@click.option("--out", default=None, help="Write the session trace here.")
@click.option("--report", "report_path", default=None, help="Write the metrics report here.")
def replay_cmd(scenario, catalog, profile, weights, faults, vocab, seed, top_n, out, report_path):
    """Replay one scenario and emit its trace and metrics."""
    scn, cat, prof, w, specs, voc = _load_inputs(scenario, catalog, profile, weights, vocab)
    plan = None
    if faults:
        try:
            plan = parse_fault_plan(_read(faults))
        except ScenarioError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
    try:
        trace, report = replay(scn, cat, prof, w, specs, voc,
                               plan=plan, seed=seed, top_n=top_n)
    except (ScenarioError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if out:
        _write(out, render_trace(trace))
    if report_path:
        _write(report_path, render_report(report))
    if not report_path:
        click.echo(render_report(report), nl=False)


@main.command(name="sweep")
@click.option("--scenario", required=True)
@click.option("--catalog", required=True)
@click.option("--profile", required=True)
@click.option("--weights", default=None)
@click.option("--vocab", default=None)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--top-n", default=10, show_default=True, type=int)
@click.option("--out-dir", required=True, help="Directory for sweep.json.")
def sweep_cmd(scenario, catalog, profile, weights, vocab, seed, top_n, out_dir):
    """Replay once per single-source dropout and report each run's metrics."""
    scn, cat, prof, w, specs, voc = _load_inputs(scenario, catalog, profile, weights, vocab)
    try:
        sweep = dropout_sweep(scn, cat, prof, w, specs, voc, seed=seed, top_n=top_n)
    except (ScenarioError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        emit_report(sweep, Path(out_dir) / "sweep.json")
    except OSError as exc:
        click.echo(f"error writing sweep: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {Path(out_dir) / 'sweep.json'} ({len(sweep)} entries)")


@main.command(name="serve")
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve_cmd(port, host):
    """Run the HTTP service (catalog and data dir come from the environment)."""
    import uvicorn

    from .service_api import create_app

    try:
        app = create_app()
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command(name="examples")
@click.argument("target", type=click.Path())
def examples_cmd(target):
    """Copy the bundled scenario, catalog, and profile fixtures to TARGET."""
    out = Path(target)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name in ("anna_scenario.jsonl", "catalog.json", "anna_profile.json"):
            text = resources.files("ephemera.data").joinpath(name).read_text("utf-8")
            (out / name).write_text(text, encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote fixtures to {out}")


if __name__ == "__main__":
    main()
