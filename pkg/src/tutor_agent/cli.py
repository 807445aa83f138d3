"""Command-line entry points: run the live service, replay, evaluate."""

import json

import click

from .config import AgentConfig
from .evalharness import load_scenarios, run_scenarios
from .runner import run_replay
from .windowing import load_transcript


@click.group()
def main() -> None:
    """On-demand instructional image agent."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def run(config_path: str, host: str, port: int) -> None:
    """Start the live HTTP service."""
    import uvicorn

    from .server import create_app

    config = AgentConfig.from_file(config_path)
    uvicorn.run(create_app(config), host=host, port=port)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--transcript", "transcript_path", required=True, type=click.Path(exists=True))
@click.option("--duration-ms", type=int, default=None,
              help="Session length; defaults to the last utterance's end.")
@click.option("--speed", type=float, default=None,
              help="Pace the replay in real time at this multiple; timestamps stay virtual.")
@click.option("--virtual-time", is_flag=True, default=True,
              help="Run as fast as possible (default).")
@click.option("--out", "log_path", type=click.Path(), default=None,
              help="Write the session event log here (JSON Lines).")
def replay(config_path: str, transcript_path: str, duration_ms: int | None,
           speed: float | None, virtual_time: bool, log_path: str | None) -> None:
    """Replay a transcript file through the pipeline."""
    config = AgentConfig.from_file(config_path)
    transcript = load_transcript(transcript_path)
    log = run_replay(config, transcript, duration_ms=duration_ms,
                     log_path=log_path, speed=speed)
    counts: dict[str, int] = {}
    for event in log.events:
        counts[event.kind] = counts.get(event.kind, 0) + 1
    for kind, n in sorted(counts.items()):
        click.echo(f"{kind}: {n}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--scenarios", "scenarios_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--csv", "csv_path", type=click.Path(), default=None)
def eval(config_path: str, scenarios_dir: str, out_path: str, csv_path: str | None) -> None:
    """Run every scenario and write a JSON report."""
    config = AgentConfig.from_file(config_path)
    scenarios = load_scenarios(scenarios_dir)
    report = run_scenarios(scenarios, config, out_path=out_path, csv_path=csv_path)
    click.echo(json.dumps(report["summary"], indent=2))


if __name__ == "__main__":
    main()
