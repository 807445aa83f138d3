"""Scenario replay and timing statistics.

A scenario scripts one tutoring exchange plus the set of corpus images an
instructor would accept. A trial replays it in virtual time and reports
the Image Output Time: seconds from the start of the student's question
(t=0) to the first accepted card, or N/A when none appears.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .config import AgentConfig
from .runner import run_replay
from .windowing import Utterance


@dataclass(frozen=True)
class Scenario:
    topic: str
    transcript: tuple[Utterance, ...]
    acceptance_ids: frozenset[str]
    baseline_time_s: float | None = None
    duration_ms: int | None = None

    def __post_init__(self) -> None:
        if not self.transcript:
            raise ValueError("scenario needs a transcript")
        first = min(self.transcript, key=lambda u: u.start_ms)
        if first.start_ms != 0 or first.speaker != "student":
            raise ValueError("transcript must open with a student utterance at 0 ms")

    @classmethod
    def from_file(cls, path: str | Path) -> "Scenario":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        transcript = tuple(
            Utterance(
                speaker=u["speaker"],
                start_ms=u["start_ms"],
                end_ms=u["end_ms"],
                text=u.get("text"),
                audio_ref=u.get("audio_ref"),
            )
            for u in data["transcript"]
        )
        return cls(
            topic=data["topic"],
            transcript=transcript,
            acceptance_ids=frozenset(data["acceptance_ids"]),
            baseline_time_s=data.get("baseline_time_s"),
            duration_ms=data.get("duration_ms"),
        )


@dataclass(frozen=True)
class TrialResult:
    topic: str
    output_time_s: float | None  # None = N/A
    baseline_time_s: float | None
    success: bool

    def __post_init__(self) -> None:
        if self.success != (self.output_time_s is not None):
            raise ValueError("success must mirror output_time_s presence")


@dataclass(frozen=True)
class SummaryStats:
    mean_s: float | None
    sd_s: float | None  # sample SD (n-1); None when n_included < 2
    n_included: int
    n_na: int
    success_rate: float  # percent, rounded to 0.1


def run_trial(scenario: Scenario, config: AgentConfig, log_path: str | Path | None = None) -> TrialResult:
    """Replay the scenario and time the first accepted card."""
    log = run_replay(
        config,
        list(scenario.transcript),
        duration_ms=scenario.duration_ms,
        session_id=f"trial-{scenario.topic}",
        log_path=log_path,
    )
    output_time_s = None
    for event in log.events:
        if event.kind != "cards_emitted":
            continue
        for card in event.payload["cards"]:
            if card["image_id"] in scenario.acceptance_ids:
                output_time_s = card["emitted_at_ms"] / 1000
                break
        if output_time_s is not None:
            break
    return TrialResult(
        topic=scenario.topic,
        output_time_s=output_time_s,
        baseline_time_s=scenario.baseline_time_s,
        success=output_time_s is not None,
    )


def summarize(trials: list[TrialResult] | list[float | None]) -> SummaryStats:
    """Mean and sample SD over non-N/A times; success rate over all trials."""
    if not trials:
        raise ValueError("need at least one trial")
    times: list[float | None] = [
        t.output_time_s if isinstance(t, TrialResult) else t for t in trials
    ]
    included = [t for t in times if t is not None]
    n_inc, n_na = len(included), len(times) - len(included)
    mean = sum(included) / n_inc if included else None
    sd = None
    if n_inc >= 2:
        assert mean is not None
        sd = math.sqrt(sum((t - mean) ** 2 for t in included) / (n_inc - 1))
    success_rate = round(100.0 * n_inc / len(times), 1)
    return SummaryStats(mean_s=mean, sd_s=sd, n_included=n_inc, n_na=n_na,
                        success_rate=success_rate)


def compare(summary_without, summary_with) -> float:
    """Mean-time reduction; negative when support was slower.

    Accepts SummaryStats or lists of TrialResult; trial lists must cover
    the same topics.
    """
    if isinstance(summary_without, list) and isinstance(summary_with, list):
        topics_without = sorted(t.topic for t in summary_without)
        topics_with = sorted(t.topic for t in summary_with)
        if topics_without != topics_with:
            raise ValueError("mismatched topic sets")
        summary_without = summarize(summary_without)
        summary_with = summarize(summary_with)
    if summary_without.mean_s is None or summary_with.mean_s is None:
        raise ValueError("both summaries need a defined mean")
    # Means are reported at 0.1 s resolution; the reduction is the
    # difference of the reported values.
    return round(summary_without.mean_s, 1) - round(summary_with.mean_s, 1)


def load_scenarios(directory: str | Path) -> list[Scenario]:
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        raise ValueError(f"no scenario files in {directory}")
    return [Scenario.from_file(p) for p in paths]


def run_scenarios(
    scenarios: list[Scenario],
    config: AgentConfig,
    out_path: str | Path | None = None,
    csv_path: str | Path | None = None,
) -> dict:
    """Run all trials and emit a JSON report (optionally a CSV table)."""
    trials = [run_trial(s, config) for s in scenarios]
    summary = summarize(trials)
    baselines = [t.baseline_time_s for t in trials if t.baseline_time_s is not None]
    report = {
        "trials": [
            {
                "topic": t.topic,
                "output_time_s": t.output_time_s,
                "baseline_time_s": t.baseline_time_s,
                "success": t.success,
            }
            for t in trials
        ],
        "summary": {
            "mean_s": summary.mean_s,
            "sd_s": summary.sd_s,
            "n_included": summary.n_included,
            "n_na": summary.n_na,
            "success_rate": summary.success_rate,
        },
    }
    if len(baselines) == len(trials) and baselines:
        baseline_summary = summarize(baselines)
        report["baseline_summary"] = {
            "mean_s": baseline_summary.mean_s,
            "sd_s": baseline_summary.sd_s,
        }
        report["summary"]["reduction_s"] = compare(baseline_summary, summary)
    if out_path is not None:
        Path(out_path).write_text(
            json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    if csv_path is not None:
        with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["topic", "without_support_s", "with_support_s"])
            for t in trials:
                writer.writerow(
                    [t.topic, t.baseline_time_s,
                     "N/A" if t.output_time_s is None else t.output_time_s]
                )
    return report
