"""Per-session pipeline orchestration.

One worker per session drives build_window -> render_prompt ->
generate_queries -> filter_batch -> search_batch -> select_images on each
tick, logging every step. Any stage failure skips the tick, never the
session.
"""

import threading
import time
from pathlib import Path

from .clock import SessionClock, VirtualClock
from .config import AgentConfig
from .errors import (
    BackendTimeoutError,
    BatchExhaustedError,
    EmptyPoolError,
    EmptyWindowError,
    MalformedResponseError,
)
from .events import EventLog
from .filtering import QueryHistory, filter_batch
from .querygen import generate_queries, render_prompt
from .retrieval import search_batch
from .selection import DisplayHistory, apply_feedback, select_images
from .windowing import SessionBuffer, Utterance, tick_times

KEEP = "keep"
DROP = "drop"


def staleness_guard(result_window_index: int, last_processed_index: int) -> str:
    """Drop results from windows older than the last one processed."""
    return DROP if result_window_index < last_processed_index else KEEP


class SessionRunner:
    """Runs the tick pipeline for one session over a given clock."""

    def __init__(
        self,
        session_id: str,
        config: AgentConfig,
        clock: SessionClock,
        log: EventLog,
        buffer: SessionBuffer | None = None,
    ) -> None:
        self.session_id = session_id
        self.config = config
        self.clock = clock
        self.log = log
        self.buffer = buffer or SessionBuffer(session_id)
        self.template = config.build_template()
        self.policy = config.build_policy()
        self.mllm = config.build_mllm_backend()
        self.search_backend = config.build_search_backend()
        self.query_history = QueryHistory(session_id)
        self.display = DisplayHistory(session_id)
        self.last_processed_index = 0
        # Serializes pipeline mutations with feedback arriving from the UI.
        self.lock = threading.RLock()

    def start(self) -> None:
        self.log.append(
            self.clock.now_ms(),
            "session_started",
            {
                "session_id": self.session_id,
                "tick_interval_ms": self.config.tick_interval_ms,
                "output_count": self.config.output_count,
                "cards_per_tick": self.config.cards_per_tick,
            },
        )

    def ingest(self, utterance: Utterance, at_ms: int | None = None) -> None:
        self.buffer.ingest(utterance)
        self.log.append(
            self.clock.now_ms() if at_ms is None else at_ms,
            "utterance",
            {
                "speaker": utterance.speaker,
                "start_ms": utterance.start_ms,
                "end_ms": utterance.end_ms,
                "text": utterance.text,
            },
        )

    def _skip(self, window_index: int, reason: str, detail: str = "") -> None:
        self.log.append(
            self.clock.now_ms(),
            "tick_skipped",
            {"window_index": window_index, "reason": reason, "detail": detail},
        )

    def run_tick(self, window_index: int, t_end_ms: int) -> list:
        """Execute one full pipeline pass. Returns the cards emitted."""
        with self.lock:
            self.log.append(
                self.clock.now_ms(),
                "tick",
                {"window_index": window_index, "t_end_ms": t_end_ms},
            )

            window_end = t_end_ms
            if self.config.max_window_ms is not None:
                window_end = min(t_end_ms, self.config.max_window_ms)
            try:
                window = self.buffer.build_window(window_end, window_index)
            except EmptyWindowError:
                self._skip(window_index, "empty_window")
                return []

            payload = render_prompt(self.template, window)
            try:
                batch = generate_queries(
                    self.mllm, payload, window, self.clock, self.config.output_count
                )
            except (BackendTimeoutError, MalformedResponseError) as exc:
                self._skip(window_index, "mllm_error", str(exc))
                return []
            self.log.append(
                self.clock.now_ms(),
                "batch_generated",
                {
                    "window_index": window_index,
                    "queries": [{"text": q.text, "rank": q.rank} for q in batch.queries],
                    "latency_ms": batch.latency_ms,
                },
            )

            dropped: list = []
            try:
                survivors = filter_batch(batch, self.query_history, self.policy, dropped)
            except BatchExhaustedError:
                self.log.append(
                    self.clock.now_ms(),
                    "batch_filtered",
                    {
                        "window_index": window_index,
                        "kept": [],
                        "dropped": [
                            {"text": q.text, "rank": q.rank, "reason": r}
                            for q, r in dropped
                        ],
                    },
                )
                self._skip(window_index, "batch_exhausted")
                return []
            self.log.append(
                self.clock.now_ms(),
                "batch_filtered",
                {
                    "window_index": window_index,
                    "kept": [{"text": q.text, "rank": q.rank} for q in survivors],
                    "dropped": [
                        {"text": q.text, "rank": q.rank, "reason": r} for q, r in dropped
                    ],
                },
            )

            search_started = self.clock.now_ms()
            try:
                pool = search_batch(self.search_backend, survivors)
            except EmptyPoolError:
                self._skip(window_index, "empty_pool")
                return []
            # Per-query searches run concurrently, so one backend latency
            # covers the whole stage.
            self.clock.advance(getattr(self.search_backend, "latency_ms", 0))
            self.log.append(
                self.clock.now_ms(),
                "pool_ready",
                {
                    "window_index": window_index,
                    "latency_ms": self.clock.now_ms() - search_started,
                    "pool": [
                        {
                            "image_id": c.image_id,
                            "query_rank": c.query_rank,
                            "search_rank": c.search_rank,
                        }
                        for c in sorted(
                            pool.values(),
                            key=lambda c: (c.query_rank, c.search_rank, c.image_id),
                        )
                    ],
                },
            )

            if staleness_guard(window_index, self.last_processed_index) == DROP:
                self._skip(window_index, "stale_result")
                return []
            cards = select_images(
                pool,
                self.display,
                self.config.cards_per_tick,
                window_index,
                self.clock.now_ms(),
            )
            self.last_processed_index = window_index
            self.log.append(
                self.clock.now_ms(),
                "cards_emitted",
                {
                    "window_index": window_index,
                    "cards": [
                        {
                            "card_id": c.card_id,
                            "image_id": c.candidate.image_id,
                            "title": c.candidate.title,
                            "thumbnail_ref": c.candidate.thumbnail_ref,
                            "provenance": c.candidate.provenance,
                            "source_query": c.candidate.source_query.text,
                            "query_rank": c.candidate.query_rank,
                            "search_rank": c.candidate.search_rank,
                            "window_index": c.window_index,
                            "emitted_at_ms": c.emitted_at_ms,
                        }
                        for c in cards
                    ],
                },
            )
            return cards

    def feedback(self, card_id: str, action: str):
        with self.lock:
            card = apply_feedback(self.display, card_id, action)
            self.log.append(
                self.clock.now_ms(),
                "pin" if card.state == "pinned" else "dismiss",
                {"card_id": card_id, "image_id": card.candidate.image_id},
            )
            return card

    def close(self, at_ms: int | None = None) -> None:
        self.log.append(
            self.clock.now_ms() if at_ms is None else at_ms,
            "session_closed",
            {"session_id": self.session_id},
        )
        self.log.close()


def run_replay(
    config: AgentConfig,
    transcript: list[Utterance],
    duration_ms: int | None = None,
    session_id: str = "replay",
    log_path: str | Path | None = None,
    speed: float | None = None,
) -> EventLog:
    """Replay a transcript in virtual time and return the full event log.

    The whole transcript is buffered up front; windows clip by time, so
    causality is preserved. Session duration defaults to the last
    utterance's end, giving floor(duration / interval) ticks.
    """
    if duration_ms is None:
        if not transcript:
            raise ValueError("empty transcript and no duration given")
        duration_ms = max(u.end_ms for u in transcript)
    clock = VirtualClock()
    log = EventLog(session_id, Path(log_path) if log_path else None)
    runner = SessionRunner(session_id, config, clock, log)
    runner.start()
    # Merge utterance arrivals and tick boundaries into one virtual timeline.
    # An utterance starting exactly on a tick boundary logs first but is
    # excluded from that window (start_ms < t_end_ms).
    timeline: list[tuple[int, int, object]] = [
        (u.start_ms, 0, u) for u in sorted(transcript, key=lambda u: u.start_ms)
    ]
    timeline += [
        (t_end_ms, 1, (k, t_end_ms))
        for k, t_end_ms in tick_times(duration_ms, config.tick_interval_ms)
    ]
    timeline.sort(key=lambda item: (item[0], item[1]))
    for at_ms, tag, item in timeline:
        if speed is not None and speed > 0:
            # Pace the run in wall time; logged timestamps stay virtual.
            time.sleep(max(0, at_ms - clock.now_ms()) / 1000 / speed)
        clock.set_at_least(at_ms)
        if tag == 0:
            runner.ingest(item, at_ms=at_ms)
        else:
            window_index, t_end_ms = item
            runner.run_tick(window_index, t_end_ms)
    clock.set_at_least(duration_ms)
    runner.close()
    return log
