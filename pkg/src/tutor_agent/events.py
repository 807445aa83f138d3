"""Append-only session event log: JSON Lines on disk, fan-out in memory.

Every pipeline action becomes one SessionEvent. The log is the ground
truth for the UI timeline, replay, and evaluation.
"""

import json
import threading
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import IO, Iterator

EVENT_KINDS = (
    "session_started",
    "utterance",
    "tick",
    "batch_generated",
    "batch_filtered",
    "pool_ready",
    "cards_emitted",
    "tick_skipped",
    "error",
    "pin",
    "dismiss",
    "session_closed",
)


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    at_ms: int
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SessionEvent":
        rec = json.loads(line)
        return cls(seq=rec["seq"], at_ms=rec["at_ms"], kind=rec["kind"],
                   payload=rec["payload"])


class EventLog:
    """Per-session append-only log with live subscribers.

    seq is strictly increasing and at_ms non-decreasing; both are enforced
    at append time. Subscribers read any suffix in order with no gaps.
    """

    def __init__(self, session_id: str, path: Path | None = None) -> None:
        self.session_id = session_id
        self.path = path
        self._events: list[SessionEvent] = []
        self._cond = threading.Condition()
        self._closed = False
        self._fh: IO[str] | None = None
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = path.open("a", encoding="utf-8")

    def append(self, at_ms: int, kind: str, payload: dict) -> SessionEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._cond:
            if self._closed:
                raise RuntimeError("log closed")
            if self._events and at_ms < self._events[-1].at_ms:
                at_ms = self._events[-1].at_ms
            event = SessionEvent(seq=len(self._events) + 1, at_ms=at_ms,
                                 kind=kind, payload=payload)
            self._events.append(event)
            if self._fh is not None:
                self._fh.write(event.to_json() + "\n")
                self._fh.flush()
            self._cond.notify_all()
        return event

    @property
    def events(self) -> list[SessionEvent]:
        with self._cond:
            return list(self._events)

    def close(self) -> None:
        with self._cond:
            self._closed = True
            if self._fh is not None:
                self._fh.close()
                self._fh = None
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    def follow(
        self,
        from_seq: int = 0,
        poll_timeout_s: float = 0.5,
        heartbeat: bool = False,
    ) -> Iterator[SessionEvent | None]:
        """Yield events with seq > from_seq, then tail until the log closes.

        With heartbeat=True, yields None whenever a poll interval passes
        without new events, so streaming consumers can detect disconnects.
        """
        if from_seq < 0:
            raise ValueError("from_seq must be >= 0")
        next_idx = from_seq
        while True:
            with self._cond:
                while next_idx >= len(self._events):
                    if self._closed:
                        return
                    self._cond.wait(timeout=poll_timeout_s)
                    if heartbeat and next_idx >= len(self._events):
                        break
                batch = self._events[next_idx:]
                next_idx = len(self._events)
            if batch:
                yield from batch
            elif heartbeat:
                yield None


def load_event_log(path: str | Path) -> list[SessionEvent]:
    events = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            events.append(SessionEvent.from_json(line))
    return events
