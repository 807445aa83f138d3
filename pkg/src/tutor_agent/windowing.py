"""Dialogue buffering and cumulative window construction.

A session accumulates timestamped utterances; every tick the pipeline asks
for the window [0, k * tick_interval] — the left edge never moves, so each
window is a superset of the previous one.
"""

import bisect
import json
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import EmptyWindowError, InvalidUtteranceError, UnknownSessionError

SPEAKERS = ("instructor", "student")


@dataclass(frozen=True)
class Utterance:
    speaker: str
    start_ms: int
    end_ms: int
    text: str | None = None
    audio_ref: str | None = None

    def __post_init__(self) -> None:
        if self.speaker not in SPEAKERS:
            raise InvalidUtteranceError(f"unknown speaker {self.speaker!r}")
        if self.start_ms < 0:
            raise InvalidUtteranceError("start_ms must be non-negative")
        if self.end_ms <= self.start_ms:
            raise InvalidUtteranceError("end_ms must exceed start_ms")
        if self.text is None and self.audio_ref is None:
            raise InvalidUtteranceError("utterance needs text or an audio reference")


@dataclass(frozen=True)
class DialogueWindow:
    session_id: str
    window_index: int
    t_end_ms: int
    utterances: tuple[Utterance, ...]

    # Cumulative windows always start at 0.
    t_start_ms: int = 0

    def transcript(self) -> str:
        """Speaker-tagged transcript, one line per utterance in time order."""
        lines = []
        for u in self.utterances:
            if u.text is not None:
                lines.append(f"{u.speaker}: {u.text}")
        return "\n".join(lines)


class SessionBuffer:
    """Per-session utterance store: one writer, snapshot reads."""

    def __init__(self, session_id: str) -> None:
        self.session_id = session_id
        self._utterances: list[Utterance] = []
        self._starts: list[int] = []
        self._lock = threading.Lock()

    def ingest(self, utterance: Utterance) -> int:
        """Insert keeping start_ms order (stable for ties). Returns buffer size."""
        with self._lock:
            idx = bisect.bisect_right(self._starts, utterance.start_ms)
            self._starts.insert(idx, utterance.start_ms)
            self._utterances.insert(idx, utterance)
            return len(self._utterances)

    def snapshot(self) -> list[Utterance]:
        with self._lock:
            return list(self._utterances)

    def build_window(self, t_end_ms: int, window_index: int) -> DialogueWindow:
        """All utterances starting before t_end_ms, clipped at the boundary.

        Transcript text is kept whole for a boundary-spanning utterance; only
        the timestamp is clipped. Raises EmptyWindowError when nothing falls
        inside, so the caller can skip the tick.
        """
        if t_end_ms <= 0:
            raise ValueError("t_end_ms must be positive")
        included = []
        for u in self.snapshot():
            if u.start_ms >= t_end_ms:
                continue
            if u.end_ms > t_end_ms:
                u = replace(u, end_ms=t_end_ms)
            included.append(u)
        if not included:
            raise EmptyWindowError(f"no utterances before {t_end_ms} ms")
        return DialogueWindow(
            session_id=self.session_id,
            window_index=window_index,
            t_end_ms=t_end_ms,
            utterances=tuple(included),
        )


class SessionRegistry:
    """Maps session ids to buffers; ingest entry point for the service."""

    def __init__(self) -> None:
        self._buffers: dict[str, SessionBuffer] = {}
        self._lock = threading.Lock()

    def create(self, session_id: str) -> SessionBuffer:
        with self._lock:
            buf = SessionBuffer(session_id)
            self._buffers[session_id] = buf
            return buf

    def get(self, session_id: str) -> SessionBuffer:
        with self._lock:
            try:
                return self._buffers[session_id]
            except KeyError:
                raise UnknownSessionError(session_id) from None

    def ingest_utterance(self, session_id: str, utterance: Utterance) -> int:
        return self.get(session_id).ingest(utterance)

    def close(self, session_id: str) -> None:
        with self._lock:
            self._buffers.pop(session_id, None)


def tick_times(duration_ms: int, tick_interval_ms: int) -> list[tuple[int, int]]:
    """(window_index, t_end_ms) pairs for a session of the given duration.

    Tick k fires at k * interval; a session of duration D yields
    floor(D / interval) ticks.
    """
    if tick_interval_ms <= 0:
        raise ValueError("tick_interval_ms must be positive")
    count = duration_ms // tick_interval_ms
    return [(k, k * tick_interval_ms) for k in range(1, count + 1)]


def load_transcript(path: str | Path) -> list[Utterance]:
    """Read a replay transcript: JSON Lines, one utterance per line."""
    utterances = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        utterances.append(
            Utterance(
                speaker=rec["speaker"],
                start_ms=rec["start_ms"],
                end_ms=rec["end_ms"],
                text=rec.get("text"),
                audio_ref=rec.get("audio_ref"),
            )
        )
    return utterances
