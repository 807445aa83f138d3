"""HTTP control surface and server-push event stream.

Endpoints:
  POST   /sessions                               create, returns {"session_id"}
  POST   /sessions/{id}/utterances               ingest one utterance
  POST   /sessions/{id}/cards/{card_id}/pin      pin a card
  POST   /sessions/{id}/cards/{card_id}/dismiss  dismiss a card
  DELETE /sessions/{id}                          close the session
  GET    /sessions/{id}/events?from_seq=N        SSE stream, one JSON
                                                 SessionEvent per message
"""

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .clock import WallClock
from .config import AgentConfig
from .errors import (
    IllegalTransitionError,
    InvalidUtteranceError,
    UnknownCardError,
)
from .events import EventLog
from .runner import SessionRunner
from .windowing import Utterance


class UtteranceIn(BaseModel):
    speaker: str
    start_ms: int
    end_ms: int
    text: str | None = None
    audio_ref: str | None = None


class LiveSession:
    """One live session: wall clock, tick-loop thread, event log."""

    def __init__(self, session_id: str, config: AgentConfig) -> None:
        self.session_id = session_id
        self.config = config
        self.clock = WallClock()
        log_path = None
        if config.log_dir:
            log_path = Path(config.log_dir) / f"{session_id}.jsonl"
        self.log = EventLog(session_id, log_path)
        self.runner = SessionRunner(session_id, config, self.clock, self.log)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._tick_loop, daemon=True)

    def start(self) -> None:
        self.runner.start()
        self._thread.start()

    def _tick_loop(self) -> None:
        interval = self.config.tick_interval_ms
        k = 1
        while not self._stop.is_set():
            target = k * interval
            delta_ms = target - self.clock.now_ms()
            if delta_ms > 0 and self._stop.wait(delta_ms / 1000):
                break
            if self._stop.is_set():
                break
            if self.clock.now_ms() - target >= interval:
                # The previous tick's generation was still in flight when
                # this one fired; the next cumulative window subsumes it.
                self.runner._skip(k, "in_flight")
            else:
                self.runner.run_tick(k, target)
            k += 1

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=10)
        self.runner.close()


def create_app(config: AgentConfig) -> FastAPI:
    app = FastAPI(title="tutor-agent")
    sessions: dict[str, LiveSession] = {}
    app.state.sessions = sessions

    def _get(session_id: str) -> LiveSession:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.post("/sessions")
    def create_session() -> dict:
        session_id = uuid.uuid4().hex[:12]
        session = LiveSession(session_id, config)
        sessions[session_id] = session
        session.start()
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/utterances")
    def post_utterance(session_id: str, body: UtteranceIn) -> dict:
        session = _get(session_id)
        try:
            utterance = Utterance(
                speaker=body.speaker,
                start_ms=body.start_ms,
                end_ms=body.end_ms,
                text=body.text,
                audio_ref=body.audio_ref,
            )
        except InvalidUtteranceError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        session.runner.ingest(utterance)
        return {"ok": True}

    @app.post("/sessions/{session_id}/cards/{card_id}/{action}")
    def card_feedback(session_id: str, card_id: str, action: str) -> dict:
        if action not in ("pin", "dismiss"):
            raise HTTPException(status_code=404, detail="unknown action")
        session = _get(session_id)
        try:
            card = session.runner.feedback(card_id, action)
        except UnknownCardError:
            session.log.append(
                session.clock.now_ms(),
                "error",
                {"error": "unknown_card", "card_id": card_id, "action": action},
            )
            raise HTTPException(status_code=404, detail="unknown card")
        except IllegalTransitionError as exc:
            session.log.append(
                session.clock.now_ms(),
                "error",
                {"error": "illegal_transition", "card_id": card_id, "action": action},
            )
            raise HTTPException(status_code=409, detail=str(exc))
        return {"card_id": card_id, "state": card.state}

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str) -> dict:
        session = _get(session_id)
        session.close()
        del sessions[session_id]
        return {"closed": True}

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, request: Request, from_seq: int = 0):
        session = _get(session_id)
        if from_seq < 0:
            raise HTTPException(status_code=422, detail="from_seq must be >= 0")
        log = session.log

        def generate():
            for event in log.follow(from_seq, heartbeat=True):
                if event is None:
                    yield ": keepalive\n\n"
                else:
                    yield f"data: {event.to_json()}\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app
