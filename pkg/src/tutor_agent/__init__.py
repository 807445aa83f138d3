"""On-demand instructional image agent for live tutoring sessions."""

from .config import AgentConfig
from .events import SessionEvent, load_event_log
from .runner import SessionRunner, run_replay, staleness_guard
from .windowing import DialogueWindow, SessionBuffer, Utterance

__all__ = [
    "AgentConfig",
    "DialogueWindow",
    "SessionBuffer",
    "SessionEvent",
    "SessionRunner",
    "Utterance",
    "load_event_log",
    "run_replay",
    "staleness_guard",
]

__version__ = "0.1.0"
