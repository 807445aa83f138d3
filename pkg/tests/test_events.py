import threading

import pytest

from tutor_agent.events import EventLog, SessionEvent, load_event_log


def test_seq_strictly_increasing(tmp_path):
    log = EventLog("s1", tmp_path / "s1.jsonl")
    for i in range(5):
        log.append(i * 100, "tick", {"window_index": i + 1, "t_end_ms": 0})
    assert [e.seq for e in log.events] == [1, 2, 3, 4, 5]


def test_at_ms_clamped_non_decreasing():
    log = EventLog("s1")
    log.append(500, "tick", {})
    event = log.append(300, "tick", {})
    assert event.at_ms == 500


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        EventLog("s1").append(0, "bogus", {})


def test_jsonl_round_trip(tmp_path):
    path = tmp_path / "log.jsonl"
    log = EventLog("s1", path)
    log.append(0, "session_started", {"session_id": "s1"})
    log.append(10_000, "tick", {"window_index": 1, "t_end_ms": 10_000})
    log.close()
    assert load_event_log(path) == log.events


def test_follow_replays_then_tails():
    log = EventLog("s1")
    for i in range(3):
        log.append(i, "tick", {"i": i})
    received = []

    def consume():
        for event in log.follow(0, poll_timeout_s=0.05):
            received.append(event.seq)

    t = threading.Thread(target=consume)
    t.start()
    log.append(10, "tick", {"i": 3})
    log.append(11, "session_closed", {})
    log.close()
    t.join(timeout=5)
    assert received == [1, 2, 3, 4, 5]


def test_follow_from_offset():
    log = EventLog("s1")
    for i in range(4):
        log.append(i, "tick", {"i": i})
    log.close()
    assert [e.seq for e in log.follow(2)] == [3, 4]


def test_event_json_round_trip():
    event = SessionEvent(seq=3, at_ms=1200, kind="pin", payload={"card_id": "c1"})
    assert SessionEvent.from_json(event.to_json()) == event
