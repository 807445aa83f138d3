"""Session clocks: wall-clock for live sessions, virtual for replay."""

import time


class SessionClock:
    """Monotone elapsed-time clock for one session.

    The origin (t=0) is the start of the student's question and is fixed
    at construction; `now_ms` never goes backwards.
    """

    def now_ms(self) -> int:
        raise NotImplementedError

    def advance(self, delta_ms: int) -> None:
        """Advance virtual time. No-op on a wall clock (time passes by itself)."""
        raise NotImplementedError


class WallClock(SessionClock):
    def __init__(self) -> None:
        self._origin = time.monotonic()
        self._last = 0

    def now_ms(self) -> int:
        now = int((time.monotonic() - self._origin) * 1000)
        if now < self._last:
            now = self._last
        self._last = now
        return now

    def advance(self, delta_ms: int) -> None:
        # Real time elapses on its own; simulated stage latencies are ignored.
        pass


class VirtualClock(SessionClock):
    """Deterministic clock driven explicitly by the replay runner."""

    def __init__(self, start_ms: int = 0) -> None:
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def advance(self, delta_ms: int) -> None:
        if delta_ms < 0:
            raise ValueError("clock cannot move backwards")
        self._now += delta_ms

    def set_at_least(self, t_ms: int) -> None:
        """Jump forward to t_ms if it is in the future."""
        if t_ms > self._now:
            self._now = t_ms
