"""Deterministic discrete-event core.

Time is integer nanoseconds. Events scheduled at the same instant fire in
insertion order, which makes every run bit-reproducible for identical inputs.
"""
from __future__ import annotations

import hashlib
import heapq
from typing import Callable, Iterable, List, Optional, Tuple


class SimulationError(Exception):
    """Base class for all simulator errors."""


class SchedulingInPast(SimulationError):
    """Raised when an event is scheduled before the current clock."""


class EventHandle:
    """Cancellable reference to a scheduled event."""

    __slots__ = ("time", "seq", "fn", "cancelled")

    def __init__(self, time: int, seq: int, fn: Callable[[], None]):
        self.time = time
        self.seq = seq
        self.fn = fn
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


class TraceRecorder:
    """Collects line-oriented trace records: time_ns,event_kind,subject,detail."""

    def __init__(self) -> None:
        self.records: List[Tuple[int, str, str, str]] = []

    def emit(self, time_ns: int, kind: str, subject: str, detail: str = "") -> None:
        self.records.append((time_ns, kind, subject, detail))

    def lines(self) -> Iterable[str]:
        for t, kind, subject, detail in self.records:
            yield f"{t},{kind},{subject},{detail}"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")

    def sha256(self) -> str:
        h = hashlib.sha256()
        for line in self.lines():
            h.update(line.encode())
            h.update(b"\n")
        return h.hexdigest()

    def filter(self, kind: Optional[str] = None, subject: Optional[str] = None):
        out = []
        for rec in self.records:
            if kind is not None and rec[1] != kind:
                continue
            if subject is not None and rec[2] != subject:
                continue
            out.append(rec)
        return out


class Simulator:
    """Single-threaded event loop over an integer-nanosecond clock."""

    def __init__(self, trace: Optional[TraceRecorder] = None):
        self._now: int = 0
        self._seq: int = 0
        self._heap: List[Tuple[int, int, EventHandle]] = []
        self.trace = trace if trace is not None else TraceRecorder()

    @property
    def now(self) -> int:
        return self._now

    def schedule(self, at: int, fn: Callable[[], None]) -> EventHandle:
        """Enqueue `fn` to run at absolute time `at` (>= current clock)."""
        if at < self._now:
            raise SchedulingInPast(f"cannot schedule at {at}ns, clock is {self._now}ns")
        handle = EventHandle(at, self._seq, fn)
        self._seq += 1
        heapq.heappush(self._heap, (at, handle.seq, handle))
        return handle

    def after(self, delay: int, fn: Callable[[], None]) -> EventHandle:
        return self.schedule(self._now + delay, fn)

    def emit(self, kind: str, subject: str, detail: str = "") -> None:
        self.trace.emit(self._now, kind, subject, detail)

    def run_until(self, t: int) -> int:
        """Process every event with time <= t, then set the clock to t."""
        if t < self._now:
            raise SchedulingInPast(f"cannot run to {t}ns, clock is {self._now}ns")
        while self._heap and self._heap[0][0] <= t:
            time, _, handle = heapq.heappop(self._heap)
            if handle.cancelled:
                continue
            self._now = time
            handle.fn()
        self._now = t
        return self._now

    def run(self, max_events: int = 50_000_000) -> int:
        """Drain the queue; returns the final clock."""
        count = 0
        while self._heap:
            time, _, handle = heapq.heappop(self._heap)
            if handle.cancelled:
                continue
            self._now = time
            handle.fn()
            count += 1
            if count > max_events:
                raise SimulationError(f"event budget exceeded ({max_events} events)")
        return self._now

    def pending(self) -> int:
        return sum(1 for _, _, h in self._heap if not h.cancelled)
