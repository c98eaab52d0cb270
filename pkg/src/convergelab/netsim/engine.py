"""Discrete-event engine: a heap of (time, sequence) ordered callbacks."""

from __future__ import annotations

import hashlib
import heapq
import struct
from typing import Any, Callable


class SchedulePastEvent(ValueError):
    pass


class Engine:
    def __init__(self, trace: bool = True) -> None:
        self.now = 0.0
        self._heap: list[tuple[float, int, str, Callable[..., Any], tuple]] = []
        self._seq = 0
        self.executed = 0
        self._trace = hashlib.blake2b(digest_size=16) if trace else None

    def schedule(self, time: float, action: Callable[..., Any], *args: Any, label: str = "") -> int:
        if time < self.now:
            raise SchedulePastEvent(f"event at {time!r} scheduled at now={self.now!r}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (time, seq, label, action, args))
        return seq

    def after(self, delay: float, action: Callable[..., Any], *args: Any, label: str = "") -> int:
        return self.schedule(self.now + delay, action, *args, label=label)

    def run_until(self, t_end: float) -> None:
        heap = self._heap
        trace = self._trace
        while heap and heap[0][0] <= t_end:
            time, seq, label, action, args = heapq.heappop(heap)
            self.now = time
            if trace is not None:
                trace.update(struct.pack("<dq", time, seq))
                trace.update(label.encode())
            self.executed += 1
            action(*args)
        if t_end > self.now:
            self.now = t_end

    @property
    def pending(self) -> int:
        return len(self._heap)

    def trace_digest(self) -> str:
        return self._trace.hexdigest() if self._trace is not None else ""


def schedule(engine: Engine, time: float, action: Callable[..., Any], *args: Any) -> int:
    return engine.schedule(time, action, *args)


def run_until(engine: Engine, t_end: float) -> None:
    engine.run_until(t_end)
