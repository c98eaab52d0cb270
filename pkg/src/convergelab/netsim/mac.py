"""Shared-medium 802.11 access model.

The cell is one FIFO server for every frame in either direction. A frame
arriving at ``now`` waits for the medium to drain (queueing), then backs off
a uniform number of slots from a window that doubles each time the channel
is sensed busy. Busy probability is the offered load over the last second
divided by capacity, capped at ``max_busy``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from convergelab import kernels


@dataclass
class CellState:
    capacity_bps: float
    slot_s: float = 20e-6
    difs_s: float = 50e-6
    cw_min: int = 31
    cw_max: int = 1023
    max_busy: float = 0.95
    window_s: float = 1.0
    free_at: float = 0.0
    _window: deque = field(default_factory=deque)
    _window_bits: float = 0.0

    def offer(self, now: float, bits: float) -> None:
        self._window.append((now, bits))
        self._window_bits += bits
        self._expire(now)

    def _expire(self, now: float) -> None:
        w = self._window
        while w and w[0][0] <= now - self.window_s:
            self._window_bits -= w.popleft()[1]
        if not w:
            self._window_bits = 0.0

    def busy_probability(self, now: float) -> float:
        self._expire(now)
        load = self._window_bits / (self.capacity_bps * self.window_s)
        return min(self.max_busy, load)


@dataclass(frozen=True)
class MacDelay:
    queue_wait: float
    contention_wait: float
    cw: int

    @property
    def total(self) -> float:
        return self.queue_wait + self.contention_wait


def contention_wait(cell: CellState, now: float, key: int) -> tuple[float, int]:
    slots, cw = kernels.contention_slots(key, cell.busy_probability(now), cell.cw_min, cell.cw_max)
    return slots * cell.slot_s, cw


def wlan_mac_delay(cell: CellState, now: float, bits: float, key: int, rate_bps: float | None = None) -> MacDelay:
    """Access delay of a frame of ``bits`` offered at ``now``; advances the medium.

    The frame holds the medium for DIFS + backoff + bits / rate once it reaches
    the head of the queue. Counting the frame in the load window before the
    draw means a lone frame on an idle cell still sees a small busy probability.
    """
    cell.offer(now, bits)
    queue_wait = max(0.0, cell.free_at - now)
    backoff, cw = contention_wait(cell, now, key)
    cell.free_at = now + queue_wait + cell.difs_s + backoff + bits / (rate_bps or cell.capacity_bps)
    return MacDelay(queue_wait, backoff, cw)
