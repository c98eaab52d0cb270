"""Application sources: closed-loop FTP and HTTP, on/off multimedia, periodic billing.

Each source owns a ``random.Random`` seeded from (seed, station, app) and
draws in a fixed order, so two runs that differ only in protocol see the
same file sizes and think times.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from types import SimpleNamespace

from convergelab.netsim.transport import Kind, Packet, Transport


@dataclass(frozen=True)
class TrafficProfile:
    start_s: float
    ftp_request_bytes: int
    ftp_file_bytes_mean: float
    ftp_think_s_mean: float
    http_request_bytes: int
    http_page_bytes_mean: float
    http_objects_max: int
    http_object_bytes_mean: float
    http_think_s_mean: float
    mm_bitrate_bps: float
    mm_packet_bytes: int
    mm_on_s_mean: float
    mm_off_s_mean: float
    billing_record_bytes: int
    billing_period_s: float

    @classmethod
    def from_section(cls, t: SimpleNamespace) -> "TrafficProfile":
        return cls(**{f: getattr(t, f) for f in cls.__dataclass_fields__})


def stream(seed: int, station: str, app: str) -> random.Random:
    return random.Random(f"{seed}/{station}/{app}")


def _size(rng: random.Random, mean: float) -> int:
    return max(1, round(rng.expovariate(1.0 / mean)))


class FtpClient:
    """get request, whole file back, think, repeat."""

    def __init__(self, tp: Transport, client: str, server: str, prof: TrafficProfile, rng: random.Random) -> None:
        self.tp, self.client, self.server, self.prof, self.rng = tp, client, server, prof, rng
        self.response_times: list[float] = []
        self._t0 = 0.0

    def start(self, at: float) -> None:
        self.tp.engine.schedule(at, self._request, label="ftp")

    def _request(self) -> None:
        self._t0 = self.tp.engine.now
        self.tp.send(self.client, self.server, self.prof.ftp_request_bytes, Kind.FTP, self._serve)

    def _serve(self, _: Packet) -> None:
        size = _size(self.rng, self.prof.ftp_file_bytes_mean)
        self.tp.send(self.server, self.client, size, Kind.FTP, self._done)

    def _done(self, _: Packet) -> None:
        self.response_times.append(self.tp.engine.now - self._t0)
        self.tp.engine.after(self.rng.expovariate(1.0 / self.prof.ftp_think_s_mean), self._request, label="ftp")


class HttpClient:
    """Page fetch followed by its inline objects in parallel; the page ends with the last object."""

    def __init__(self, tp: Transport, client: str, server: str, prof: TrafficProfile, rng: random.Random) -> None:
        self.tp, self.client, self.server, self.prof, self.rng = tp, client, server, prof, rng
        self.response_times: list[float] = []
        self._t0 = 0.0
        self._outstanding = 0

    def start(self, at: float) -> None:
        self.tp.engine.schedule(at, self._request_page, label="http")

    def _request_page(self) -> None:
        self._t0 = self.tp.engine.now
        self.tp.send(self.client, self.server, self.prof.http_request_bytes, Kind.HTTP, self._serve_page)

    def _serve_page(self, _: Packet) -> None:
        size = _size(self.rng, self.prof.http_page_bytes_mean)
        self.tp.send(self.server, self.client, size, Kind.HTTP, self._page_arrived)

    def _page_arrived(self, _: Packet) -> None:
        n = self.rng.randint(0, self.prof.http_objects_max)
        if n == 0:
            self._finish()
            return
        self._outstanding = n
        for _ in range(n):
            self.tp.send(self.client, self.server, self.prof.http_request_bytes, Kind.HTTP, self._serve_object)

    def _serve_object(self, _: Packet) -> None:
        size = _size(self.rng, self.prof.http_object_bytes_mean)
        self.tp.send(self.server, self.client, size, Kind.HTTP, self._object_arrived)

    def _object_arrived(self, _: Packet) -> None:
        self._outstanding -= 1
        if self._outstanding == 0:
            self._finish()

    def _finish(self) -> None:
        self.response_times.append(self.tp.engine.now - self._t0)
        self.tp.engine.after(self.rng.expovariate(1.0 / self.prof.http_think_s_mean), self._request_page, label="http")


class MmSource:
    """Constant-bitrate downlink bursts with exponential on and off periods."""

    def __init__(self, tp: Transport, client: str, server: str, prof: TrafficProfile, rng: random.Random) -> None:
        self.tp, self.client, self.server, self.prof, self.rng = tp, client, server, prof, rng
        self.interval = prof.mm_packet_bytes * 8 / prof.mm_bitrate_bps
        self.emitted: list[float] = []
        self.on_periods: list[tuple[float, float]] = []
        self._until = 0.0

    def start(self, at: float) -> None:
        self.tp.engine.schedule(at, self._on, label="mm")

    def _on(self) -> None:
        now = self.tp.engine.now
        self._until = now + self.rng.expovariate(1.0 / self.prof.mm_on_s_mean)
        self.on_periods.append((now, self._until))
        self._emit()

    def _emit(self) -> None:
        now = self.tp.engine.now
        self.emitted.append(now)
        self.tp.send(self.server, self.client, self.prof.mm_packet_bytes, Kind.MM)
        nxt = now + self.interval
        if nxt < self._until:
            self.tp.engine.schedule(nxt, self._emit, label="mm")
        else:
            off = self.rng.expovariate(1.0 / self.prof.mm_off_s_mean)
            self.tp.engine.schedule(self._until + off, self._on, label="mm")


class BillingSource:
    """One accounting record per served station every period."""

    def __init__(self, tp: Transport, reporter: str, sink: str, stations: int, prof: TrafficProfile) -> None:
        self.tp, self.reporter, self.sink, self.stations, self.prof = tp, reporter, sink, stations, prof

    def start(self, at: float) -> None:
        self.tp.engine.schedule(at + self.prof.billing_period_s, self._tick, label="billing")

    def _tick(self) -> None:
        for _ in range(self.stations):
            self.tp.send(self.reporter, self.sink, self.prof.billing_record_bytes, Kind.BILLING)
        self.tp.engine.after(self.prof.billing_period_s, self._tick, label="billing")


APPS = {"ftp": FtpClient, "http": HttpClient, "mm": MmSource}


def gen_traffic(tp: Transport, prof: TrafficProfile, station: str, app: str, server: str, seed: int):
    """Create and start one application source for ``station``."""
    src = APPS[app](tp, station, server, prof, stream(seed, station, app))
    src.start(prof.start_s)
    return src
