"""Store-and-forward packet transport over a :class:`Network`.

Every direction of a wired link is its own FIFO server. Radio is shared:
one server for the whole WLAN cell (both directions) and one each for the
UMTS uplink and downlink. A server is a Lindley recursion on ``free_at``
plus a byte budget; an arrival that would overflow the budget is dropped
and charged to the link it was about to cross.
"""

from __future__ import annotations

import enum
import hashlib
from collections import Counter
from typing import Callable

from convergelab.netsim.engine import Engine
from convergelab.netsim.mac import CellState, wlan_mac_delay
from convergelab.netsim.topology import Dscp, Link, LinkClass, Network, NodeKind, NoRoute


class Kind(enum.Enum):
    AUTH = "Auth"
    FTP = "Ftp"
    HTTP = "Http"
    MM = "Mm"
    BILLING = "Billing"


def dscp_for(kind: Kind) -> Dscp:
    return Dscp.EF if kind is Kind.MM else Dscp.BE


class Packet:
    __slots__ = ("pid", "src", "dst", "size_bits", "kind", "dscp", "created_at", "hops", "on_arrival", "enq_wlan")

    def __init__(self, pid: int, src: str, dst: str, size_bits: int, kind: Kind, created_at: float,
                 on_arrival: Callable[["Packet"], None] | None = None) -> None:
        if size_bits <= 0:
            raise ValueError("packet size must be positive")
        self.pid = pid
        self.src = src
        self.dst = dst
        self.size_bits = size_bits
        self.kind = kind
        self.dscp = dscp_for(kind)
        self.created_at = created_at
        self.hops: list[tuple[str, float]] = []
        self.on_arrival = on_arrival
        self.enq_wlan = 0.0


def draw_key(*labels: object) -> int:
    """64-bit key from labels; keeps draws independent of event interleaving."""
    h = hashlib.blake2b("/".join(map(str, labels)).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


class _Server:
    __slots__ = ("name", "capacity", "free_at", "queued_bits")

    def __init__(self, name: str, capacity_bytes: int) -> None:
        self.name = name
        self.capacity = capacity_bytes * 8
        self.free_at = 0.0
        self.queued_bits = 0


class LinkStats:
    __slots__ = ("offered_bits", "delivered_bits", "drops")

    def __init__(self) -> None:
        self.offered_bits = 0
        self.delivered_bits = 0
        self.drops = 0


class Transport:
    def __init__(self, engine: Engine, net: Network, seed: int, cell: CellState | None = None) -> None:
        self.engine = engine
        self.net = net
        self.seed = seed
        self.cell = cell
        self.stats = [LinkStats() for _ in net.links]
        self._servers: dict[tuple[int, str], _Server] = {}
        self._build_servers()
        self._next_pid = 0
        self._wlan_frames = 0
        self.live: dict[int, Packet] = {}
        self.queued: set[int] = set()
        self.propagating: set[int] = set()
        self.sent = Counter()
        self.delivered = Counter()
        self.dropped = Counter()
        self.no_route = 0
        self.causality_violations = 0
        # hooks for metric collectors
        self.on_wlan_access: Callable[[float, float], None] | None = None  # (now, access delay)
        self.on_wlan_delivery: Callable[[float, float], None] | None = None  # (now, medium delay)
        self.on_delivered: Callable[[Packet], None] | None = None
        self.on_send: Callable[[Packet], None] | None = None

    def _build_servers(self) -> None:
        shared: dict[str, _Server] = {}
        for link in self.net.links:
            for frm in (link.a, link.b):
                if link.cls is LinkClass.WLAN:
                    srv = shared.setdefault("wlan", _Server("wlan", link.queue_bytes))
                elif link.cls is LinkClass.UMTS:
                    up = self.net.nodes[frm].kind is NodeKind.WORKSTATION
                    name = "umts-up" if up else "umts-down"
                    srv = shared.setdefault(name, _Server(name, link.queue_bytes))
                else:
                    srv = _Server(f"{link.id}:{frm}", link.queue_bytes)
                self._servers[(link.id, frm)] = srv

    def server_for(self, link: Link, frm: str) -> _Server:
        return self._servers[(link.id, frm)]

    def send(self, src: str, dst: str, size_bytes: int, kind: Kind,
             on_arrival: Callable[[Packet], None] | None = None) -> Packet:
        pkt = Packet(self._next_pid, src, dst, size_bytes * 8, kind, self.engine.now, on_arrival)
        self._next_pid += 1
        self.sent[kind] += 1
        self.live[pkt.pid] = pkt
        if self.on_send is not None:
            self.on_send(pkt)
        self._at_node(pkt, src)
        return pkt

    def _at_node(self, pkt: Packet, node: str) -> None:
        now = self.engine.now
        pkt.hops.append((node, now))
        if node == pkt.dst:
            self._deliver(pkt)
            return
        try:
            link = self.net.next_link(node, pkt.dst, pkt.dscp)
        except NoRoute:
            self.no_route += 1
            self._drop(pkt, None)
            return
        self._offer(pkt, link, node)

    def _offer(self, pkt: Packet, link: Link, frm: str) -> None:
        now = self.engine.now
        srv = self._servers[(link.id, frm)]
        st = self.stats[link.id]
        st.offered_bits += pkt.size_bits
        bits = pkt.size_bits
        if srv.queued_bits + bits > srv.capacity:
            self._drop(pkt, link)
            return
        srv.queued_bits += bits
        self.queued.add(pkt.pid)
        if link.cls is LinkClass.WLAN and self.cell is not None:
            key = draw_key(self.seed, "wlan", self._wlan_frames)
            self._wlan_frames += 1
            d = wlan_mac_delay(self.cell, now, bits, key, link.bandwidth)
            srv.free_at = self.cell.free_at
            pkt.enq_wlan = now
            if self.on_wlan_access is not None:
                self.on_wlan_access(now, d.total)
        else:
            srv.free_at = max(now, srv.free_at) + bits / link.bandwidth
        self.engine.schedule(srv.free_at, self._sent, pkt, link, frm, srv)

    def _sent(self, pkt: Packet, link: Link, frm: str, srv: _Server) -> None:
        srv.queued_bits -= pkt.size_bits
        self.queued.discard(pkt.pid)
        self.propagating.add(pkt.pid)
        self.engine.after(link.delay, self._arrive, pkt, link, link.other(frm))

    def _arrive(self, pkt: Packet, link: Link, node: str) -> None:
        self.propagating.discard(pkt.pid)
        self.stats[link.id].delivered_bits += pkt.size_bits
        if link.cls is LinkClass.WLAN and self.on_wlan_delivery is not None:
            self.on_wlan_delivery(self.engine.now, self.engine.now - pkt.enq_wlan)
        self._at_node(pkt, node)

    def _deliver(self, pkt: Packet) -> None:
        del self.live[pkt.pid]
        self.delivered[pkt.kind] += 1
        if self.engine.now + 1e-9 < pkt.created_at + self.min_latency(pkt):
            self.causality_violations += 1
        if self.on_delivered is not None:
            self.on_delivered(pkt)
        if pkt.on_arrival is not None:
            pkt.on_arrival(pkt)

    def _drop(self, pkt: Packet, link: Link | None) -> None:
        del self.live[pkt.pid]
        self.dropped[pkt.kind] += 1
        if link is not None:
            self.stats[link.id].drops += 1

    def min_latency(self, pkt: Packet) -> float:
        """Sum of transmission plus propagation time over the hops taken so far."""
        total = 0.0
        for (a, _), (b, _) in zip(pkt.hops, pkt.hops[1:]):
            link = self.net.link_between(a, b)
            total += pkt.size_bits / link.bandwidth + link.delay
        return total

    def in_flight(self) -> Counter:
        """Live packets by kind; every one of them must sit in a queue or on a wire."""
        if self.queued | self.propagating != set(self.live) or self.queued & self.propagating:
            raise AssertionError("live packets out of step with queues and wires")
        return Counter(p.kind for p in self.live.values())

    def drops_on(self, predicate: Callable[[Link], bool]) -> int:
        return sum(self.stats[l.id].drops for l in self.net.links if predicate(l))
