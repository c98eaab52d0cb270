"""One simulation run: topology, transport, auth schedule, traffic and metric sampling."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from convergelab.metrics import METRIC_IDS, MetricSeries
from convergelab.netsim.auth import AuthDriver, AuthNodes, AuthResult
from convergelab.netsim.engine import Engine
from convergelab.netsim.mac import CellState
from convergelab.netsim.scenario import Scenario
from convergelab.netsim.topology import Dscp, LinkClass, Network, NodeKind, build_topology
from convergelab.netsim.traffic import BillingSource, FtpClient, HttpClient, TrafficProfile, gen_traffic
from convergelab.netsim.transport import Kind, Packet, Transport
from convergelab.protocol import Protocol, build_deployment

AUTH_STAGGER_S = 0.05
UMTS_DOMAIN = (NodeKind.NODE_B, NodeKind.RNC, NodeKind.SGSN, NodeKind.GGSN)
SERVER_OF = {"ftp": "ftp", "http": "http", "mm": "mms"}


@dataclass
class PurityAudit:
    """Uplink choice at the APGW for every delivered packet that crossed it."""

    ef_total: int = 0
    ef_via_sgsn: int = 0
    ef_via_ar: int = 0
    be_total: int = 0
    be_via_sgsn: int = 0
    be_via_ar: int = 0
    local: int = 0  # crossed the APGW without using an uplink (station <-> AAA)

    def observe(self, net: Network, pkt: Packet) -> None:
        nodes = [n for n, _ in pkt.hops]
        if "apgw" not in nodes:
            return
        uplink = {n for i, n in enumerate(nodes) if n in ("sgsn", "ar")
                  and ((i > 0 and nodes[i - 1] == "apgw") or (i + 1 < len(nodes) and nodes[i + 1] == "apgw"))}
        if not uplink:
            self.local += 1
            return
        ef = pkt.dscp is Dscp.EF
        if ef:
            self.ef_total += 1
        else:
            self.be_total += 1
        if "sgsn" in uplink:
            if ef:
                self.ef_via_sgsn += 1
            else:
                self.be_via_sgsn += 1
        if "ar" in uplink:
            if ef:
                self.ef_via_ar += 1
            else:
                self.be_via_ar += 1

    @property
    def pure(self) -> bool:
        return (self.ef_via_sgsn == self.ef_total and self.ef_via_ar == 0
                and self.be_via_ar == self.be_total and self.be_via_sgsn == 0)


@dataclass
class SimResult:
    config: dict[str, str]
    series: dict[str, MetricSeries]
    auth: list[AuthResult]
    drops_by_link: dict[str, int]
    sgsn_drops: int
    purity: PurityAudit
    conservation: dict[str, dict[str, int]]
    causality_violations: int
    no_route: int
    events: int
    trace_digest: str
    response_times: dict[str, list[float]] = field(default_factory=dict)

    def auth_summary(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for r in self.auth:
            s = out.setdefault(r.flow, {"count": 0, "messages": 0, "bytes": 0, "resyncs": 0, "duration_s": 0.0})
            s["count"] += 1
            s["messages"] += r.messages
            s["bytes"] += r.total_bytes
            s["resyncs"] += int(r.resync)
            s["duration_s"] += r.duration
        for s in out.values():
            n = s["count"]
            s["mean_messages"] = s["messages"] / n
            s["mean_bytes"] = s["bytes"] / n
            s["mean_duration_s"] = s["duration_s"] / n
        return out


class _Bin:
    __slots__ = ("total", "count", "last")

    def __init__(self) -> None:
        self.total = 0.0
        self.count = 0
        self.last = 0.0

    def add(self, v: float) -> None:
        self.total += v
        self.count += 1

    def take_mean(self) -> float:
        # empty bins hold the previous value
        if self.count:
            self.last = self.total / self.count
        self.total, self.count = 0.0, 0
        return self.last


class Simulation:
    def __init__(self, scenario: Scenario, trace: bool = True) -> None:
        self.scenario = s = scenario
        lk, a, sim = s.links, s.auth, s.sim
        self.seed = sim.seed
        self.engine = Engine(trace=trace)
        self.net = build_topology(s.topology.coupling, s)
        cell = CellState(lk.wlan_bps, lk.wlan_slot_s, lk.wlan_difs_s, lk.wlan_cw_min, lk.wlan_cw_max, lk.wlan_max_busy)
        self.tp = Transport(self.engine, self.net, self.seed, cell)
        stations = self.net.wlan_stations + self.net.umts_stations
        self.dep = build_deployment(random.Random(f"{self.seed}/deployment"), subscribers=len(stations),
                                    curve=s.curve_params(), av_batch=a.av_batch)
        self.usims = dict(zip(stations, self.dep.usims))
        self.driver = AuthDriver(
            self.tp, AuthNodes("aaa", "hlr", "sgsn", "rnc"), self.dep, self.seed, Protocol.parse(a.protocol),
            wlan_access=a.wlan_access, overhead=a.frame_overhead_bytes, umts_message_bytes=a.umts_message_bytes,
            p_sync=a.p_sync,
        )
        self.profile = TrafficProfile.from_section(s.traffic)
        self.purity = PurityAudit()
        self.apps: dict[str, object] = {}
        self._wlan_links = [l.id for l in self.net.links if l.cls is LinkClass.WLAN]
        self._umts_links = [l.id for l in self.net.links if l.cls is LinkClass.UMTS
                            or self.net.nodes[l.a].kind in UMTS_DOMAIN or self.net.nodes[l.b].kind in UMTS_DOMAIN]
        self.series = {m: MetricSeries(m) for m in METRIC_IDS}
        self._mac = _Bin()
        self._delay = _Bin()
        self._app_bits = Counter()
        self._prev = {"wl_off": 0, "wl_del": 0, "um_off": 0, "um_del": 0}
        self.tp.on_wlan_access = lambda now, d: self._mac.add(d)
        self.tp.on_wlan_delivery = lambda now, d: self._delay.add(d)
        self.tp.on_send = self._count_send
        self.tp.on_delivered = lambda pkt: self.purity.observe(self.net, pkt)

    def _count_send(self, pkt: Packet) -> None:
        self._app_bits[pkt.kind] += pkt.size_bits

    def _schedule_auth(self, t_end: float) -> None:
        period = self.scenario.auth.reauth_period_s
        for i, st in enumerate(self.net.wlan_stations + self.net.umts_stations):
            umts = self.net.nodes[st].radio == "umts"
            k, t = 0, AUTH_STAGGER_S * (i + 1)
            while t <= t_end:
                fn = self.driver.umts if umts else self.driver.wlan
                self.engine.schedule(t, fn, st, self.usims[st], k, label="auth")
                k += 1
                t += period

    def _schedule_epochs(self, t_end: float) -> None:
        epoch = self.scenario.auth.epoch_s
        if epoch <= 0:
            return
        k, t = 1, epoch
        while t <= t_end:
            self.engine.schedule(t, self.dep.aaa.rotate_epoch, random.Random(f"{self.seed}/epoch/{k}"), label="epoch")
            k += 1
            t += epoch

    def _start_traffic(self) -> None:
        mix = self.scenario.traffic.mix
        for i, st in enumerate(self.net.wlan_stations + self.net.umts_stations):
            app = mix[i % len(mix)]
            self.apps[st] = gen_traffic(self.tp, self.profile, st, app, SERVER_OF[app], self.seed)
        start = self.profile.start_s
        if self.net.wlan_stations:
            BillingSource(self.tp, "aaa", "billing", len(self.net.wlan_stations), self.profile).start(start)
        if self.net.umts_stations:
            BillingSource(self.tp, "ggsn", "billing", len(self.net.umts_stations), self.profile).start(start)

    def _sample(self) -> None:
        now = self.engine.now
        period = self.scenario.sim.sample_period_s
        stats = self.tp.stats
        wl_off = sum(stats[i].offered_bits for i in self._wlan_links)
        wl_del = sum(stats[i].delivered_bits for i in self._wlan_links)
        um_off = sum(stats[i].offered_bits for i in self._umts_links)
        um_del = sum(stats[i].delivered_bits for i in self._umts_links)
        p = self._prev
        rec = {
            "wlan_load_bps": (wl_off - p["wl_off"]) / period,
            "wlan_throughput_bps": (wl_del - p["wl_del"]) / period,
            "wlan_media_access_delay_s": self._mac.take_mean(),
            "wlan_delay_s": self._delay.take_mean(),
            "ftp_traffic_sent_bps": self._app_bits.pop(Kind.FTP, 0) / period,
            "http_traffic_sent_bps": self._app_bits.pop(Kind.HTTP, 0) / period,
            "umts_tx_load_bps": (um_off - p["um_off"]) / period,
            "umts_rx_throughput_bps": (um_del - p["um_del"]) / period,
        }
        self._prev = {"wl_off": wl_off, "wl_del": wl_del, "um_off": um_off, "um_del": um_del}
        for mid, v in rec.items():
            self.series[mid].record(now, v)

    def run(self) -> SimResult:
        t_end = self.scenario.sim.duration_s
        period = self.scenario.sim.sample_period_s
        k = 1
        while k * period <= t_end + 1e-9:
            self.engine.schedule(k * period, self._sample, label="sample")
            k += 1
        self._schedule_auth(t_end)
        self._schedule_epochs(t_end)
        self._start_traffic()
        self.engine.run_until(t_end)
        return self._result()

    def _result(self) -> SimResult:
        tp = self.tp
        in_flight = tp.in_flight()
        conservation = {
            k.value: {"sent": tp.sent[k], "delivered": tp.delivered[k], "dropped": tp.dropped[k],
                      "in_flight": in_flight[k]}
            for k in Kind
        }
        drops = {f"{l.a}-{l.b}": tp.stats[l.id].drops for l in self.net.links if tp.stats[l.id].drops}
        rt = {"ftp": [], "http": []}
        for src in self.apps.values():
            if isinstance(src, FtpClient):
                rt["ftp"] += src.response_times
            elif isinstance(src, HttpClient):
                rt["http"] += src.response_times
        return SimResult(
            config=self.scenario.resolved(),
            series=self.series,
            auth=list(self.driver.results),
            drops_by_link=drops,
            sgsn_drops=tp.drops_on(lambda l: l.sgsn),
            purity=self.purity,
            conservation=conservation,
            causality_violations=tp.causality_violations,
            no_route=tp.no_route,
            events=self.engine.executed,
            trace_digest=self.engine.trace_digest(),
            response_times=rt,
        )


def run_simulation(scenario: Scenario, trace: bool = True) -> SimResult:
    return Simulation(scenario, trace=trace).run()
