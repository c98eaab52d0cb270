"""Network templates for loose, tight and hybrid coupling, plus routing tables.

Routing is static shortest path by hop count with ties going to the lowest
link id. Hybrid coupling keeps one table per traffic class: EF never uses
the APGW-AccessRouter link and BE never uses the APGW-SGSN link, so the
APGW splits real-time and best-effort traffic and every other hop stays
consistent with that split.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

from convergelab.netsim.scenario import InvalidScenario, Scenario


class NodeKind(enum.Enum):
    WORKSTATION = "Workstation"
    WLAN_AP = "WlanAp"
    APGW = "Apgw"
    ACCESS_ROUTER = "AccessRouter"
    NODE_B = "NodeB"
    RNC = "Rnc"
    SGSN = "Sgsn"
    GGSN = "Ggsn"
    AAA_SERVER = "AaaServer"
    HLR_HSS = "HlrHss"
    FTP_SERVER = "FtpServer"
    HTTP_SERVER = "HttpServer"
    MM_SERVER = "MmServer"
    BILLING = "BillingSystem"
    INTERNET_ROUTER = "InternetRouter"
    SWITCH = "Switch"


class CouplingMode(enum.Enum):
    LOOSE = "loose"
    TIGHT = "tight"
    HYBRID = "hybrid"


class Dscp(enum.Enum):
    EF = "EF"
    BE = "BE"


class LinkClass(enum.Enum):
    WLAN = "wlan"
    UMTS = "umts"
    CORE = "core"


@dataclass
class Node:
    id: str
    kind: NodeKind
    ports: list[int] = field(default_factory=list)
    radio: str | None = None  # "wlan" / "umts" for workstations


@dataclass
class Link:
    id: int
    a: str
    b: str
    cls: LinkClass
    bandwidth: float
    delay: float
    queue_bytes: int
    sgsn: bool = False  # one end is the SGSN

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a

    def touches(self, node: str) -> bool:
        return node in (self.a, self.b)


class NoRoute(LookupError):
    pass


@dataclass
class Network:
    mode: CouplingMode
    nodes: dict[str, Node]
    links: list[Link]
    wlan_stations: list[str]
    umts_stations: list[str]
    # per-class routing tables: table[dscp][node][dst] -> link id
    tables: dict[Dscp, dict[str, dict[str, int]]] = field(default_factory=dict)

    def link_between(self, a: str, b: str) -> Link:
        for lid in self.nodes[a].ports:
            if self.links[lid].touches(b):
                return self.links[lid]
        raise KeyError(f"no link {a}-{b}")

    def by_kind(self, kind: NodeKind) -> list[str]:
        return [n.id for n in self.nodes.values() if n.kind is kind]

    def one(self, kind: NodeKind) -> str:
        found = self.by_kind(kind)
        if len(found) != 1:
            raise KeyError(f"{len(found)} nodes of kind {kind.value}")
        return found[0]

    def uplinks(self, node: str) -> list[Link]:
        """Links from ``node`` toward the core: everything except the AP side and the AAA stub."""
        edge = (NodeKind.WLAN_AP, NodeKind.AAA_SERVER)
        return [self.links[lid] for lid in self.nodes[node].ports if self.nodes[self.links[lid].other(node)].kind not in edge]

    def next_link(self, node: str, dst: str, dscp: Dscp) -> Link:
        table = self.tables[dscp if dscp in self.tables else Dscp.BE]
        try:
            return self.links[table[node][dst]]
        except KeyError:
            raise NoRoute(f"{node} -> {dst}") from None

    def path(self, src: str, dst: str, dscp: Dscp) -> list[str]:
        hops, node = [src], src
        while node != dst:
            node = self.next_link(node, dst, dscp).other(node)
            hops.append(node)
            if len(hops) > len(self.nodes):
                raise NoRoute(f"loop {src} -> {dst}")
        return hops


def _routing_table(net: Network, excluded: set[int]) -> dict[str, dict[str, int]]:
    adj: dict[str, list[tuple[int, str]]] = {n: [] for n in net.nodes}
    for link in net.links:
        if link.id in excluded:
            continue
        adj[link.a].append((link.id, link.b))
        adj[link.b].append((link.id, link.a))
    for n in adj:
        adj[n].sort()
    table: dict[str, dict[str, int]] = {n: {} for n in net.nodes}
    for dst in net.nodes:
        dist = {dst: 0}
        q = deque([dst])
        while q:
            u = q.popleft()
            for _, v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    q.append(v)
        for node, d in dist.items():
            if node == dst:
                continue
            # lowest link id among neighbours one hop closer
            table[node][dst] = next(lid for lid, v in adj[node] if dist.get(v) == d - 1)
    return table


def build_topology(mode: CouplingMode | str, scenario: Scenario) -> Network:
    mode = CouplingMode(mode) if isinstance(mode, str) else mode
    t, lk = scenario.topology, scenario.links
    if t.wlan_stations < 0 or t.umts_stations < 0 or t.wlan_stations + t.umts_stations == 0:
        raise InvalidScenario("workstation counts must be non-negative and not both zero")
    nodes: dict[str, Node] = {}
    links: list[Link] = []

    def node(nid: str, kind: NodeKind, radio: str | None = None) -> str:
        nodes[nid] = Node(nid, kind, radio=radio)
        return nid

    def link(a: str, b: str, cls: LinkClass, bw: float | None = None, q: int | None = None) -> Link:
        params = {
            LinkClass.WLAN: (lk.wlan_bps, lk.wlan_delay_s, lk.wlan_queue_bytes),
            LinkClass.UMTS: (lk.umts_bps, lk.umts_delay_s, lk.umts_queue_bytes),
            LinkClass.CORE: (lk.core_bps, lk.core_delay_s, lk.core_queue_bytes),
        }[cls]
        lid = len(links)
        links.append(Link(lid, a, b, cls, bw or params[0], params[1], q or params[2]))
        nodes[a].ports.append(lid)
        nodes[b].ports.append(lid)
        return links[-1]

    def sgsn_link(a: str, b: str) -> None:
        link(a, b, LinkClass.CORE, lk.sgsn_bps, lk.sgsn_queue_bytes).sgsn = True

    # internet side
    inet = node("inet", NodeKind.INTERNET_ROUTER)
    sw = node("switch", NodeKind.SWITCH)
    link(inet, sw, LinkClass.CORE)
    for nid, kind in (("ftp", NodeKind.FTP_SERVER), ("http", NodeKind.HTTP_SERVER), ("mms", NodeKind.MM_SERVER),
                      ("billing", NodeKind.BILLING)):
        link(node(nid, kind), sw, LinkClass.CORE)

    # UMTS side
    sgsn = node("sgsn", NodeKind.SGSN)
    ggsn = node("ggsn", NodeKind.GGSN)
    rnc = node("rnc", NodeKind.RNC)
    nodeb = node("nodeb", NodeKind.NODE_B)
    hlr = node("hlr", NodeKind.HLR_HSS)
    link(nodeb, rnc, LinkClass.CORE)
    sgsn_link(rnc, sgsn)
    sgsn_link(sgsn, ggsn)
    sgsn_link(sgsn, hlr)
    link(ggsn, inet, LinkClass.CORE)

    # WLAN side
    ap = node("ap", NodeKind.WLAN_AP)
    aaa = node("aaa", NodeKind.AAA_SERVER)
    if mode is CouplingMode.LOOSE:
        ar = node("ar", NodeKind.ACCESS_ROUTER)
        link(ap, ar, LinkClass.CORE)
        link(ar, inet, LinkClass.CORE)
        link(aaa, ar, LinkClass.CORE)
    else:
        apgw = node("apgw", NodeKind.APGW)
        link(ap, apgw, LinkClass.CORE)
        sgsn_link(apgw, sgsn)
        if mode is CouplingMode.HYBRID:
            ar = node("ar", NodeKind.ACCESS_ROUTER)
            link(apgw, ar, LinkClass.CORE)
            link(ar, inet, LinkClass.CORE)
        link(aaa, apgw, LinkClass.CORE)

    wlan = [node(f"wlan{i}", NodeKind.WORKSTATION, "wlan") for i in range(t.wlan_stations)]
    for w in wlan:
        link(w, ap, LinkClass.WLAN)
    umts = [node(f"umts{i}", NodeKind.WORKSTATION, "umts") for i in range(t.umts_stations)]
    for u in umts:
        link(u, nodeb, LinkClass.UMTS)

    net = Network(mode, nodes, links, wlan, umts)
    net.tables = routing_tables(net)
    return net


def routing_tables(net: Network) -> dict[Dscp, dict[str, dict[str, int]]]:
    if net.mode is CouplingMode.HYBRID:
        gw_ar = net.link_between("apgw", "ar").id
        gw_sgsn = net.link_between("apgw", "sgsn").id
        return {Dscp.EF: _routing_table(net, {gw_ar}), Dscp.BE: _routing_table(net, {gw_sgsn})}
    shared = _routing_table(net, set())
    return {Dscp.EF: shared, Dscp.BE: shared}


def route(net: Network, node: str, dst: str, dscp: Dscp) -> Link | None:
    """Next link toward ``dst``; None when the packet is already there."""
    if node == dst:
        return None
    return net.next_link(node, dst, dscp)
