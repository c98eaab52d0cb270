"""Authentication exchanges carried as packets through the simulated network.

WLAN access runs the real EAP sessions between a station and the AAA node;
whenever the server consults the home subscriber server, the logged backend
call is sent AAA->HLR and back before the server's next message is released.
UMTS attach is the eleven-message GPRS sequence with a real AKA challenge in
messages 4 and 5.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from convergelab.crypto.aka import MacFailure, SyncFailure
from convergelab.protocol import codec, new_sessions
from convergelab.protocol.backend import Deployment, Usim
from convergelab.protocol.password import PasswordPeerSession, PasswordServerSession
from convergelab.protocol.session import PeerSession, Protocol, ServerSession
from convergelab.netsim.transport import Kind, Packet, Transport


class AuthFailed(RuntimeError):
    pass


@dataclass
class AuthResult:
    station: str
    flow: str  # "eap", "password" or "umts-attach"
    protocol: str
    started: float
    messages: int = 0
    total_bytes: int = 0
    backend_messages: int = 0
    duration: float = 0.0
    resync: bool = False
    ok: bool = False
    detail: str = ""

    @property
    def finished(self) -> float:
        return self.started + self.duration


@dataclass
class AuthNodes:
    aaa: str
    hlr: str
    sgsn: str
    rnc: str


# who sends each UMTS attach message, as (from, to) roles
UMTS_ATTACH = (
    ("attach-request", "ue", "sgsn"),
    ("send-auth-info", "sgsn", "hlr"),
    ("send-auth-info-ack", "hlr", "sgsn"),
    ("auth-request", "sgsn", "ue"),
    ("auth-response", "ue", "sgsn"),
    ("security-mode-command", "sgsn", "rnc"),
    ("security-mode-command", "rnc", "ue"),
    ("security-mode-complete", "ue", "rnc"),
    ("security-mode-complete", "rnc", "sgsn"),
    ("attach-accept", "sgsn", "ue"),
    ("attach-complete", "ue", "sgsn"),
)


def _is_sync_failure(m: bytes) -> bool:
    if m[0] != codec.RESPONSE:
        return False
    return codec.decode_eap(m).subtype == codec.SUB_SYNC_FAILURE


def _desync(usim: Usim, rng: random.Random) -> None:
    usim.sqn.last_accepted += usim.sqn.delta_max + rng.randrange(1, 1 << 20)


class EapExchange:
    """One EAP run between ``station`` and the AAA node over the transport."""

    def __init__(self, tp: Transport, nodes: AuthNodes, station: str, peer: PeerSession, server: ServerSession,
                 overhead: int, result: AuthResult, done: Callable[[AuthResult], None]) -> None:
        self.tp, self.nodes, self.station = tp, nodes, station
        self.peer, self.server = peer, server
        self.overhead = overhead
        self.result = result
        self.done = done
        self._calls_seen = 0

    def start(self) -> None:
        self._from_server(self.server.step(None))

    def _from_server(self, out: bytes | None) -> None:
        calls = getattr(self.server, "backend_calls", [])
        fresh = calls[self._calls_seen:]
        self._calls_seen = len(calls)
        self._backend(list(fresh), out)

    def _backend(self, pending: list, out: bytes | None) -> None:
        if not pending:
            self._release(out)
            return
        call = pending.pop(0)
        r = self.result
        r.backend_messages += 2
        r.total_bytes += call.request_bytes + call.response_bytes

        def answered(_: Packet) -> None:
            self._backend(pending, out)

        def asked(_: Packet) -> None:
            self.tp.send(self.nodes.hlr, self.nodes.aaa, call.response_bytes, Kind.AUTH, answered)

        self.tp.send(self.nodes.aaa, self.nodes.hlr, call.request_bytes, Kind.AUTH, asked)

    def _release(self, out: bytes | None) -> None:
        if out is None:
            self._finish()
            return
        self._count(out)
        self.tp.send(self.nodes.aaa, self.station, len(out) + self.overhead, Kind.AUTH,
                     lambda _: self._to_peer(out))

    def _to_peer(self, msg: bytes) -> None:
        reply = self.peer.step(msg)
        if reply is None:
            self._finish()
            return
        self._count(reply)
        self.tp.send(self.station, self.nodes.aaa, len(reply) + self.overhead, Kind.AUTH,
                     lambda _: self._from_server(self.server.step(reply)))

    def _count(self, m: bytes) -> None:
        self.result.messages += 1
        self.result.total_bytes += len(m) + self.overhead
        if _is_sync_failure(m):
            self.result.resync = True

    def _finish(self) -> None:
        r = self.result
        r.duration = self.tp.engine.now - r.started
        r.ok = self.peer.done and self.server.done and self.peer.keys.msk == self.server.keys.msk
        if not r.ok:
            r.detail = self.peer.failure_reason or self.server.failure_reason or "incomplete"
        self.done(r)


class UmtsAttach:
    """Scripted attach; the AKA challenge and response are computed for real."""

    def __init__(self, tp: Transport, nodes: AuthNodes, station: str, dep: Deployment, usim: Usim,
                 rng: random.Random, size: int, result: AuthResult, done: Callable[[AuthResult], None]) -> None:
        self.tp, self.nodes, self.station = tp, nodes, station
        self.dep, self.usim, self.rng, self.size = dep, usim, rng, size
        self.result, self.done = result, done
        self.roles = {"ue": station, "sgsn": nodes.sgsn, "hlr": nodes.hlr, "rnc": nodes.rnc}
        self._vector = None
        self._res = b""

    def start(self) -> None:
        self._send(0)

    def _send(self, i: int) -> None:
        _, frm, to = UMTS_ATTACH[i]
        self.result.messages += 1
        self.result.total_bytes += self.size
        self.tp.send(self.roles[frm], self.roles[to], self.size, Kind.AUTH, lambda _: self._arrived(i))

    def _arrived(self, i: int) -> None:
        name = UMTS_ATTACH[i][0]
        try:
            if name == "send-auth-info":
                self._vector = self.dep.hss.auth_vectors(self.usim.imsi, 1, self.rng)[0]
            elif name == "auth-request":
                self._res = self.usim.run_aka(self._vector.rand, self._vector.autn).res
            elif name == "auth-response" and self._res != self._vector.xres:
                raise AuthFailed("RES does not match XRES")
        except (MacFailure, SyncFailure, AuthFailed) as exc:
            self._end(False, f"{type(exc).__name__}: {exc}")
            return
        if i + 1 < len(UMTS_ATTACH):
            self._send(i + 1)
        else:
            self._end(True, "")

    def _end(self, ok: bool, detail: str) -> None:
        r = self.result
        r.ok, r.detail = ok, detail
        r.duration = self.tp.engine.now - r.started
        self.done(r)


@dataclass
class AuthDriver:
    """Starts exchanges and collects their results; failures raise ``AuthFailed``."""

    tp: Transport
    nodes: AuthNodes
    dep: Deployment
    seed: int
    protocol: Protocol
    wlan_access: str = "eap"
    overhead: int = 40
    umts_message_bytes: int = 120
    p_sync: float = 0.0
    results: list[AuthResult] = field(default_factory=list)
    raise_on_failure: bool = True

    def _rng(self, station: str, index: int, what: str) -> random.Random:
        return random.Random(f"{self.seed}/auth/{what}/{station}/{index}")

    def _done(self, r: AuthResult) -> None:
        self.results.append(r)
        if not r.ok and self.raise_on_failure:
            raise AuthFailed(f"{r.flow} for {r.station} at t={r.started:.3f}: {r.detail}")

    def wlan(self, station: str, usim: Usim, index: int) -> None:
        now = self.tp.engine.now
        rng = self._rng(station, index, "wlan")
        if self.wlan_access == "password":
            user, pw = usim.imsi.encode(), usim.key.K
            peer, server = PasswordPeerSession(user, pw, rng), PasswordServerSession({user: pw}, rng)
            result = AuthResult(station, "password", Protocol.PASSWORD.value, now)
        else:
            if self.protocol is Protocol.AKA and rng.random() < self.p_sync:
                _desync(usim, rng)
            peer, server = new_sessions(self.protocol, self.dep, rng, usim)
            result = AuthResult(station, "eap", self.protocol.value, now)
        EapExchange(self.tp, self.nodes, station, peer, server, self.overhead, result, self._done).start()

    def umts(self, station: str, usim: Usim, index: int) -> None:
        result = AuthResult(station, "umts-attach", "aka", self.tp.engine.now)
        UmtsAttach(self.tp, self.nodes, station, self.dep, usim, self._rng(station, index, "umts"),
                   self.umts_message_bytes, result, self._done).start()


def run_auth_session(driver: AuthDriver, station: str, usim: Usim, umts: bool = False, index: int = 0) -> None:
    (driver.umts if umts else driver.wlan)(station, usim, index)
