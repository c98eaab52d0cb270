"""Adversary harness that scores both protocols against the comparison matrix.

Every verdict comes from running attacks against the real state machines;
nothing for the two implemented protocols is hand-entered. A property holds
only if it holds on every seed.
"""

from __future__ import annotations

import csv
import enum
import io
import random
from dataclasses import dataclass, field

from convergelab.crypto import ec
from convergelab.crypto.symmetric import NONCE_BYTES, sym_decrypt, sym_encrypt
from convergelab.protocol import Protocol, State, build_deployment, decode_eap, derive_from_longterm, new_sessions
from convergelab.protocol import codec
from convergelab.protocol.codec import (
    AT_CPUB,
    AT_ENCR_DATA,
    AT_IDENTITY,
    AT_SERVER_ID,
    AT_SPUB,
    METHOD_AKA,
    METHOD_ECDH_AKA,
    EapMessage,
    pack_field,
)
from convergelab.protocol.ecdh import identity_key
from convergelab.protocol.loopback import TO_PEER, TO_SERVER, run_dialogue

DEFAULT_SEEDS = tuple(range(20))
ROGUE_SERVER_ID = b"aaa.rogue.example"


class Capability(enum.Enum):
    EAVESDROP = "eavesdrop"
    INJECT = "inject"
    REPLAY_STORE = "replay-store"
    ACTIVE_RELAY = "active-relay"
    COMPROMISE_K = "compromise-k"


@dataclass(frozen=True)
class AdversaryModel:
    capabilities: frozenset[Capability]
    k_after_session: bool = True

    def __post_init__(self) -> None:
        if Capability.ACTIVE_RELAY in self.capabilities and not {
            Capability.EAVESDROP,
            Capability.INJECT,
        } <= self.capabilities:
            raise ValueError("an active relay must also eavesdrop and inject")


class Scenario(enum.Enum):
    IDENTITY_CATCH = "IdentityCatch"
    REPLAY_CHALLENGE = "ReplayChallenge"
    RELAY_SUBSTITUTE = "RelaySubstitute"
    KEY_COMPROMISE_PFS = "KeyCompromisePfs"
    SQN_DESYNC_COST = "SqnDesyncCost"
    # outside the matrix: rogue key under a genuine server id (see README)
    SERVER_KEY_SPOOF = "ServerKeySpoof"


MATRIX_SCENARIOS = tuple(s for s in Scenario if s is not Scenario.SERVER_KEY_SPOOF)

ADVERSARIES = {
    Scenario.IDENTITY_CATCH: AdversaryModel(frozenset({Capability.EAVESDROP, Capability.INJECT})),
    Scenario.REPLAY_CHALLENGE: AdversaryModel(frozenset({Capability.EAVESDROP, Capability.REPLAY_STORE, Capability.INJECT})),
    Scenario.RELAY_SUBSTITUTE: AdversaryModel(
        frozenset({Capability.EAVESDROP, Capability.INJECT, Capability.ACTIVE_RELAY})
    ),
    Scenario.KEY_COMPROMISE_PFS: AdversaryModel(frozenset({Capability.EAVESDROP, Capability.COMPROMISE_K})),
    Scenario.SQN_DESYNC_COST: AdversaryModel(frozenset({Capability.EAVESDROP})),
    Scenario.SERVER_KEY_SPOOF: AdversaryModel(
        frozenset({Capability.EAVESDROP, Capability.INJECT, Capability.ACTIVE_RELAY})
    ),
}


class Outcome(enum.Enum):
    ATTACKER_LEARNED = "AttackerLearned"
    DETECTED = "Detected"
    NO_EFFECT = "NoEffect"
    EXTRA_MESSAGES = "ExtraMessages"


@dataclass(frozen=True)
class AttackOutcome:
    kind: Outcome
    detail: str = ""
    evidence: str = ""
    auts_seen: bool = False

    def __str__(self) -> str:
        return f"{self.kind.value}({self.detail})" if self.detail else self.kind.value


def _method(protocol: Protocol) -> int:
    return METHOD_AKA if protocol is Protocol.AKA else METHOD_ECDH_AKA


def _rng(protocol: Protocol, scenario: Scenario, seed: int) -> random.Random:
    return random.Random(f"{protocol.value}/{scenario.value}/{seed}")


def _leaks(imsi: str, packets: list[bytes]) -> int | None:
    needle = imsi.encode()
    for i, p in enumerate(packets):
        if needle in p:
            return i
    return None


def _identity_catch(protocol, rng):
    dep = build_deployment(rng)
    usim = dep.usim
    honest = run_dialogue(*new_sessions(protocol, dep, rng))
    hit = _leaks(usim.imsi, honest.messages)
    if hit is not None:
        return AttackOutcome(Outcome.ATTACKER_LEARNED, "IMSI", f"eavesdropped message {hit + 1} carries the IMSI")
    # rogue AAA: an identity request the subscriber was never provisioned to trust
    peer, _ = new_sessions(protocol, dep, rng)
    if protocol is Protocol.AKA:
        probe = EapMessage(codec.REQUEST, 1, METHOD_AKA, codec.SUB_IDENTITY, ((codec.AT_PERMANENT_ID_REQ, pack_field(b"")),))
    else:
        rogue = dep.aaa.curve.random_scalar(rng)
        probe = EapMessage(
            codec.REQUEST, 1, METHOD_ECDH_AKA, codec.SUB_IDENTITY,
            (
                (AT_SERVER_ID, pack_field(ROGUE_SERVER_ID)),
                (codec.AT_AP_ID, pack_field(dep.ap_id)),
                (AT_SPUB, pack_field(ec.encode_point(ec.public_key(rogue, dep.aaa.curve), dep.aaa.curve))),
            ),
        )
    reply = peer.step(codec.encode_eap(probe)) or b""
    if usim.imsi.encode() in reply:
        return AttackOutcome(Outcome.ATTACKER_LEARNED, "IMSI", "rogue identity request answered with the IMSI")
    return AttackOutcome(Outcome.NO_EFFECT, evidence=f"rogue request answered without identity; peer {peer.state.name}")


def _replay(protocol, rng):
    dep = build_deployment(rng)
    rec = run_dialogue(*new_sessions(protocol, dep, rng))
    to_peer = [m for m, d in zip(rec.messages, rec.directions) if d == TO_PEER]
    to_server = [m for m, d in zip(rec.messages, rec.directions) if d == TO_SERVER]

    peer, _ = new_sessions(protocol, dep, rng)
    peer_replies = [peer.step(m) for m in to_peer]
    _, server = new_sessions(protocol, dep, rng)
    server.step(None)
    for m in to_server:
        server.step(m)
    if peer.done or server.done:
        side = "peer" if peer.done else "server"
        return AttackOutcome(Outcome.ATTACKER_LEARNED, "ACCESS", f"replayed transcript accepted by a fresh {side}")
    auts = any(r and decode_eap(r).subtype == codec.SUB_SYNC_FAILURE for r in peer_replies)
    why = f"peer: {peer.failure_reason or peer.state.name}; server: {server.failure_reason or server.state.name}"
    if peer.state is State.FAILED or server.state is State.FAILED or auts:
        return AttackOutcome(Outcome.DETECTED, evidence=why, auts_seen=auts)
    return AttackOutcome(Outcome.NO_EFFECT, evidence=why)


def _relay_substitute(protocol, rng):
    dep = build_deployment(rng)
    usim = dep.usim
    curve = dep.aaa.curve
    if protocol is Protocol.AKA:
        # earlier session gives the subscriber a pseudonym; the relay then garbles it
        run_dialogue(*new_sessions(protocol, dep, rng))
        garbled = b"2" + rng.randbytes(16).hex().encode()

        def tamper(i, direction, pkt):
            m = decode_eap(pkt)
            if direction == TO_SERVER and i == 1 and m.has(AT_IDENTITY):
                return codec.encode_eap(m.with_attr(AT_IDENTITY, pack_field(garbled)))
            return pkt
    else:
        evil_a = curve.random_scalar(rng)
        evil_pub = ec.encode_point(ec.public_key(evil_a, curve), curve)
        seen = {}

        def tamper(i, direction, pkt):
            m = decode_eap(pkt)
            if direction == TO_PEER and m.has(AT_SPUB):
                seen["spub"] = codec.unpack_field(m.attr(AT_SPUB))
            if direction == TO_SERVER and m.has(AT_CPUB):
                # substitute a'P and re-encrypt the identity (relay knows the IMSI)
                spub = seen["spub"]
                shared = ec.ecdh_shared(evil_a, ec.decode_point(spub, curve), curve)
                nonce = rng.randbytes(NONCE_BYTES)
                aad = evil_pub + spub
                ct = sym_encrypt(identity_key(shared, evil_pub, spub), nonce, usim.permanent().encode(), aad)
                m = m.with_attr(AT_CPUB, pack_field(evil_pub)).with_attr(AT_ENCR_DATA, pack_field(nonce + ct))
                return codec.encode_eap(m)
            return pkt

    peer, server = new_sessions(protocol, dep, rng)
    d = run_dialogue(peer, server, tamper)
    if peer.state is State.FAILED or server.state is State.FAILED:
        who = "peer" if peer.state is State.FAILED else "server"
        reason = peer.failure_reason if who == "peer" else server.failure_reason
        return AttackOutcome(Outcome.DETECTED, evidence=f"{who} failed: {reason}")
    hit = _leaks(usim.imsi, d.messages)
    if d.both_done and hit is not None:
        return AttackOutcome(
            Outcome.ATTACKER_LEARNED, "IMSI",
            f"substituted identity accepted; message {hit + 1} carries the IMSI; both sides Done",
        )
    return AttackOutcome(Outcome.NO_EFFECT, evidence=f"peer {peer.state.name}, server {server.state.name}")


def _key_compromise(protocol, rng):
    dep = build_deployment(rng)
    d = run_dialogue(*new_sessions(protocol, dep, rng))
    if not d.keys_agree:
        return AttackOutcome(Outcome.NO_EFFECT, evidence="honest session did not complete")
    # K disclosed after the session ended
    got = derive_from_longterm(dep.usim.key.K, dep.usim.imsi, d.messages, _method(protocol), dep.aaa.curve)
    if got is not None and got == d.server.keys.msk:
        return AttackOutcome(Outcome.ATTACKER_LEARNED, "MSK", "MSK recomputed from K and the recorded transcript")
    return AttackOutcome(Outcome.NO_EFFECT, evidence="no candidate key verifies the final AT_MAC")


def _sqn_desync(protocol, rng):
    dep = build_deployment(rng)
    dep.usim.sqn.last_accepted += rng.randrange(1000, 1 << 20)
    d = run_dialogue(*new_sessions(protocol, dep, rng))
    auts = any(decode_eap(m).subtype == codec.SUB_SYNC_FAILURE for m in d.messages if m[0] == codec.RESPONSE)
    extra = d.count - 5
    ev = f"{d.count} messages, AUTS {'sent' if auts else 'not sent'}, peer SQN ops {dep.usim.sqn_ops}"
    return AttackOutcome(Outcome.EXTRA_MESSAGES, str(extra), ev, auts_seen=auts)


def _server_key_spoof(protocol, rng):
    if protocol is Protocol.AKA:
        return _identity_catch(protocol, rng)
    dep = build_deployment(rng)
    curve = dep.aaa.curve
    rogue_b = curve.random_scalar(rng)
    rogue_pub = ec.encode_point(ec.public_key(rogue_b, curve), curve)
    peer, server = new_sessions(protocol, dep, rng)
    m1 = decode_eap(server.step(None))
    reply = decode_eap(peer.step(codec.encode_eap(m1.with_attr(AT_SPUB, pack_field(rogue_pub)))))
    cpub = codec.unpack_field(reply.attr(AT_CPUB))
    encr = codec.unpack_field(reply.attr(AT_ENCR_DATA))
    shared = ec.ecdh_shared(rogue_b, ec.decode_point(cpub, curve), curve)
    plain = sym_decrypt(identity_key(shared, cpub, rogue_pub), encr[:NONCE_BYTES], encr[NONCE_BYTES:], cpub + rogue_pub)
    if dep.usim.imsi.encode() in plain:
        return AttackOutcome(Outcome.ATTACKER_LEARNED, "IMSI", "identity encrypted to an unauthenticated server key")
    return AttackOutcome(Outcome.NO_EFFECT)


_RUNNERS = {
    Scenario.IDENTITY_CATCH: _identity_catch,
    Scenario.REPLAY_CHALLENGE: _replay,
    Scenario.RELAY_SUBSTITUTE: _relay_substitute,
    Scenario.KEY_COMPROMISE_PFS: _key_compromise,
    Scenario.SQN_DESYNC_COST: _sqn_desync,
    Scenario.SERVER_KEY_SPOOF: _server_key_spoof,
}


def run_attack(protocol: Protocol, scenario: Scenario, seed: int) -> AttackOutcome:
    if protocol not in (Protocol.AKA, Protocol.ECDH_AKA):
        raise ValueError(f"no attack harness for {protocol}")
    return _RUNNERS[scenario](protocol, _rng(protocol, scenario, seed))


PROPERTIES = ("identity_protection", "replay_resistant", "mitm_resistant", "pfs", "needs_sqn_sync")

_PROPERTY_SCENARIO = {
    "identity_protection": Scenario.IDENTITY_CATCH,
    "replay_resistant": Scenario.REPLAY_CHALLENGE,
    "mitm_resistant": Scenario.RELAY_SUBSTITUTE,
    "pfs": Scenario.KEY_COMPROMISE_PFS,
    "needs_sqn_sync": Scenario.SQN_DESYNC_COST,
}


def _holds(prop: str, o: AttackOutcome) -> bool:
    if prop == "identity_protection":
        return o.kind is not Outcome.ATTACKER_LEARNED
    if prop == "replay_resistant":
        return o.kind in (Outcome.DETECTED, Outcome.NO_EFFECT)
    if prop == "mitm_resistant":
        return o.kind is Outcome.DETECTED
    if prop == "pfs":
        return o.kind is Outcome.NO_EFFECT
    return o.auts_seen


@dataclass
class PropertyReport:
    protocol: Protocol
    identity_protection: bool
    replay_resistant: bool
    mitm_resistant: bool
    pfs: bool
    needs_sqn_sync: bool
    seeds: tuple[int, ...]
    seeds_passed: dict[str, int] = field(default_factory=dict)
    evidence: dict[str, list[str]] = field(default_factory=dict)
    extra_messages: list[int] = field(default_factory=list)

    def verdicts(self) -> dict[str, bool]:
        return {p: getattr(self, p) for p in PROPERTIES}


def evaluate_matrix(protocol: Protocol, seeds: tuple[int, ...] = DEFAULT_SEEDS) -> PropertyReport:
    if len(seeds) < 1:
        raise ValueError("need at least one seed")
    outcomes = {s: [run_attack(protocol, s, seed) for seed in seeds] for s in MATRIX_SCENARIOS}
    verdict, passed, evidence = {}, {}, {}
    for prop in PROPERTIES:
        runs = outcomes[_PROPERTY_SCENARIO[prop]]
        hits = [_holds(prop, o) for o in runs]
        passed[prop] = sum(hits)
        # needs_sqn_sync is existential (any AUTS), the security rows universal
        verdict[prop] = any(hits) if prop == "needs_sqn_sync" else all(hits)
        evidence[prop] = [f"seed {seed}: {o} - {o.evidence}" for seed, o in zip(seeds, runs)]
    extra = [int(o.detail) for o in outcomes[Scenario.SQN_DESYNC_COST]]
    return PropertyReport(protocol, seeds=tuple(seeds), seeds_passed=passed, evidence=evidence,
                          extra_messages=extra, **verdict)


YES, NO, NA = "✓", "✗", "-"

COLUMNS = ("Proposed", "EAP_AKA", "EAP_SIM", "EAP_TLS", "EAP_TTLS")


@dataclass(frozen=True)
class ReferenceColumn:
    cryptosystem: str
    subscriber_management: str
    identity_protection: str
    interworking: str
    mitm_resistant: str
    replay_resistant: str
    pfs: str
    needs_sqn_sync: str

    def as_bool(self, prop: str) -> bool:
        return getattr(self, prop) == YES


@dataclass(frozen=True)
class ReferenceTable:
    Proposed: ReferenceColumn
    EAP_AKA: ReferenceColumn
    EAP_SIM: ReferenceColumn
    EAP_TLS: ReferenceColumn
    EAP_TTLS: ReferenceColumn

    def column(self, protocol: Protocol) -> ReferenceColumn:
        return self.EAP_AKA if protocol is Protocol.AKA else self.Proposed


def reference_table() -> ReferenceTable:
    cell = "Cellular Network Provider"
    return ReferenceTable(
        Proposed=ReferenceColumn("Symmetric and ECDH", cell, YES, YES, YES, YES, YES, NA),
        EAP_AKA=ReferenceColumn("Symmetric", cell, NO, YES, NO, YES, NO, YES),
        EAP_SIM=ReferenceColumn("Symmetric", cell, NO, YES, NO, YES, NO, NA),
        EAP_TLS=ReferenceColumn("Public (Certificate)", "WLAN Provider", NO, NO, YES, YES, NO, NA),
        EAP_TTLS=ReferenceColumn("Public (Certificate)", "WLAN Provider", YES, NO, NO, YES, NO, NA),
    )


def mismatches(report: PropertyReport, table: ReferenceTable | None = None) -> list[str]:
    col = (table or reference_table()).column(report.protocol)
    return [p for p in PROPERTIES if getattr(report, p) != col.as_bool(p)]


def _mark(prop: str, value: bool) -> str:
    if prop == "needs_sqn_sync" and not value:
        return NA
    return YES if value else NO


def format_report(report: PropertyReport) -> str:
    col = reference_table().column(report.protocol)
    lines = [f"protocol: {report.protocol.value}   seeds: {len(report.seeds)}", ""]
    lines.append(f"{'property':<22}{'measured':>9}{'reference':>10}{'seeds':>7}")
    for p in PROPERTIES:
        got = _mark(p, getattr(report, p))
        lines.append(f"{p:<22}{got:>9}{getattr(col, p):>10}{report.seeds_passed[p]:>7}")
    bad = mismatches(report)
    lines += ["", "matches reference column" if not bad else "MISMATCH: " + ", ".join(bad), ""]
    for p in PROPERTIES:
        lines.append(f"[{p}]")
        lines += ["  " + e for e in report.evidence[p][:3]]
        if len(report.evidence[p]) > 3:
            lines.append(f"  ... {len(report.evidence[p]) - 3} more seeds")
    return "\n".join(lines) + "\n"


def report_csv(reports: list[PropertyReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["protocol", "property", "verdict", "seeds_passed"])
    for r in reports:
        for p in PROPERTIES:
            w.writerow([r.protocol.value, p, "true" if getattr(r, p) else "false", r.seeds_passed[p]])
    return buf.getvalue()
