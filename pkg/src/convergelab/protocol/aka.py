"""Baseline EAP-AKA full authentication.

Request/Identity, Response/Identity, Request/Challenge, Response/Challenge,
Success. The peer answers the first identity request with its permanent
identity in the clear unless a pseudonym from an earlier run is on file.
"""

from __future__ import annotations

import hmac
import random

from convergelab.crypto.aka import AUTN_BYTES, AUTS_BYTES, RAND_BYTES, AuthVector, MacFailure, RejectAuts, SyncFailure
from convergelab.crypto.symmetric import MAC_BYTES, NONCE_BYTES, AuthFail, mac, sym_decrypt, sym_encrypt, verify_mac
from convergelab.protocol import codec
from convergelab.protocol.backend import AaaServer, BackendCall, Usim
from convergelab.protocol.codec import (
    AT_AUTN,
    AT_AUTS,
    AT_ENCR_DATA,
    AT_IDENTITY,
    AT_MAC,
    AT_PERMANENT_ID_REQ,
    AT_RAND,
    AT_RES,
    METHOD_AKA,
    SUB_AUTH_REJECT,
    SUB_CHALLENGE,
    SUB_CLIENT_ERROR,
    SUB_IDENTITY,
    SUB_SYNC_FAILURE,
    EapMessage,
    pack_field,
)
from convergelab.protocol.identity import Identity, IdentityKind, InvalidIdentity
from convergelab.protocol.keys import AkaKeyInputs, SessionKeys, derive_session_keys
from convergelab.protocol.session import (
    PeerSession,
    Protocol,
    ProtocolViolation,
    ServerSession,
    State,
    field_of,
    require,
)


def sign(m: EapMessage, k_aut: bytes) -> EapMessage:
    """Fill AT_MAC, computed over the encoding with the MAC value zeroed."""
    return m.with_attr(AT_MAC, pack_field(mac(k_aut, codec.zero_attr(m, AT_MAC))))


def check_mac(m: EapMessage, k_aut: bytes) -> bool:
    try:
        tag = codec.unpack_field(m.attr(AT_MAC))
        return verify_mac(k_aut, codec.zero_attr(m, AT_MAC), tag)
    except codec.CodecError:
        return False


def aka_keys(identity: Identity, ck: bytes, ik: bytes) -> SessionKeys:
    return derive_session_keys(AkaKeyInputs(identity.encode(), ck, ik))


class AkaServerSession(ServerSession):
    protocol = Protocol.AKA

    def __init__(self, aaa: AaaServer, rng: random.Random, max_resync: int = 1) -> None:
        super().__init__(rng)
        self.aaa = aaa
        self.max_resync = max_resync
        self.resyncs = 0
        self.asked_permanent = False
        self.imsi: str | None = None
        self.vector: AuthVector | None = None
        self.backend_calls: list[BackendCall] = []
        self._pseudonym: bytes | None = None

    def _handle(self, incoming: bytes | None) -> bytes | None:
        if self.state is State.IDLE:
            require(incoming is None, "server not started")
            self._enter(State.IDENTITY_SENT)
            return self._emit(self._request(METHOD_AKA, SUB_IDENTITY, []))
        m = self._expect_response(incoming, METHOD_AKA)
        if self.state is State.IDENTITY_SENT:
            require(m.subtype == SUB_IDENTITY, "expected identity response")
            try:
                ident = Identity.decode(field_of(m, AT_IDENTITY))
            except InvalidIdentity as exc:
                raise ProtocolViolation(str(exc)) from None
            self.imsi = self.aaa.resolve(ident)
            if self.imsi is None and ident.kind is IdentityKind.PSEUDONYM and not self.asked_permanent:
                # unknown pseudonym: fall back to the permanent identity
                self.asked_permanent = True
                return self._emit(self._request(METHOD_AKA, SUB_IDENTITY, [(AT_PERMANENT_ID_REQ, pack_field(b""))]))
            require(self.imsi is not None, "unknown identity")
            return self._challenge()
        if m.subtype == SUB_SYNC_FAILURE:
            require(self.resyncs < self.max_resync, "too many resynchronizations")
            auts = field_of(m, AT_AUTS, AUTS_BYTES)
            try:
                self.aaa.resync(self.imsi, auts, self.vector.rand, self.backend_calls)
            except RejectAuts:
                raise ProtocolViolation("AUTS rejected by home network") from None
            self.resyncs += 1
            return self._challenge()
        require(m.subtype == SUB_CHALLENGE, f"peer answered subtype {m.subtype}")
        require(check_mac(m, self._pending_keys.k_aut), "AT_MAC mismatch")
        res = field_of(m, AT_RES)
        require(hmac.compare_digest(res, self.vector.xres), "RES differs from XRES")
        self.aaa.commit_pseudonym(self._pseudonym, self.imsi)
        return self._succeed()

    def _challenge(self) -> bytes:
        av = self.vector = self.aaa.take_vector(self.imsi, self.rng, self.backend_calls)
        keys = self._pending_keys = aka_keys(Identity.permanent(self.imsi), av.ck, av.ik)
        self._pseudonym = self.aaa.new_pseudonym(self.rng)
        nonce = self.rng.randbytes(NONCE_BYTES)
        encr = nonce + sym_encrypt(keys.k_encr, nonce, self._pseudonym)
        m = self._request(
            METHOD_AKA,
            SUB_CHALLENGE,
            [
                (AT_RAND, pack_field(av.rand)),
                (AT_AUTN, pack_field(av.autn)),
                (AT_ENCR_DATA, pack_field(encr)),
                (AT_MAC, pack_field(bytes(MAC_BYTES))),
            ],
        )
        self._enter(State.CHALLENGE_PROCESSED)
        return self._emit(sign(m, keys.k_aut))


class AkaPeerSession(PeerSession):
    protocol = Protocol.AKA
    method = METHOD_AKA

    def __init__(self, usim: Usim, rng: random.Random) -> None:
        super().__init__(rng)
        self.usim = usim
        self.identity_sent: Identity | None = None
        self.awaiting_resync = False
        self.sync_failures = 0
        self._pseudonym: bytes | None = None

    def _handle(self, incoming: bytes | None) -> bytes | None:
        m = self._expect_request(incoming)
        if m.code == codec.SUCCESS:
            require(self.state is State.CHALLENGE_PROCESSED and not self.awaiting_resync, "early Success")
            require(m.identifier == self.last_id, "Success identifier mismatch")
            self._enter(State.DONE)
            if self._pseudonym is not None:
                self.usim.pseudonym = self._pseudonym
            return None
        if m.subtype == SUB_IDENTITY:
            permanent = m.has(AT_PERMANENT_ID_REQ)
            require(self.state is State.IDLE or (self.state is State.IDENTITY_SENT and permanent),
                    "unexpected identity request")
            self.identity_sent = self.usim.permanent() if permanent else self.usim.identity()
            self._enter(State.IDENTITY_SENT)
            return self._emit(self._respond(SUB_IDENTITY, [(AT_IDENTITY, pack_field(self.identity_sent.encode()))]))
        require(m.subtype == SUB_CHALLENGE, f"unexpected subtype {m.subtype}")
        require(self.state is State.IDENTITY_SENT or self.awaiting_resync, "unexpected challenge")
        rand = field_of(m, AT_RAND, RAND_BYTES)
        autn = field_of(m, AT_AUTN, AUTN_BYTES)
        try:
            result = self.usim.run_aka(rand, autn)
        except MacFailure:
            return self._reject(SUB_AUTH_REJECT, "AUTN MAC failure")
        except SyncFailure as sf:
            self.awaiting_resync = True
            self.sync_failures += 1
            self._enter(State.CHALLENGE_PROCESSED)
            return self._emit(self._respond(SUB_SYNC_FAILURE, [(AT_AUTS, pack_field(sf.auts))]))
        keys = aka_keys(self.usim.permanent(), result.ck, result.ik)
        if not check_mac(m, keys.k_aut):
            return self._reject(SUB_CLIENT_ERROR, "AT_MAC mismatch on challenge")
        encr = field_of(m, AT_ENCR_DATA)
        try:
            self._pseudonym = sym_decrypt(keys.k_encr, encr[:NONCE_BYTES], encr[NONCE_BYTES:])
        except AuthFail:
            return self._reject(SUB_CLIENT_ERROR, "AT_ENCR_DATA does not decrypt")
        self._pending_keys = keys
        self.awaiting_resync = False
        self._enter(State.CHALLENGE_PROCESSED)
        reply = self._respond(SUB_CHALLENGE, [(AT_RES, pack_field(result.res)), (AT_MAC, pack_field(bytes(MAC_BYTES)))])
        return self._emit(sign(reply, keys.k_aut))


def aka_server_step(s: AkaServerSession, incoming: bytes | None) -> tuple[AkaServerSession, bytes | None]:
    return s, s.step(incoming)


def aka_peer_step(s: AkaPeerSession, incoming: bytes) -> tuple[AkaPeerSession, bytes | None]:
    return s, s.step(incoming)
