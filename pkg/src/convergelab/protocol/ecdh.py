"""ECDH-enhanced EAP-AKA.

Message flow::

    1  Req/Identity    SERVER_ID, AP_ID, SPUB=bP
    2  Resp/Identity   CPUB=aP, NONCE_P, ENCR_DATA=E_{KDF(abP)}(IMSI)
    3  Req/Challenge   RAND, NONCE_S, MAC_K (HSS, K-keyed), MAC (KDF(abP)-keyed)
    4  Resp/Challenge  RES, MAC (K_aut over the transcript hash)
    5  Success

bP belongs to the AAA server for one key epoch. It is unauthenticated in
message 1 and bound retroactively: MAC_K covers aP, bP, RAND and both
nonces, and only the home network can produce it. No SQN is used.
"""

from __future__ import annotations

import hmac
import random

from convergelab.crypto import ec
from convergelab.crypto.aka import RAND_BYTES, MacFailure
from convergelab.crypto.symmetric import (
    MAC_BYTES,
    NONCE_BYTES,
    TAG_ID_KEY,
    TAG_SERVER_MAC_KEY,
    AuthFail,
    kdf,
    mac,
    sym_decrypt,
    sym_encrypt,
    verify_mac,
)
from convergelab.protocol import codec
from convergelab.protocol.backend import NONCE_BYTES as EAP_NONCE_BYTES
from convergelab.protocol.backend import AaaServer, BackendCall, EcdhMaterial, Usim, binding_data
from convergelab.protocol.codec import (
    AT_AP_ID,
    AT_CPUB,
    AT_ENCR_DATA,
    AT_MAC,
    AT_MAC_K,
    AT_NONCE_P,
    AT_NONCE_S,
    AT_RAND,
    AT_RES,
    AT_SERVER_ID,
    AT_SPUB,
    METHOD_ECDH_AKA,
    SUB_AUTH_REJECT,
    SUB_CHALLENGE,
    SUB_CLIENT_ERROR,
    SUB_IDENTITY,
    EapMessage,
    pack_field,
)
from convergelab.protocol.identity import Identity, IdentityKind, InvalidIdentity
from convergelab.protocol.keys import EcdhKeyInputs, SessionKeys, derive_session_keys, transcript_hash
from convergelab.protocol.session import (
    PeerSession,
    Protocol,
    ProtocolViolation,
    ServerSession,
    State,
    field_of,
    require,
)


def identity_key(shared: bytes, cpub: bytes, spub: bytes) -> bytes:
    return kdf(shared, TAG_ID_KEY, cpub + spub)


def server_mac_key(shared: bytes) -> bytes:
    return kdf(shared, TAG_SERVER_MAC_KEY)


def ecdh_keys(shared: bytes, ck: bytes, ik: bytes, nonce_p: bytes, nonce_s: bytes) -> SessionKeys:
    return derive_session_keys(EcdhKeyInputs(shared, ck, ik, nonce_p, nonce_s))


def transcript_mac(key: bytes, earlier: list[bytes], m: EapMessage) -> bytes:
    return mac(key, transcript_hash(earlier + [codec.zero_attr(m, AT_MAC)]))


def check_transcript_mac(key: bytes, earlier: list[bytes], m: EapMessage) -> bool:
    try:
        tag = codec.unpack_field(m.attr(AT_MAC))
        return verify_mac(key, transcript_hash(earlier + [codec.zero_attr(m, AT_MAC)]), tag)
    except codec.CodecError:
        return False


def _point(data: bytes, curve: ec.CurveParams) -> tuple[int, int]:
    try:
        return ec.decode_point(data, curve)
    except ec.PointNotOnCurve as exc:
        raise ProtocolViolation(f"invalid public key: {exc}") from None


class EcdhServerSession(ServerSession):
    protocol = Protocol.ECDH_AKA

    def __init__(self, aaa: AaaServer, rng: random.Random, ap_id: bytes | None = None) -> None:
        super().__init__(rng)
        self.aaa = aaa
        self.ap_id = ap_id if ap_id is not None else aaa.ap_ids[0]
        self.curve = aaa.curve
        self.imsi: str | None = None
        self.material: EcdhMaterial | None = None
        self.backend_calls: list[BackendCall] = []

    def _handle(self, incoming: bytes | None) -> bytes | None:
        if self.state is State.IDLE:
            require(incoming is None, "server not started")
            self.spub = ec.encode_point(self.aaa.spub, self.curve)
            self.b = self.aaa.b
            m1 = self._request(
                METHOD_ECDH_AKA,
                SUB_IDENTITY,
                [
                    (AT_SERVER_ID, pack_field(self.aaa.server_id)),
                    (AT_AP_ID, pack_field(self.ap_id)),
                    (AT_SPUB, pack_field(self.spub)),
                ],
            )
            self._enter(State.IDENTITY_SENT)
            return self._emit(m1)
        m = self._expect_response(incoming, METHOD_ECDH_AKA)
        if self.state is State.IDENTITY_SENT:
            require(m.subtype == SUB_IDENTITY, f"peer answered subtype {m.subtype}")
            return self._challenge(m)
        require(m.subtype == SUB_CHALLENGE, f"peer answered subtype {m.subtype}")
        keys = self._pending_keys
        require(check_transcript_mac(keys.k_aut, self.transcript[:3], m), "AT_MAC mismatch")
        require(hmac.compare_digest(field_of(m, AT_RES), self.material.xres), "RES differs from XRES")
        return self._succeed()

    def _challenge(self, m2: EapMessage) -> bytes:
        cpub = field_of(m2, AT_CPUB)
        nonce_p = field_of(m2, AT_NONCE_P, EAP_NONCE_BYTES)
        encr = field_of(m2, AT_ENCR_DATA)
        a_pub = _point(cpub, self.curve)
        try:
            shared = ec.ecdh_shared(self.b, a_pub, self.curve)
        except ec.InfinityResult:
            raise ProtocolViolation("degenerate shared secret") from None
        aad = cpub + self.spub
        try:
            ident = Identity.decode(sym_decrypt(identity_key(shared, cpub, self.spub), encr[:NONCE_BYTES],
                                                encr[NONCE_BYTES:], aad))
        except (AuthFail, InvalidIdentity):
            raise ProtocolViolation("identity payload does not decrypt") from None
        require(ident.kind is IdentityKind.PERMANENT, "expected a permanent identity")
        self.imsi = self.aaa.resolve(ident)
        require(self.imsi is not None, "unknown subscriber")
        nonce_s = self.rng.randbytes(EAP_NONCE_BYTES)
        mat = self.material = self.aaa.ecdh_material(self.imsi, cpub, self.spub, nonce_p, nonce_s, self.rng,
                                                     self.backend_calls)
        self._pending_keys = ecdh_keys(shared, mat.ck, mat.ik, nonce_p, nonce_s)
        m3 = self._request(
            METHOD_ECDH_AKA,
            SUB_CHALLENGE,
            [
                (AT_RAND, pack_field(mat.rand)),
                (AT_NONCE_S, pack_field(nonce_s)),
                (AT_MAC_K, pack_field(mat.mac_k)),
                (AT_MAC, pack_field(bytes(MAC_BYTES))),
            ],
        )
        tag = transcript_mac(server_mac_key(shared), self.transcript[:2], m3)
        self._enter(State.CHALLENGE_PROCESSED)
        return self._emit(m3.with_attr(AT_MAC, pack_field(tag)))


class EcdhPeerSession(PeerSession):
    protocol = Protocol.ECDH_AKA
    method = METHOD_ECDH_AKA

    def __init__(
        self,
        usim: Usim,
        rng: random.Random,
        known_server_ids: frozenset[bytes] | set[bytes],
        known_ap_ids: frozenset[bytes] | set[bytes] | None = None,
        curve: ec.CurveParams = ec.P256,
    ) -> None:
        super().__init__(rng)
        self.usim = usim
        self.known_server_ids = frozenset(known_server_ids)
        self.known_ap_ids = None if known_ap_ids is None else frozenset(known_ap_ids)
        self.curve = curve

    def _handle(self, incoming: bytes | None) -> bytes | None:
        m = self._expect_request(incoming)
        if m.code == codec.SUCCESS:
            require(self.state is State.CHALLENGE_PROCESSED, "early Success")
            require(m.identifier == self.last_id, "Success identifier mismatch")
            self._enter(State.DONE)
            return None
        if self.state is State.IDLE:
            require(m.subtype == SUB_IDENTITY, "expected identity request")
            return self._identity(m)
        require(self.state is State.IDENTITY_SENT and m.subtype == SUB_CHALLENGE, "unexpected request")
        return self._challenge(m)

    def _identity(self, m1: EapMessage) -> bytes:
        server_id = field_of(m1, AT_SERVER_ID)
        ap_id = field_of(m1, AT_AP_ID)
        if server_id not in self.known_server_ids:
            return self._reject(SUB_CLIENT_ERROR, "unknown AAA server identity")
        if self.known_ap_ids is not None and ap_id not in self.known_ap_ids:
            return self._reject(SUB_CLIENT_ERROR, "unknown access point identity")
        self.spub = field_of(m1, AT_SPUB)
        b_pub = _point(self.spub, self.curve)
        self.a = self.curve.random_scalar(self.rng)
        self.cpub = ec.encode_point(ec.public_key(self.a, self.curve), self.curve)
        try:
            self.shared = ec.ecdh_shared(self.a, b_pub, self.curve)
        except ec.InfinityResult:
            raise ProtocolViolation("degenerate shared secret") from None
        self.nonce_p = self.rng.randbytes(EAP_NONCE_BYTES)
        nonce = self.rng.randbytes(NONCE_BYTES)
        aad = self.cpub + self.spub
        ct = sym_encrypt(identity_key(self.shared, self.cpub, self.spub), nonce, self.usim.permanent().encode(), aad)
        self._enter(State.IDENTITY_SENT)
        return self._emit(
            self._respond(
                SUB_IDENTITY,
                [
                    (AT_CPUB, pack_field(self.cpub)),
                    (AT_NONCE_P, pack_field(self.nonce_p)),
                    (AT_ENCR_DATA, pack_field(nonce + ct)),
                ],
            )
        )

    def _challenge(self, m3: EapMessage) -> bytes:
        rand = field_of(m3, AT_RAND, RAND_BYTES)
        nonce_s = field_of(m3, AT_NONCE_S, EAP_NONCE_BYTES)
        mac_k = field_of(m3, AT_MAC_K, MAC_BYTES)
        try:
            res, ck, ik = self.usim.run_ecdh(rand, binding_data(self.cpub, self.spub, rand, self.nonce_p, nonce_s), mac_k)
        except MacFailure:
            return self._reject(SUB_AUTH_REJECT, "AT_MAC_K does not verify")
        if not check_transcript_mac(server_mac_key(self.shared), self.transcript[:2], m3):
            return self._reject(SUB_CLIENT_ERROR, "AT_MAC from AAA server does not verify")
        keys = self._pending_keys = ecdh_keys(self.shared, ck, ik, self.nonce_p, nonce_s)
        m4 = self._respond(SUB_CHALLENGE, [(AT_RES, pack_field(res)), (AT_MAC, pack_field(bytes(MAC_BYTES)))])
        tag = transcript_mac(keys.k_aut, self.transcript[:3], m4)
        self._enter(State.CHALLENGE_PROCESSED)
        return self._emit(m4.with_attr(AT_MAC, pack_field(tag)))


def ecdh_server_step(s: EcdhServerSession, incoming: bytes | None) -> tuple[EcdhServerSession, bytes | None]:
    return s, s.step(incoming)


def ecdh_peer_step(s: EcdhPeerSession, incoming: bytes) -> tuple[EcdhPeerSession, bytes | None]:
    return s, s.step(incoming)
