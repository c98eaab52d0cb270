"""Subscriber module, home subscriber server and AAA server roles.

The AAA-HSS channel is an authenticated in-process call. Each call is logged
with nominal request/response sizes so the simulator can put the exchange on
the wire.
"""

from __future__ import annotations

import hmac
import random
import threading
from collections import deque
from dataclasses import dataclass, field

from convergelab.crypto import aka as aka_fn
from convergelab.crypto import ec
from convergelab.crypto.aka import AkaResult, AuthVector, MacFailure, ServerSqn, SqnState, SubscriberKey
from convergelab.crypto.symmetric import TAG_HSS_MAC_KEY, mac, prf
from convergelab.protocol.identity import Identity, IdentityKind, random_imsi, random_token

NONCE_BYTES = 16
# nominal MAP/Diameter framing added to every backend message
BACKEND_OVERHEAD = 40


def hss_mac_key(K: bytes) -> bytes:
    return prf(K, TAG_HSS_MAC_KEY, b"", 128)


def binding_data(cpub: bytes, spub: bytes, rand: bytes, nonce_p: bytes, nonce_s: bytes) -> bytes:
    return cpub + spub + rand + nonce_p + nonce_s


@dataclass
class Usim:
    imsi: str
    key: SubscriberKey
    sqn: SqnState = field(default_factory=SqnState)
    pseudonym: bytes | None = None

    def identity(self) -> Identity:
        if self.pseudonym is not None:
            return Identity.pseudonym(self.pseudonym)
        return Identity.permanent(self.imsi)

    def permanent(self) -> Identity:
        return Identity.permanent(self.imsi)

    def run_aka(self, rand: bytes, autn: bytes) -> AkaResult:
        return aka_fn.verify_autn(self.key, rand, autn, self.sqn)

    def run_ecdh(self, rand: bytes, binding: bytes, mac_k: bytes) -> tuple[bytes, bytes, bytes]:
        """Check the HSS binding MAC and return (RES, CK, IK). Never touches SQN."""
        if not hmac.compare_digest(mac(hss_mac_key(self.key.K), binding), mac_k):
            raise MacFailure("binding MAC from home network does not verify")
        K = self.key.K
        return aka_fn.f2(K, rand), aka_fn.f3(K, rand), aka_fn.f4(K, rand)

    @property
    def sqn_ops(self) -> int:
        return self.sqn.ops


@dataclass(frozen=True)
class EcdhMaterial:
    rand: bytes
    xres: bytes
    ck: bytes
    ik: bytes
    mac_k: bytes

    @property
    def wire_size(self) -> int:
        return len(self.rand) + len(self.xres) + len(self.ck) + len(self.ik) + len(self.mac_k)


@dataclass
class _Subscriber:
    key: SubscriberKey
    sqn: ServerSqn


class HssHandle:
    def __init__(self) -> None:
        self._subs: dict[str, _Subscriber] = {}
        self._lock = threading.Lock()

    def provision(self, imsi: str, key: SubscriberKey, sqn_start: int = 0) -> None:
        self._subs[imsi] = _Subscriber(key, ServerSqn(sqn_start))

    def knows(self, imsi: str) -> bool:
        return imsi in self._subs

    def key_of(self, imsi: str) -> SubscriberKey:
        return self._subs[imsi].key

    def auth_vectors(self, imsi: str, count: int, rng: random.Random) -> list[AuthVector]:
        with self._lock:
            sub = self._subs[imsi]
            return [
                aka_fn.generate_vector(sub.key, sub.sqn.next(), aka_fn.DEFAULT_AMF, rng.randbytes(aka_fn.RAND_BYTES))
                for _ in range(count)
            ]

    def resync(self, imsi: str, auts: bytes, rand: bytes) -> int:
        with self._lock:
            sub = self._subs[imsi]
            return aka_fn.resynchronize(auts, rand, sub.key, sub.sqn)

    def ecdh_material(
        self, imsi: str, cpub: bytes, spub: bytes, nonce_p: bytes, nonce_s: bytes, rng: random.Random
    ) -> EcdhMaterial:
        K = self._subs[imsi].key.K
        rand = rng.randbytes(aka_fn.RAND_BYTES)
        mac_k = mac(hss_mac_key(K), binding_data(cpub, spub, rand, nonce_p, nonce_s))
        return EcdhMaterial(rand, aka_fn.f2(K, rand), aka_fn.f3(K, rand), aka_fn.f4(K, rand), mac_k)

    def sqn_ops(self, imsi: str | None = None) -> int:
        subs = [self._subs[imsi]] if imsi else self._subs.values()
        return sum(s.sqn.ops for s in subs)


@dataclass(frozen=True)
class BackendCall:
    name: str
    request_bytes: int
    response_bytes: int


class AaaServer:
    """EAP server back end: epoch ECDH key pair, pseudonym table, AV cache."""

    def __init__(
        self,
        server_id: bytes,
        ap_ids: tuple[bytes, ...],
        hss: HssHandle,
        rng: random.Random,
        curve: ec.CurveParams = ec.P256,
        av_batch: int = 5,
    ) -> None:
        if av_batch < 1:
            raise ValueError("av_batch must be positive")
        self.server_id = server_id
        self.ap_ids = tuple(ap_ids)
        self.hss = hss
        self.curve = curve
        self.av_batch = av_batch
        self.pseudonyms: dict[bytes, str] = {}
        self._vectors: dict[str, deque[AuthVector]] = {}
        self.epoch = 0
        self.b = 0
        self.spub: tuple[int, int] = curve.G
        self.rotate_epoch(rng)

    def rotate_epoch(self, rng: random.Random) -> None:
        self.epoch += 1
        self.b = self.curve.random_scalar(rng)
        self.spub = ec.public_key(self.b, self.curve)

    def resolve(self, ident: Identity) -> str | None:
        if ident.kind is IdentityKind.PERMANENT:
            imsi = ident.value.decode()
            return imsi if self.hss.knows(imsi) else None
        if ident.kind is IdentityKind.PSEUDONYM:
            return self.pseudonyms.get(ident.value)
        return None

    def take_vector(self, imsi: str, rng: random.Random, log: list[BackendCall]) -> AuthVector:
        queue = self._vectors.setdefault(imsi, deque())
        if not queue:
            batch = self.hss.auth_vectors(imsi, self.av_batch, rng)
            queue.extend(batch)
            size = sum(v.wire_size for v in batch)
            log.append(BackendCall("auth-vectors", BACKEND_OVERHEAD + len(imsi), BACKEND_OVERHEAD + size))
        return queue.popleft()

    def resync(self, imsi: str, auts: bytes, rand: bytes, log: list[BackendCall]) -> int:
        self._vectors.pop(imsi, None)
        log.append(BackendCall("resync", BACKEND_OVERHEAD + len(imsi) + len(auts) + len(rand), BACKEND_OVERHEAD))
        return self.hss.resync(imsi, auts, rand)

    def ecdh_material(
        self, imsi: str, cpub: bytes, spub: bytes, nonce_p: bytes, nonce_s: bytes, rng: random.Random,
        log: list[BackendCall],
    ) -> EcdhMaterial:
        m = self.hss.ecdh_material(imsi, cpub, spub, nonce_p, nonce_s, rng)
        req = BACKEND_OVERHEAD + len(imsi) + len(cpub) + len(spub) + len(nonce_p) + len(nonce_s)
        log.append(BackendCall("ecdh-material", req, BACKEND_OVERHEAD + m.wire_size))
        return m

    def new_pseudonym(self, rng: random.Random) -> bytes:
        return random_token(rng)

    def commit_pseudonym(self, token: bytes, imsi: str) -> None:
        self.pseudonyms[token] = imsi


@dataclass
class Deployment:
    hss: HssHandle
    aaa: AaaServer
    usims: list[Usim]
    ap_id: bytes

    @property
    def usim(self) -> Usim:
        return self.usims[0]


def build_deployment(
    rng: random.Random,
    subscribers: int = 1,
    curve: ec.CurveParams = ec.P256,
    server_id: bytes = b"aaa.home.example",
    ap_id: bytes = b"ap-1",
    av_batch: int = 5,
) -> Deployment:
    hss = HssHandle()
    usims = []
    for _ in range(subscribers):
        imsi = random_imsi(rng)
        while hss.knows(imsi):
            imsi = random_imsi(rng)
        key = SubscriberKey.random(rng)
        hss.provision(imsi, key)
        usims.append(Usim(imsi, key))
    aaa = AaaServer(server_id, (ap_id,), hss, rng, curve=curve, av_batch=av_batch)
    return Deployment(hss, aaa, usims, ap_id)
