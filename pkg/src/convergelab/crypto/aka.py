"""UMTS AKA function family, authentication vectors and SQN handling.

f1-f5 and f1* are PRF truncations with domain tags 1-6. They stand in for
MILENAGE and are not interoperable with it.
"""

from __future__ import annotations

import hmac
import random
from dataclasses import dataclass

from convergelab.crypto.symmetric import prf

SQN_BITS = 48
SQN_MAX = (1 << SQN_BITS) - 1
DEFAULT_DELTA = 1 << 28
DEFAULT_AMF = b"\x80\x00"
AUTN_BYTES = 16
AUTS_BYTES = 14
RAND_BYTES = 16

TAG_F1, TAG_F2, TAG_F3, TAG_F4, TAG_F5, TAG_F1_STAR = 1, 2, 3, 4, 5, 6


class MacFailure(Exception):
    """AUTN carried a MAC-A that does not verify."""


class SyncFailure(Exception):
    """MAC-A verified but SQN is outside the acceptance window."""

    def __init__(self, auts: bytes):
        super().__init__("sequence number out of window")
        self.auts = auts


class RejectAuts(Exception):
    pass


@dataclass(frozen=True)
class SubscriberKey:
    K: bytes

    def __post_init__(self) -> None:
        if len(self.K) != 16:
            raise ValueError("subscriber key must be exactly 128 bits")

    @classmethod
    def random(cls, rng: random.Random) -> "SubscriberKey":
        return cls(rng.randbytes(16))


@dataclass(frozen=True)
class AuthVector:
    rand: bytes
    xres: bytes
    ck: bytes
    ik: bytes
    autn: bytes

    @property
    def wire_size(self) -> int:
        return len(self.rand) + len(self.xres) + len(self.ck) + len(self.ik) + len(self.autn)


@dataclass
class SqnState:
    """USIM-side counter; ``ops`` counts every read/write for instrumentation."""

    last_accepted: int = 0
    delta_max: int = DEFAULT_DELTA
    ops: int = 0

    def in_window(self, sqn: int) -> bool:
        self.ops += 1
        return self.last_accepted < sqn <= self.last_accepted + self.delta_max

    def accept(self, sqn: int) -> None:
        self.ops += 1
        if sqn < self.last_accepted:
            raise ValueError("SQN must not decrease")
        self.last_accepted = sqn

    def current(self) -> int:
        self.ops += 1
        return self.last_accepted


@dataclass
class ServerSqn:
    """HSS-side counter for one subscriber: the SQN of the last issued vector."""

    value: int = 0
    ops: int = 0

    def next(self) -> int:
        self.ops += 1
        self.value = (self.value + 1) & SQN_MAX
        return self.value

    def set(self, value: int) -> None:
        self.ops += 1
        self.value = value


@dataclass(frozen=True)
class AkaResult:
    res: bytes
    ck: bytes
    ik: bytes
    sqn: int


def _sqn_bytes(sqn: int) -> bytes:
    return (sqn & SQN_MAX).to_bytes(6, "big")


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def f1(K: bytes, rand: bytes, sqn: int, amf: bytes) -> bytes:
    return prf(K, TAG_F1, rand + _sqn_bytes(sqn) + amf, 64)


def f1_star(K: bytes, rand: bytes, sqn: int, amf: bytes = b"\x00\x00") -> bytes:
    return prf(K, TAG_F1_STAR, rand + _sqn_bytes(sqn) + amf, 64)


def f2(K: bytes, rand: bytes) -> bytes:
    return prf(K, TAG_F2, rand, 64)


def f3(K: bytes, rand: bytes) -> bytes:
    return prf(K, TAG_F3, rand, 128)


def f4(K: bytes, rand: bytes) -> bytes:
    return prf(K, TAG_F4, rand, 128)


def f5(K: bytes, rand: bytes) -> bytes:
    return prf(K, TAG_F5, rand, 48)


def generate_vector(key: SubscriberKey, sqn: int, amf: bytes, rand: bytes) -> AuthVector:
    if len(rand) != RAND_BYTES or len(amf) != 2:
        raise ValueError("RAND must be 128 bits and AMF 16 bits")
    K = key.K
    ak = f5(K, rand)
    autn = _xor(_sqn_bytes(sqn), ak) + amf + f1(K, rand, sqn, amf)
    return AuthVector(rand=rand, xres=f2(K, rand), ck=f3(K, rand), ik=f4(K, rand), autn=autn)


def verify_autn(key: SubscriberKey, rand: bytes, autn: bytes, state: SqnState) -> AkaResult:
    """USIM-side check of a challenge.

    Raises MacFailure or SyncFailure (carrying AUTS); on success advances
    ``state`` to the challenge's SQN.
    """
    if len(autn) != AUTN_BYTES or len(rand) != RAND_BYTES:
        raise MacFailure("malformed AUTN or RAND")
    K = key.K
    ak = f5(K, rand)
    sqn = int.from_bytes(_xor(autn[:6], ak), "big")
    amf = autn[6:8]
    if not hmac.compare_digest(f1(K, rand, sqn, amf), autn[8:]):
        raise MacFailure("MAC-A mismatch")
    if not state.in_window(sqn):
        sqn_ms = state.current()
        auts = _xor(_sqn_bytes(sqn_ms), ak) + f1_star(K, rand, sqn_ms)
        raise SyncFailure(auts)
    state.accept(sqn)
    return AkaResult(res=f2(K, rand), ck=f3(K, rand), ik=f4(K, rand), sqn=sqn)


def resynchronize(auts: bytes, rand: bytes, key: SubscriberKey, server_sqn: ServerSqn) -> int:
    """Validate AUTS and move the server counter to the USIM's SQN."""
    if len(auts) != AUTS_BYTES or len(rand) != RAND_BYTES:
        raise RejectAuts("malformed AUTS")
    K = key.K
    sqn_ms = int.from_bytes(_xor(auts[:6], f5(K, rand)), "big")
    if not hmac.compare_digest(f1_star(K, rand, sqn_ms), auts[6:]):
        raise RejectAuts("AUTS MAC mismatch")
    server_sqn.set(sqn_ms)
    return sqn_ms
