"""Subscriber identities as carried in AT_IDENTITY."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass


class IdentityKind(enum.Enum):
    PERMANENT = b"0"
    PSEUDONYM = b"2"
    FAST_REAUTH = b"4"


MAX_TOKEN_BYTES = 64


class InvalidIdentity(ValueError):
    pass


@dataclass(frozen=True)
class Identity:
    kind: IdentityKind
    value: bytes

    def __post_init__(self) -> None:
        if self.kind is IdentityKind.PERMANENT:
            if len(self.value) != 15 or not self.value.isdigit():
                raise InvalidIdentity("IMSI must be 15 decimal digits")
        elif not 0 < len(self.value) <= MAX_TOKEN_BYTES:
            raise InvalidIdentity("token identities are 1..64 bytes")

    @classmethod
    def permanent(cls, imsi: str | bytes) -> "Identity":
        return cls(IdentityKind.PERMANENT, imsi.encode() if isinstance(imsi, str) else imsi)

    @classmethod
    def pseudonym(cls, token: bytes) -> "Identity":
        return cls(IdentityKind.PSEUDONYM, token)

    def encode(self) -> bytes:
        return self.kind.value + self.value

    @classmethod
    def decode(cls, data: bytes) -> "Identity":
        if not data:
            raise InvalidIdentity("empty identity")
        try:
            kind = IdentityKind(data[:1])
        except ValueError:
            raise InvalidIdentity(f"unknown identity prefix {data[:1]!r}") from None
        return cls(kind, bytes(data[1:]))


def random_imsi(rng: random.Random, mcc_mnc: str = "00101") -> str:
    return mcc_mnc + "".join(str(rng.randrange(10)) for _ in range(15 - len(mcc_mnc)))


def random_token(rng: random.Random, nbytes: int = 16) -> bytes:
    # hex keeps the token printable and clear of the IMSI digit alphabet prefix
    return rng.randbytes(nbytes).hex().encode()
