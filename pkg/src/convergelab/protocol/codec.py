"""EAP packet codec.

Wire layout::

    code(1) | identifier(1) | length(2, BE) | method(1) | subtype(1) | reserved(2) | attrs*
    attr := attr_id(1) | attr_len(1, 4-byte words incl. header) | value

Attribute values are kept word aligned, so ``len(value) % 4 == 2`` for every
attribute on the wire and decode is exact. Callers that carry arbitrary data
use :func:`pack_field` / :func:`unpack_field`, which prepend a 2-byte length
and zero-pad.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

REQUEST, RESPONSE, SUCCESS, FAILURE = 1, 2, 3, 4
CODES = (REQUEST, RESPONSE, SUCCESS, FAILURE)

METHOD_MD5 = 4
METHOD_AKA = 23
METHOD_ECDH_AKA = 254

SUB_CHALLENGE = 1
SUB_AUTH_REJECT = 2
SUB_SYNC_FAILURE = 4
SUB_IDENTITY = 5
SUB_CLIENT_ERROR = 14

AT_RAND = 1
AT_AUTN = 2
AT_RES = 3
AT_AUTS = 4
AT_PERMANENT_ID_REQ = 10
AT_MAC = 11
AT_ENCR_DATA = 12
AT_IDENTITY = 14
AT_NONCE_P = 20
AT_NONCE_S = 21
AT_CPUB = 130
AT_SPUB = 131
AT_SERVER_ID = 132
AT_AP_ID = 133
AT_MAC_K = 134

HEADER_BYTES = 4
METHOD_HEADER_BYTES = 8
MAX_PACKET = 0xFFFF
MAX_ATTR_VALUE = 255 * 4 - 2


class CodecError(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class EapMessage:
    code: int
    identifier: int
    method: int | None = None
    subtype: int | None = None
    attributes: tuple[tuple[int, bytes], ...] = field(default_factory=tuple)

    def attr(self, attr_id: int) -> bytes | None:
        for aid, value in self.attributes:
            if aid == attr_id:
                return value
        return None

    def has(self, attr_id: int) -> bool:
        return any(aid == attr_id for aid, _ in self.attributes)

    def with_attr(self, attr_id: int, value: bytes) -> "EapMessage":
        attrs = tuple((aid, value if aid == attr_id else v) for aid, v in self.attributes)
        return EapMessage(self.code, self.identifier, self.method, self.subtype, attrs)


def success(identifier: int) -> EapMessage:
    return EapMessage(SUCCESS, identifier)


def failure(identifier: int) -> EapMessage:
    return EapMessage(FAILURE, identifier)


def encode_eap(m: EapMessage) -> bytes:
    if m.code not in CODES:
        raise CodecError("UnknownCode", str(m.code))
    if not 0 <= m.identifier <= 0xFF:
        raise CodecError("BadLength", "identifier out of range")
    if m.code in (SUCCESS, FAILURE):
        if m.method is not None or m.subtype is not None or m.attributes:
            raise CodecError("BadLength", "Success/Failure carry no payload")
        return struct.pack(">BBH", m.code, m.identifier, HEADER_BYTES)
    if m.method is None or m.subtype is None:
        raise CodecError("BadLength", "Request/Response need method and subtype")
    body = bytearray()
    seen = set()
    for aid, value in m.attributes:
        if aid in seen:
            raise CodecError("DuplicateAttr", str(aid))
        seen.add(aid)
        if len(value) % 4 != 2 or len(value) > MAX_ATTR_VALUE or not 0 <= aid <= 0xFF:
            raise CodecError("BadLength", f"attribute {aid} value of {len(value)} bytes")
        body += bytes([aid, (len(value) + 2) // 4]) + value
    total = METHOD_HEADER_BYTES + len(body)
    if total > MAX_PACKET:
        raise CodecError("BadLength", "packet exceeds 65535 bytes")
    return struct.pack(">BBHBBH", m.code, m.identifier, total, m.method, m.subtype, 0) + bytes(body)


def decode_eap(b: bytes) -> EapMessage:
    if len(b) < HEADER_BYTES:
        raise CodecError("Truncated", f"{len(b)} bytes")
    code, ident, length = struct.unpack_from(">BBH", b)
    if code not in CODES:
        raise CodecError("UnknownCode", str(code))
    if length > len(b):
        raise CodecError("Truncated", f"header says {length}, have {len(b)}")
    if length != len(b):
        raise CodecError("BadLength", f"header says {length}, have {len(b)}")
    if code in (SUCCESS, FAILURE):
        if length != HEADER_BYTES:
            raise CodecError("BadLength", "Success/Failure must be 4 bytes")
        return EapMessage(code, ident)
    if length < METHOD_HEADER_BYTES:
        raise CodecError("Truncated", "missing method header")
    method, subtype, reserved = struct.unpack_from(">BBH", b, HEADER_BYTES)
    if reserved:
        raise CodecError("BadLength", "reserved field not zero")
    attrs = []
    seen = set()
    pos = METHOD_HEADER_BYTES
    while pos < length:
        if pos + 2 > length:
            raise CodecError("Truncated", "attribute header")
        aid, words = b[pos], b[pos + 1]
        if words == 0:
            raise CodecError("BadLength", f"attribute {aid} has zero length")
        end = pos + 4 * words
        if end > length:
            raise CodecError("Truncated", f"attribute {aid}")
        if aid in seen:
            raise CodecError("DuplicateAttr", str(aid))
        seen.add(aid)
        attrs.append((aid, bytes(b[pos + 2 : end])))
        pos = end
    return EapMessage(code, ident, method, subtype, tuple(attrs))


def pack_field(data: bytes) -> bytes:
    """Length-prefix and zero-pad ``data`` into a word-aligned attribute value."""
    if len(data) > MAX_ATTR_VALUE - 2:
        raise CodecError("BadLength", f"field of {len(data)} bytes")
    raw = struct.pack(">H", len(data)) + data
    return raw + bytes((2 - len(raw)) % 4)


def unpack_field(value: bytes | None) -> bytes:
    if value is None or len(value) < 2:
        raise CodecError("Truncated", "field")
    (n,) = struct.unpack_from(">H", value)
    if 2 + n > len(value):
        raise CodecError("Truncated", "field body")
    pad = value[2 + n :]
    if len(pad) != (-n) % 4 or any(pad):
        raise CodecError("BadLength", "field padding")
    return bytes(value[2 : 2 + n])


def zero_attr(m: EapMessage, attr_id: int) -> bytes:
    """Encoding of ``m`` with the value of ``attr_id`` replaced by zeros."""
    value = m.attr(attr_id)
    if value is None:
        raise CodecError("BadLength", f"attribute {attr_id} missing")
    return encode_eap(m.with_attr(attr_id, bytes(len(value))))
