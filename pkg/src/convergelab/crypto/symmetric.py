"""Keyed PRF and the primitives built on it.

One PRF (HMAC-SHA-512 over a one-byte domain tag and the data) backs the MAC,
key derivation and the AKA function family; authenticated encryption is
AES-GCM.
"""

from __future__ import annotations

import hashlib
import hmac

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

PRF_MAX_BITS = 512
MAC_BYTES = 16
NONCE_BYTES = 12
GCM_TAG_BYTES = 16

# domain-separation tags; 1-6 are reserved for the AKA functions
TAG_MAC = 0x10
TAG_MASTER_KEY = 0x20
TAG_K_AUT = 0x21
TAG_K_ENCR = 0x22
TAG_MSK = 0x23
TAG_ID_KEY = 0x30
TAG_SERVER_MAC_KEY = 0x31
TAG_HSS_MAC_KEY = 0x32
TAG_PASSWORD = 0x40


class AuthFail(Exception):
    """Ciphertext or tag did not authenticate."""


def prf(key: bytes, tag: int, data: bytes, out_bits: int) -> bytes:
    if not 0 < out_bits <= PRF_MAX_BITS or out_bits % 8:
        raise ValueError(f"out_bits must be a positive multiple of 8 up to {PRF_MAX_BITS}")
    if not 0 <= tag <= 0xFF:
        raise ValueError("tag must fit in one byte")
    digest = hmac.new(key, bytes([tag]) + data, hashlib.sha512).digest()
    return digest[: out_bits // 8]


def kdf(secret: bytes, tag: int, context: bytes = b"", out_bits: int = 128) -> bytes:
    return prf(secret, tag, context, out_bits)


def mac(key: bytes, msg: bytes) -> bytes:
    return prf(key, TAG_MAC, msg, MAC_BYTES * 8)


def verify_mac(key: bytes, msg: bytes, tag: bytes) -> bool:
    return hmac.compare_digest(mac(key, msg), tag)


def sym_encrypt(key: bytes, nonce: bytes, plaintext: bytes, aad: bytes = b"") -> bytes:
    if len(nonce) != NONCE_BYTES:
        raise ValueError("nonce must be 12 bytes")
    return AESGCM(key).encrypt(nonce, plaintext, aad)


def sym_decrypt(key: bytes, nonce: bytes, ciphertext: bytes, aad: bytes = b"") -> bytes:
    if len(nonce) != NONCE_BYTES:
        raise AuthFail("bad nonce length")
    try:
        return AESGCM(key).decrypt(nonce, ciphertext, aad)
    except InvalidTag as exc:
        raise AuthFail("authentication tag mismatch") from exc
