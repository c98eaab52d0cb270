"""Session key hierarchy."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from convergelab.crypto.symmetric import TAG_K_AUT, TAG_K_ENCR, TAG_MASTER_KEY, TAG_MSK, prf


@dataclass(frozen=True)
class SessionKeys:
    mk: bytes
    k_aut: bytes
    k_encr: bytes
    msk: bytes


@dataclass(frozen=True)
class AkaKeyInputs:
    identity: bytes
    ck: bytes
    ik: bytes


@dataclass(frozen=True)
class EcdhKeyInputs:
    shared: bytes
    ck: bytes
    ik: bytes
    nonce_p: bytes
    nonce_s: bytes


def _expand(mk: bytes) -> SessionKeys:
    return SessionKeys(
        mk=mk,
        k_aut=prf(mk, TAG_K_AUT, b"", 128),
        k_encr=prf(mk, TAG_K_ENCR, b"", 128),
        msk=prf(mk, TAG_MSK, b"", 512),
    )


def derive_session_keys(inputs: AkaKeyInputs | EcdhKeyInputs) -> SessionKeys:
    if isinstance(inputs, AkaKeyInputs):
        return _expand(prf(inputs.ik + inputs.ck, TAG_MASTER_KEY, inputs.identity, 256))
    if isinstance(inputs, EcdhKeyInputs):
        secret = inputs.shared + inputs.ck + inputs.ik
        return _expand(prf(secret, TAG_MASTER_KEY, inputs.nonce_p + inputs.nonce_s, 256))
    raise TypeError(f"unsupported key inputs {type(inputs).__name__}")


def transcript_hash(parts: list[bytes]) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(len(p).to_bytes(2, "big"))
        h.update(p)
    return h.digest()
