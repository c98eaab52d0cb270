"""Offline key recovery from the long-term subscriber key.

Models an adversary who recorded a session and later obtains K. A candidate
key set counts as recovered only if it verifies the peer's final AT_MAC, so
the oracle cannot report a false positive.
"""

from __future__ import annotations

from convergelab.crypto import aka as aka_fn
from convergelab.crypto import ec
from convergelab.protocol import codec
from convergelab.protocol.aka import aka_keys, check_mac
from convergelab.protocol.codec import (
    AT_CPUB,
    AT_NONCE_P,
    AT_NONCE_S,
    AT_RAND,
    AT_RES,
    AT_SPUB,
    METHOD_AKA,
    METHOD_ECDH_AKA,
    SUB_CHALLENGE,
    SUB_IDENTITY,
    CodecError,
    EapMessage,
)
from convergelab.protocol.ecdh import check_transcript_mac, ecdh_keys
from convergelab.protocol.identity import Identity


def _decoded(transcript: list[bytes]) -> list[EapMessage | None]:
    out = []
    for b in transcript:
        try:
            out.append(codec.decode_eap(b))
        except CodecError:
            out.append(None)
    return out


def _field(m: EapMessage, attr_id: int) -> bytes | None:
    try:
        return codec.unpack_field(m.attr(attr_id))
    except CodecError:
        return None


def _recover_aka(K: bytes, imsi: str, msgs: list[EapMessage | None]) -> bytes | None:
    challenges = [m for m in msgs if m and m.code == codec.REQUEST and m.method == METHOD_AKA and m.subtype == SUB_CHALLENGE]
    answers = [m for m in msgs if m and m.code == codec.RESPONSE and m.method == METHOD_AKA and m.has(AT_RES)]
    for ch in challenges:
        rand = _field(ch, AT_RAND)
        if rand is None:
            continue
        keys = aka_keys(Identity.permanent(imsi), aka_fn.f3(K, rand), aka_fn.f4(K, rand))
        if any(check_mac(a, keys.k_aut) for a in answers):
            return keys.msk
    return None


def _ecdh_candidates(m1: EapMessage, m2: EapMessage, curve: ec.CurveParams) -> list[bytes]:
    # Without a or b the adversary only has public values to try.
    cands = [bytes(curve.byte_len)]
    for raw in (_field(m1, AT_SPUB), _field(m2, AT_CPUB)):
        if raw:
            try:
                cands.append(ec.decode_point(raw, curve)[0].to_bytes(curve.byte_len, "big"))
            except ec.PointNotOnCurve:
                pass
    return cands


def _recover_ecdh(K: bytes, transcript: list[bytes], msgs: list[EapMessage | None], curve: ec.CurveParams) -> bytes | None:
    idx = {}
    for i, m in enumerate(msgs):
        if m is None or m.method != METHOD_ECDH_AKA:
            continue
        if m.code == codec.REQUEST and m.subtype == SUB_IDENTITY:
            idx.setdefault("m1", i)
        elif m.code == codec.RESPONSE and m.subtype == SUB_IDENTITY:
            idx.setdefault("m2", i)
        elif m.code == codec.REQUEST and m.subtype == SUB_CHALLENGE:
            idx.setdefault("m3", i)
        elif m.code == codec.RESPONSE and m.subtype == SUB_CHALLENGE:
            idx.setdefault("m4", i)
    if len(idx) < 4:
        return None
    m1, m2, m3, m4 = (msgs[idx[k]] for k in ("m1", "m2", "m3", "m4"))
    rand, nonce_p, nonce_s = _field(m3, AT_RAND), _field(m2, AT_NONCE_P), _field(m3, AT_NONCE_S)
    if None in (rand, nonce_p, nonce_s):
        return None
    ck, ik = aka_fn.f3(K, rand), aka_fn.f4(K, rand)
    earlier = [transcript[idx[k]] for k in ("m1", "m2", "m3")]
    for shared in _ecdh_candidates(m1, m2, curve):
        keys = ecdh_keys(shared, ck, ik, nonce_p, nonce_s)
        if check_transcript_mac(keys.k_aut, earlier, m4):
            return keys.msk
    return None


def derive_from_longterm(
    K: bytes, imsi: str, transcript: list[bytes], method: int, curve: ec.CurveParams = ec.P256
) -> bytes | None:
    """Return the session MSK if K plus the recorded transcript suffice, else None."""
    msgs = _decoded(transcript)
    if method == METHOD_AKA:
        return _recover_aka(K, imsi, msgs)
    if method == METHOD_ECDH_AKA:
        return _recover_ecdh(K, transcript, msgs, curve)
    raise ValueError(f"unsupported method {method}")
