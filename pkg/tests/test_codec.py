import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convergelab.protocol import codec
from convergelab.protocol.codec import CodecError, EapMessage, decode_eap, encode_eap, pack_field, unpack_field


def random_message(rng: random.Random) -> EapMessage:
    code = rng.choice(codec.CODES)
    ident = rng.randrange(256)
    if code in (codec.SUCCESS, codec.FAILURE):
        return EapMessage(code, ident)
    ids = rng.sample(range(256), rng.randrange(0, 8))
    attrs = tuple((aid, rng.randbytes(4 * rng.randrange(0, 40) + 2)) for aid in ids)
    return EapMessage(code, ident, rng.choice([codec.METHOD_AKA, codec.METHOD_ECDH_AKA]), rng.randrange(256), attrs)


def test_success_encoding():
    assert encode_eap(codec.success(7)) == bytes.fromhex("03070004")


def test_failure_encoding():
    assert encode_eap(codec.failure(0xFE)) == bytes.fromhex("04fe0004")


def test_roundtrip_500_random_messages():
    rng = random.Random(2024)
    for _ in range(500):
        m = random_message(rng)
        b = encode_eap(m)
        assert decode_eap(b) == m
        assert len(b) == int.from_bytes(b[2:4], "big")


def test_request_header_layout():
    m = EapMessage(codec.REQUEST, 9, codec.METHOD_ECDH_AKA, codec.SUB_IDENTITY, ((codec.AT_SERVER_ID, pack_field(b"aaa")),))
    b = encode_eap(m)
    assert b[:8] == bytes([1, 9, 0, 16, 254, 5, 0, 0])
    assert b[8:10] == bytes([132, 2])
    assert b[10:] == b"\x00\x03aaa\x00"


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_truncated_short_inputs(n):
    with pytest.raises(CodecError) as info:
        decode_eap(bytes([1, 1, 0, 8])[:n])
    assert info.value.reason == "Truncated"


def test_declared_length_longer_than_buffer():
    with pytest.raises(CodecError) as info:
        decode_eap(bytes([2, 1, 0, 20, 23, 1, 0, 0]))
    assert info.value.reason == "Truncated"


def test_unknown_code():
    with pytest.raises(CodecError) as info:
        decode_eap(bytes([9, 1, 0, 4]))
    assert info.value.reason == "UnknownCode"


def test_duplicate_attribute_rejected_both_ways():
    m = EapMessage(codec.REQUEST, 1, 23, 1, ((1, bytes(2)), (1, bytes(2))))
    with pytest.raises(CodecError) as info:
        encode_eap(m)
    assert info.value.reason == "DuplicateAttr"
    raw = bytes([1, 1, 0, 16, 23, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0])
    with pytest.raises(CodecError) as info:
        decode_eap(raw)
    assert info.value.reason == "DuplicateAttr"


def test_misaligned_value_rejected():
    with pytest.raises(CodecError) as info:
        encode_eap(EapMessage(codec.REQUEST, 1, 23, 1, ((1, b"abc"),)))
    assert info.value.reason == "BadLength"


def test_zero_length_attribute_rejected():
    with pytest.raises(CodecError) as info:
        decode_eap(bytes([1, 1, 0, 12, 23, 1, 0, 0, 1, 0, 0, 0]))
    assert info.value.reason == "BadLength"


def test_success_with_payload_rejected():
    with pytest.raises(CodecError):
        decode_eap(bytes([3, 1, 0, 5, 0]))


def test_nonzero_reserved_rejected():
    with pytest.raises(CodecError):
        decode_eap(bytes([1, 1, 0, 8, 23, 1, 0, 1]))


@settings(max_examples=300)
@given(st.binary(max_size=300))
def test_decode_never_crashes(data):
    try:
        m = decode_eap(data)
    except CodecError:
        return
    assert encode_eap(m) == data


@settings(max_examples=200)
@given(st.binary(max_size=400))
def test_field_roundtrip(data):
    v = pack_field(data)
    assert len(v) % 4 == 2
    assert unpack_field(v) == data


def test_field_rejects_nonzero_padding():
    v = bytearray(pack_field(b"a"))
    v[-1] = 1
    with pytest.raises(CodecError):
        unpack_field(bytes(v))
