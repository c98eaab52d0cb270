import random

import pytest

from convergelab.crypto import aka
from convergelab.crypto.aka import (
    MacFailure,
    RejectAuts,
    ServerSqn,
    SqnState,
    SubscriberKey,
    SyncFailure,
    generate_vector,
    resynchronize,
    verify_autn,
)

AMF = aka.DEFAULT_AMF


def _fixture(seed=1):
    rng = random.Random(seed)
    return rng, SubscriberKey.random(rng)


def test_vector_layout_and_determinism():
    rng, key = _fixture()
    rand = rng.randbytes(16)
    v1 = generate_vector(key, 42, AMF, rand)
    assert v1 == generate_vector(key, 42, AMF, rand)
    assert len(v1.autn) * 8 == 112 + 16 and len(v1.xres) == 8
    assert len(v1.ck) == len(v1.ik) == 16
    assert v1.xres == aka.f2(key.K, rand)
    assert v1.autn[6:8] == AMF
    assert v1.autn[8:] == aka.f1(key.K, rand, 42, AMF)


def test_consecutive_sqn_change_autn_fields():
    rng, key = _fixture()
    rand = rng.randbytes(16)
    a, b = generate_vector(key, 10, AMF, rand), generate_vector(key, 11, AMF, rand)
    assert a.autn[:6] != b.autn[:6]
    assert a.autn[8:] != b.autn[8:]


def test_verify_roundtrip():
    rng, key = _fixture()
    rand = rng.randbytes(16)
    v = generate_vector(key, 5, AMF, rand)
    state = SqnState(last_accepted=4)
    res = verify_autn(key, rand, v.autn, state)
    assert res.res == v.xres and res.ck == v.ck and res.ik == v.ik
    assert state.last_accepted == 5


def test_replay_gives_sync_failure():
    rng, key = _fixture()
    rand = rng.randbytes(16)
    v = generate_vector(key, 1, AMF, rand)
    state = SqnState()
    verify_autn(key, rand, v.autn, state)
    with pytest.raises(SyncFailure) as info:
        verify_autn(key, rand, v.autn, state)
    assert len(info.value.auts) == 14


def test_corrupted_mac_bit():
    rng, key = _fixture()
    rand = rng.randbytes(16)
    v = generate_vector(key, 1, AMF, rand)
    for bit in range(64):
        bad = bytearray(v.autn)
        bad[8 + bit // 8] ^= 1 << (bit % 8)
        with pytest.raises(MacFailure):
            verify_autn(key, rand, bytes(bad), SqnState())


def test_window_upper_bound():
    rng, key = _fixture()
    rand = rng.randbytes(16)
    state = SqnState(last_accepted=0, delta_max=10)
    with pytest.raises(SyncFailure):
        verify_autn(key, rand, generate_vector(key, 11, AMF, rand).autn, state)
    verify_autn(key, rand, generate_vector(key, 10, AMF, rand).autn, state)


def test_resync_end_to_end():
    rng, key = _fixture(4)
    server = ServerSqn(value=3)
    usim = SqnState(last_accepted=500)
    rand = rng.randbytes(16)
    v = generate_vector(key, server.next(), AMF, rand)
    with pytest.raises(SyncFailure) as info:
        verify_autn(key, rand, v.autn, usim)
    assert resynchronize(info.value.auts, rand, key, server) == 500
    rand2 = rng.randbytes(16)
    v2 = generate_vector(key, server.next(), AMF, rand2)
    assert verify_autn(key, rand2, v2.autn, usim).sqn == 501


def test_random_auts_rejected():
    rng, key = _fixture(5)
    rand = rng.randbytes(16)
    for _ in range(100):
        with pytest.raises(RejectAuts):
            resynchronize(rng.randbytes(14), rand, key, ServerSqn())


def test_auts_against_other_rand_rejected():
    rng, key = _fixture(6)
    rand = rng.randbytes(16)
    v = generate_vector(key, 1, AMF, rand)
    with pytest.raises(SyncFailure) as info:
        verify_autn(key, rand, v.autn, SqnState(last_accepted=9))
    for _ in range(20):
        with pytest.raises(RejectAuts):
            resynchronize(info.value.auts, rng.randbytes(16), key, ServerSqn())


def test_verify_after_generate_random_inputs():
    rng = random.Random(77)
    for _ in range(100):
        key = SubscriberKey.random(rng)
        sqn = rng.randrange(1, 1 << 40)
        rand = rng.randbytes(16)
        v = generate_vector(key, sqn, AMF, rand)
        r = verify_autn(key, rand, v.autn, SqnState(last_accepted=sqn - 1))
        assert (r.ck, r.ik, r.res) == (v.ck, v.ik, v.xres)


def test_subscriber_key_length():
    with pytest.raises(ValueError):
        SubscriberKey(b"short")
