import random

import pytest

from convergelab.crypto import ec
from convergelab.protocol import (
    Protocol,
    State,
    build_deployment,
    decode_eap,
    derive_from_longterm,
    new_sessions,
    run_dialogue,
)
from convergelab.protocol import codec
from convergelab.protocol.codec import AT_CPUB, AT_RAND, AT_SERVER_ID, METHOD_AKA, METHOD_ECDH_AKA, pack_field
from convergelab.protocol.ecdh import EcdhPeerSession
from convergelab.protocol.password import PasswordPeerSession, PasswordServerSession

BOTH = [Protocol.AKA, Protocol.ECDH_AKA]
METHOD = {Protocol.AKA: METHOD_AKA, Protocol.ECDH_AKA: METHOD_ECDH_AKA}


def honest(protocol, seed):
    rng = random.Random(seed)
    dep = build_deployment(rng)
    peer, server = new_sessions(protocol, dep, rng)
    return dep, run_dialogue(peer, server)


@pytest.mark.parametrize("protocol", BOTH)
def test_honest_runs(protocol):
    for seed in range(100):
        _, d = honest(protocol, seed)
        assert d.count == 5
        assert d.keys_agree
        assert len(d.peer.keys.msk) == 64


@pytest.mark.parametrize("protocol", BOTH)
def test_keys_only_when_done(protocol):
    rng = random.Random(1)
    dep = build_deployment(rng)
    peer, server = new_sessions(protocol, dep, rng)
    seen_states = []

    def watch(i, direction, pkt):
        seen_states.append((peer.state, server.state))
        assert (peer.keys is not None) == (peer.state is State.DONE)
        assert (server.keys is not None) == (server.state is State.DONE)
        return pkt

    run_dialogue(peer, server, watch)
    for (p0, s0), (p1, s1) in zip(seen_states, seen_states[1:]):
        assert p1 >= p0 and s1 >= s0


@pytest.mark.parametrize("protocol", BOTH)
def test_transcripts_are_append_only_copies(protocol):
    _, d = honest(protocol, 3)
    assert d.peer.transcript == d.messages
    assert d.server.transcript == d.messages


def test_aka_first_identity_is_cleartext_imsi():
    dep, d = honest(Protocol.AKA, 5)
    m2 = decode_eap(d.messages[1])
    assert dep.usim.imsi.encode() in m2.attr(codec.AT_IDENTITY)


def test_ecdh_never_exposes_imsi():
    for seed in range(30):
        dep, d = honest(Protocol.ECDH_AKA, seed)
        assert not any(dep.usim.imsi.encode() in b for b in d.messages)


def test_aka_second_run_uses_pseudonym():
    rng = random.Random(9)
    dep = build_deployment(rng)
    run_dialogue(*new_sessions(Protocol.AKA, dep, rng))
    assert dep.usim.pseudonym is not None
    d = run_dialogue(*new_sessions(Protocol.AKA, dep, rng))
    assert d.keys_agree
    assert not any(dep.usim.imsi.encode() in b for b in d.messages)


def test_ecdh_performs_no_sqn_operations():
    for seed in range(20):
        dep, d = honest(Protocol.ECDH_AKA, seed)
        assert d.keys_agree
        assert dep.usim.sqn_ops == 0 and dep.hss.sqn_ops() == 0


def test_aka_uses_sqn():
    dep, _ = honest(Protocol.AKA, 0)
    assert dep.usim.sqn_ops > 0 and dep.hss.sqn_ops() > 0


def test_aka_resync_path_costs_two_messages():
    rng = random.Random(4)
    dep = build_deployment(rng)
    dep.usim.sqn.last_accepted = 1000
    d = run_dialogue(*new_sessions(Protocol.AKA, dep, rng))
    assert d.count == 7
    assert d.keys_agree
    assert decode_eap(d.messages[3]).subtype == codec.SUB_SYNC_FAILURE


@pytest.mark.parametrize("protocol", BOTH)
def test_tampered_rand_fails(protocol):
    rng = random.Random(12)
    dep = build_deployment(rng)
    peer, server = new_sessions(protocol, dep, rng)

    def flip_rand(i, direction, pkt):
        m = decode_eap(pkt)
        if m.code == codec.REQUEST and m.subtype == codec.SUB_CHALLENGE:
            rand = bytearray(codec.unpack_field(m.attr(AT_RAND)))
            rand[0] ^= 1
            return codec.encode_eap(m.with_attr(AT_RAND, pack_field(bytes(rand))))
        return pkt

    run_dialogue(peer, server, flip_rand)
    assert peer.state is State.FAILED
    assert server.state is State.FAILED


@pytest.mark.parametrize("protocol", BOTH)
def test_single_byte_faults_never_split_keys(protocol):
    _, ref = honest(protocol, 21)
    for i, msg in enumerate(ref.messages):
        for pos in range(len(msg)):
            rng = random.Random(21)
            dep = build_deployment(rng)
            peer, server = new_sessions(protocol, dep, rng)

            def corrupt(k, direction, pkt, i=i, pos=pos):
                if k != i:
                    return pkt
                bad = bytearray(pkt)
                bad[pos] ^= 0xA5
                return bytes(bad)

            d = run_dialogue(peer, server, corrupt)
            # stronger than "no split keys": a corrupted byte never lets both sides finish
            assert not d.both_done, (i, pos)


@pytest.mark.parametrize("protocol", BOTH)
def test_replay_into_fresh_sessions(protocol):
    rng = random.Random(30)
    dep = build_deployment(rng)
    first = run_dialogue(*new_sessions(protocol, dep, rng))
    assert first.keys_agree
    to_peer = [m for m, d in zip(first.messages, first.directions) if d == "to_peer"]
    to_server = [m for m, d in zip(first.messages, first.directions) if d == "to_server"]
    # replay every recorded server message, in order, to a fresh peer
    peer, _ = new_sessions(protocol, dep, rng)
    for m in to_peer:
        peer.step(m)
    assert not peer.done
    # replay every recorded peer message to a fresh server
    _, server = new_sessions(protocol, dep, rng)
    server.step(None)
    for m in to_server:
        server.step(m)
    assert not server.done


def test_aka_replayed_challenge_gets_auts():
    rng = random.Random(31)
    dep = build_deployment(rng)
    first = run_dialogue(*new_sessions(Protocol.AKA, dep, rng))
    peer, _ = new_sessions(Protocol.AKA, dep, rng)
    peer.step(first.messages[0])
    reply = decode_eap(peer.step(first.messages[2]))
    assert reply.subtype in (codec.SUB_SYNC_FAILURE, codec.SUB_CLIENT_ERROR)
    assert not peer.done


def test_ecdh_unknown_server_id():
    rng = random.Random(40)
    dep = build_deployment(rng)
    peer, server = new_sessions(Protocol.ECDH_AKA, dep, rng)
    m1 = decode_eap(server.step(None))
    forged = codec.encode_eap(m1.with_attr(AT_SERVER_ID, pack_field(b"rogue.example")))
    reply = decode_eap(peer.step(forged))
    assert peer.state is State.FAILED
    assert reply.subtype == codec.SUB_CLIENT_ERROR and not reply.attributes


def test_ecdh_substituted_client_key_detected():
    rng = random.Random(41)
    dep = build_deployment(rng)
    peer, server = new_sessions(Protocol.ECDH_AKA, dep, rng)
    curve = dep.aaa.curve
    evil = ec.encode_point(ec.public_key(curve.random_scalar(random.Random(1)), curve), curve)

    def swap(i, direction, pkt):
        m = decode_eap(pkt)
        if m.code == codec.RESPONSE and m.has(AT_CPUB):
            return codec.encode_eap(m.with_attr(AT_CPUB, pack_field(evil)))
        return pkt

    run_dialogue(peer, server, swap)
    # server cannot decrypt the identity under the wrong shared secret
    assert server.state is State.FAILED


def test_ecdh_rejects_off_curve_client_key():
    rng = random.Random(42)
    dep = build_deployment(rng)
    peer, server = new_sessions(Protocol.ECDH_AKA, dep, rng)
    c = dep.aaa.curve
    x = next(x for x in range(1, 100) if ec.sqrt_mod((x**3 + c.a * x + c.b) % c.p, c.p) is None)
    bogus = bytes([2]) + x.to_bytes(32, "big")

    def swap(i, direction, pkt):
        m = decode_eap(pkt)
        if m.code == codec.RESPONSE and m.has(AT_CPUB):
            return codec.encode_eap(m.with_attr(AT_CPUB, pack_field(bogus)))
        return pkt

    run_dialogue(peer, server, swap)
    assert server.state is State.FAILED
    assert "public key" in server.failure_reason or "point" in server.failure_reason


@pytest.mark.parametrize("protocol", BOTH)
def test_longterm_oracle(protocol):
    dep, d = honest(protocol, 50)
    got = derive_from_longterm(dep.usim.key.K, dep.usim.imsi, d.messages, METHOD[protocol])
    if protocol is Protocol.AKA:
        assert got == d.server.keys.msk
    else:
        assert got is None


def test_ecdh_session_keys_change_per_run_with_same_k():
    rng = random.Random(60)
    dep = build_deployment(rng)
    a = run_dialogue(*new_sessions(Protocol.ECDH_AKA, dep, rng))
    b = run_dialogue(*new_sessions(Protocol.ECDH_AKA, dep, rng))
    assert a.keys_agree and b.keys_agree and a.peer.keys.msk != b.peer.keys.msk


def test_password_exchange_three_messages():
    rng = random.Random(70)
    server = PasswordServerSession({b"alice": b"pw"}, rng)
    d = run_dialogue(PasswordPeerSession(b"alice", b"pw", rng), server)
    assert d.count == 3 and d.keys_agree
    bad = run_dialogue(PasswordPeerSession(b"alice", b"nope", rng), PasswordServerSession({b"alice": b"pw"}, rng))
    assert not bad.both_done and bad.server.state is State.FAILED


def test_ecdh_peer_without_ap_check():
    rng = random.Random(71)
    dep = build_deployment(rng)
    peer = EcdhPeerSession(dep.usim, rng, {dep.aaa.server_id})
    _, server = new_sessions(Protocol.ECDH_AKA, dep, rng)
    assert run_dialogue(peer, server).keys_agree


def test_unknown_pseudonym_falls_back_to_permanent_identity():
    rng = random.Random(80)
    dep = build_deployment(rng)
    dep.usim.pseudonym = b"deadbeef"
    d = run_dialogue(*new_sessions(Protocol.AKA, dep, rng))
    assert d.count == 7 and d.keys_agree
    assert dep.usim.imsi.encode() in d.messages[3]
