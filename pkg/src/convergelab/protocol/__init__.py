"""EAP codec and role state machines for EAP-AKA and its ECDH-enhanced variant."""

from __future__ import annotations

import random

from convergelab.protocol.aka import AkaPeerSession, AkaServerSession, aka_peer_step, aka_server_step
from convergelab.protocol.backend import AaaServer, Deployment, HssHandle, Usim, build_deployment
from convergelab.protocol.codec import CodecError, EapMessage, decode_eap, encode_eap
from convergelab.protocol.ecdh import EcdhPeerSession, EcdhServerSession, ecdh_peer_step, ecdh_server_step
from convergelab.protocol.identity import Identity, IdentityKind
from convergelab.protocol.keys import SessionKeys, derive_session_keys
from convergelab.protocol.longterm import derive_from_longterm
from convergelab.protocol.loopback import Dialogue, run_dialogue
from convergelab.protocol.session import PeerSession, Protocol, ServerSession, State


def new_sessions(
    protocol: Protocol, dep: Deployment, rng: random.Random, usim: Usim | None = None
) -> tuple[PeerSession, ServerSession]:
    usim = usim or dep.usim
    if protocol is Protocol.AKA:
        return AkaPeerSession(usim, rng), AkaServerSession(dep.aaa, rng)
    if protocol is Protocol.ECDH_AKA:
        peer = EcdhPeerSession(usim, rng, {dep.aaa.server_id}, set(dep.aaa.ap_ids), dep.aaa.curve)
        return peer, EcdhServerSession(dep.aaa, rng, dep.ap_id)
    raise ValueError(f"no EAP-AKA family sessions for {protocol}")


__all__ = [
    "AaaServer",
    "AkaPeerSession",
    "AkaServerSession",
    "CodecError",
    "Deployment",
    "Dialogue",
    "EapMessage",
    "EcdhPeerSession",
    "EcdhServerSession",
    "HssHandle",
    "Identity",
    "IdentityKind",
    "PeerSession",
    "Protocol",
    "ServerSession",
    "SessionKeys",
    "State",
    "Usim",
    "aka_peer_step",
    "aka_server_step",
    "build_deployment",
    "decode_eap",
    "derive_from_longterm",
    "derive_session_keys",
    "ecdh_peer_step",
    "ecdh_server_step",
    "encode_eap",
    "new_sessions",
    "run_dialogue",
]
