"""Standalone user-id/password exchange used by open-coupled WLAN access.

Three messages: Request/Challenge (server nonce), Response (user id and a
password-keyed MAC over nonce and id), Success.
"""

from __future__ import annotations

import random

from convergelab.crypto.symmetric import TAG_MSK, TAG_PASSWORD, mac, prf, verify_mac
from convergelab.protocol import codec
from convergelab.protocol.codec import AT_IDENTITY, AT_MAC, AT_NONCE_S, METHOD_MD5, SUB_CHALLENGE, pack_field
from convergelab.protocol.keys import SessionKeys
from convergelab.protocol.session import PeerSession, Protocol, ServerSession, State, field_of, require

NONCE_BYTES = 16


def password_key(password: bytes) -> bytes:
    return prf(password, TAG_PASSWORD, b"", 128)


def _keys(pw_key: bytes, nonce: bytes) -> SessionKeys:
    msk = prf(pw_key, TAG_MSK, nonce, 512)
    return SessionKeys(mk=pw_key, k_aut=msk[:16], k_encr=msk[16:32], msk=msk)


class PasswordServerSession(ServerSession):
    protocol = Protocol.PASSWORD

    def __init__(self, accounts: dict[bytes, bytes], rng: random.Random) -> None:
        super().__init__(rng)
        self.accounts = accounts

    def _handle(self, incoming: bytes | None) -> bytes | None:
        if self.state is State.IDLE:
            require(incoming is None, "server not started")
            self.nonce = self.rng.randbytes(NONCE_BYTES)
            self._enter(State.CHALLENGE_PROCESSED)
            return self._emit(self._request(METHOD_MD5, SUB_CHALLENGE, [(AT_NONCE_S, pack_field(self.nonce))]))
        m = self._expect_response(incoming, METHOD_MD5)
        user = field_of(m, AT_IDENTITY)
        require(user in self.accounts, "unknown user")
        key = password_key(self.accounts[user])
        require(verify_mac(key, self.nonce + user, field_of(m, AT_MAC)), "password check failed")
        self._pending_keys = _keys(key, self.nonce)
        return self._succeed()


class PasswordPeerSession(PeerSession):
    protocol = Protocol.PASSWORD
    method = METHOD_MD5

    def __init__(self, user: bytes, password: bytes, rng: random.Random) -> None:
        super().__init__(rng)
        self.user = user
        self.key = password_key(password)

    def _handle(self, incoming: bytes | None) -> bytes | None:
        m = self._expect_request(incoming)
        if m.code == codec.SUCCESS:
            require(self.state is State.CHALLENGE_PROCESSED, "early Success")
            require(m.identifier == self.last_id, "Success identifier mismatch")
            self._enter(State.DONE)
            return None
        require(self.state is State.IDLE and m.subtype == SUB_CHALLENGE, "unexpected request")
        nonce = field_of(m, AT_NONCE_S, NONCE_BYTES)
        self._pending_keys = _keys(self.key, nonce)
        self._enter(State.CHALLENGE_PROCESSED)
        return self._emit(
            self._respond(
                SUB_CHALLENGE,
                [(AT_IDENTITY, pack_field(self.user)), (AT_MAC, pack_field(mac(self.key, nonce + self.user)))],
            )
        )
