"""Shared session plumbing for the EAP state machines.

Sessions are single-owner objects driven by ``step(incoming) -> outgoing``.
Both sides take and return encoded packets; ``None`` as input starts a server
session, ``None`` as output means nothing to send.
"""

from __future__ import annotations

import enum
import random

from convergelab.protocol import codec
from convergelab.protocol.codec import CodecError, EapMessage
from convergelab.protocol.keys import SessionKeys


class Protocol(enum.Enum):
    AKA = "aka"
    ECDH_AKA = "ecdh-aka"
    PASSWORD = "password"

    @classmethod
    def parse(cls, text: str) -> "Protocol":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown protocol {text!r}") from None


class State(enum.IntEnum):
    IDLE = 0
    IDENTITY_SENT = 1
    CHALLENGE_PROCESSED = 2
    DONE = 3
    FAILED = 4


class IllegalTransition(RuntimeError):
    pass


class ProtocolViolation(Exception):
    """Internal signal: the incoming packet is unacceptable, fail the session."""


class Session:
    protocol: Protocol
    role = "?"

    def __init__(self, rng: random.Random) -> None:
        self.rng = rng
        self.state = State.IDLE
        self.transcript: list[bytes] = []
        self.keys: SessionKeys | None = None
        self.failure_reason: str | None = None
        self._pending_keys: SessionKeys | None = None

    @property
    def terminal(self) -> bool:
        return self.state in (State.DONE, State.FAILED)

    @property
    def done(self) -> bool:
        return self.state is State.DONE

    def _enter(self, st: State) -> None:
        if st < self.state:
            raise IllegalTransition(f"{self.state.name} -> {st.name}")
        self.state = st
        if st is State.DONE:
            self.keys = self._pending_keys

    def _fail(self, reason: str) -> None:
        self.failure_reason = reason
        self._pending_keys = None
        self._enter(State.FAILED)

    def _emit(self, m: EapMessage) -> bytes:
        b = codec.encode_eap(m)
        self.transcript.append(b)
        return b

    def _accept(self, data: bytes) -> EapMessage:
        self.transcript.append(bytes(data))
        try:
            return codec.decode_eap(data)
        except CodecError as exc:
            raise ProtocolViolation(f"decode: {exc}") from None

    def step(self, incoming: bytes | None) -> bytes | None:
        if self.terminal:
            return None
        try:
            return self._handle(incoming)
        except ProtocolViolation as exc:
            self._fail(str(exc))
            return self._violation_reply()

    def _handle(self, incoming: bytes | None) -> bytes | None:
        raise NotImplementedError

    def _violation_reply(self) -> bytes | None:
        return None


class ServerSession(Session):
    role = "server"

    def __init__(self, rng: random.Random) -> None:
        super().__init__(rng)
        self.ident = rng.randrange(256)

    def _request(self, method: int, subtype: int, attrs: list[tuple[int, bytes]]) -> EapMessage:
        self.ident = (self.ident + 1) % 256
        return EapMessage(codec.REQUEST, self.ident, method, subtype, tuple(attrs))

    def _expect_response(self, incoming: bytes | None, method: int) -> EapMessage:
        require(incoming is not None, "server already started")
        m = self._accept(incoming)
        require(m.code == codec.RESPONSE, "expected a Response")
        require(m.identifier == self.ident, "identifier mismatch")
        require(m.method == method, "method mismatch")
        return m

    def _succeed(self) -> bytes:
        self._enter(State.DONE)
        return self._emit(codec.success(self.ident))

    def _violation_reply(self) -> bytes | None:
        return self._emit(codec.failure(self.ident))


class PeerSession(Session):
    role = "peer"
    method = 0

    def __init__(self, rng: random.Random) -> None:
        super().__init__(rng)
        self.last_id: int | None = None

    def _expect_request(self, incoming: bytes | None) -> EapMessage:
        require(incoming is not None, "peer needs an incoming packet")
        m = self._accept(incoming)
        if m.code == codec.FAILURE:
            raise ProtocolViolation("server sent Failure")
        if m.code == codec.SUCCESS:
            return m
        require(m.code == codec.REQUEST, "expected a Request")
        require(m.method == self.method, "method mismatch")
        require(self.last_id is None or m.identifier != self.last_id, "identifier reused")
        self.last_id = m.identifier
        return m

    def _respond(self, subtype: int, attrs: list[tuple[int, bytes]]) -> EapMessage:
        return EapMessage(codec.RESPONSE, self.last_id, self.method, subtype, tuple(attrs))

    def _reject(self, subtype: int, reason: str) -> bytes:
        self._fail(reason)
        return self._emit(self._respond(subtype, []))

    def _violation_reply(self) -> bytes | None:
        if self.last_id is None or self.failure_reason == "server sent Failure":
            return None
        return self._emit(self._respond(codec.SUB_CLIENT_ERROR, []))


def require(cond: bool, reason: str) -> None:
    if not cond:
        raise ProtocolViolation(reason)


def field_of(m: EapMessage, attr_id: int, size: int | None = None) -> bytes:
    try:
        value = codec.unpack_field(m.attr(attr_id))
    except CodecError as exc:
        raise ProtocolViolation(f"attribute {attr_id}: {exc}") from None
    if size is not None and len(value) != size:
        raise ProtocolViolation(f"attribute {attr_id} has {len(value)} bytes, want {size}")
    return value
