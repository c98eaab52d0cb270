"""Direct peer-server message pump with an optional in-path interceptor."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from convergelab.protocol.session import PeerSession, ServerSession

TO_PEER = "to_peer"
TO_SERVER = "to_server"

# interceptor(index, direction, packet) -> packet to deliver, or None to drop
Interceptor = Callable[[int, str, bytes], Optional[bytes]]


@dataclass
class Dialogue:
    peer: PeerSession
    server: ServerSession
    messages: list[bytes] = field(default_factory=list)
    directions: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.messages)

    @property
    def both_done(self) -> bool:
        return self.peer.done and self.server.done

    @property
    def keys_agree(self) -> bool:
        return self.both_done and self.peer.keys.msk == self.server.keys.msk


def run_dialogue(
    peer: PeerSession, server: ServerSession, interceptor: Interceptor | None = None, max_messages: int = 32
) -> Dialogue:
    d = Dialogue(peer, server)
    out = server.step(None)
    direction = TO_PEER
    while out is not None and d.count < max_messages:
        if interceptor is not None:
            out = interceptor(d.count, direction, out)
            if out is None:
                break
        d.messages.append(out)
        d.directions.append(direction)
        if direction == TO_PEER:
            out, direction = peer.step(out), TO_SERVER
        else:
            out, direction = server.step(out), TO_PEER
    return d
