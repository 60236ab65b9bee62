"""Request / response / key-confirm exchange on top of :mod:`.flows`.

The initiator's request carries nonce_s, the response carries nonce_r and
echoes nonce_s as the first 32 payload bytes, and the initiator closes with
a key-confirm frame whose nonce field repeats nonce_r.  Both sides derive
the session key over the request timestamp.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import BadAuthenticator, ConfirmMismatch
from .flows import (
    Endpoint,
    ReplayCache,
    SessionKey,
    VerifiedMessage,
    check_confirm,
    derive_session_key,
    key_confirm,
    make_request,
    shared_secret,
    verify_request,
)
from .frame import Channel, MessageFrame, MsgType

NONCE_LEN = 32


@dataclass
class Initiator:
    local: Endpoint
    channel: Channel
    peer_id: bytes
    T: int = 0
    nonce_s: bytes = b""
    session: SessionKey | None = None

    def request(self, payload: bytes, T: int, nonce: bytes) -> MessageFrame:
        self.T, self.nonce_s = T, nonce
        return make_request(self.local, self.channel, payload, T, nonce, self.peer_id)

    def matches(self, verified: VerifiedMessage) -> bool:
        return verified.msg_type == MsgType.RESPONSE and verified.payload[:NONCE_LEN] == self.nonce_s

    def on_response(self, verified: VerifiedMessage, T: int) -> MessageFrame:
        """Derive the session key from a verified response; return the confirm frame."""
        if not self.matches(verified):
            raise BadAuthenticator("response does not answer this request")
        secret = shared_secret(self.local, verified)
        self.session = derive_session_key(secret, self.nonce_s, verified.nonce, self.T, verified.sender_pid)
        return key_confirm(self.local, self.session, self.channel, T, verified.nonce, self.peer_id)


@dataclass
class Responder:
    local: Endpoint
    pending: dict[tuple[bytes, bytes], SessionKey] = field(default_factory=dict)
    established: list[SessionKey] = field(default_factory=list)

    def on_request(self, verified: VerifiedMessage, T: int, nonce_r: bytes,
                   payload: bytes = b"") -> MessageFrame:
        secret = shared_secret(self.local, verified)
        sk = derive_session_key(secret, verified.nonce, nonce_r, verified.timestamp, verified.sender_pid)
        self.pending[(verified.sender_pid, nonce_r)] = sk
        return make_request(self.local, verified.channel, verified.nonce + payload, T, nonce_r,
                            verified.sender_pid, msg_type=MsgType.RESPONSE)

    def on_confirm(self, verified: VerifiedMessage) -> SessionKey:
        sk = self.pending.pop((verified.sender_pid, verified.nonce), None)
        if sk is None:
            raise ConfirmMismatch("no pending session for this confirm")
        check_confirm(sk, verified)
        self.established.append(sk)
        return sk


def run_exchange(initiator: Endpoint, responder: Endpoint, channel: Channel, peer_id: bytes,
                 payload: bytes, T: int, nonce_s: bytes, nonce_r: bytes,
                 init_cache: ReplayCache | None = None,
                 resp_cache: ReplayCache | None = None) -> tuple[SessionKey, SessionKey]:
    """Run all three messages in-process with no network in between."""
    if init_cache is None:
        init_cache = ReplayCache(initiator.params.delta_ms)
    if resp_cache is None:
        resp_cache = ReplayCache(responder.params.delta_ms)
    ini = Initiator(initiator, channel, peer_id)
    res = Responder(responder)
    req = ini.request(payload, T, nonce_s)
    v_req = verify_request(responder, req.encode(), T, resp_cache)
    resp = res.on_request(v_req, T + 1, nonce_r)
    v_resp = verify_request(initiator, resp.encode(), T + 1, init_cache)
    confirm = ini.on_response(v_resp, T + 2)
    v_conf = verify_request(responder, confirm.encode(), T + 2, resp_cache)
    return ini.session, res.on_confirm(v_conf)
