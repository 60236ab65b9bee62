"""Message communication: request generation, verification, key agreement."""
from __future__ import annotations

import hmac
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

from ..crypto import GroupElement, Signature, batch_verify, hash_fields, scalar_mul, schnorr_sign, schnorr_verify
from ..crypto.primitives import be64
from ..errors import (
    BadAuthenticator,
    BadCertificate,
    ConfirmMismatch,
    ExpiredCertificate,
    FrameRejected,
    InvalidElement,
    NotLoggedIn,
    PayloadTooLong,
    ReplayDetected,
    Revoked,
    StaleTimestamp,
)
from .frame import Channel, MessageFrame, MsgType
from .params import Certificate, LoginState, RsuSecret, SystemParams, derive_scalar, vehicle_secret


@dataclass
class InfraNode:
    """An RSU or the VC.  Both are RA-deployed and hold the master secret,
    which lets them re-derive any vehicle's link key from its pid."""
    params: SystemParams
    node_id: bytes
    role: str
    rsu: RsuSecret | None = None
    revoked: set[bytes] | frozenset[bytes] = frozenset()

    @classmethod
    def for_rsu(cls, params: SystemParams, rsu: RsuSecret, **kw) -> "InfraNode":
        return cls(params, rsu.rsu_id, "RSU", rsu, **kw)

    @classmethod
    def for_vc(cls, params: SystemParams, vc_id: bytes, **kw) -> "InfraNode":
        return cls(params, vc_id, "VC", **kw)

    @property
    def pid(self) -> bytes:
        return self.node_id

    def mac_key(self, channel: int, peer_id: bytes) -> bytes:
        if (channel, self.role) in ((Channel.V2R, "RSU"), (Channel.V2VC, "VC")):
            return hash_fields("link", vehicle_secret(self.params, peer_id), self.node_id)
        if channel == Channel.R2VC and self.role == "RSU":
            return self.rsu.k_infra
        if channel == Channel.R2VC and self.role == "VC":
            return hash_fields("infra", peer_id, self.params.secret_bytes)
        raise BadAuthenticator(f"{self.role} holds no key for channel {Channel(channel).name}")


Endpoint = Union[LoginState, InfraNode]


class ReplayCache:
    """Seen (sender_pid, T) pairs within the freshness horizon."""

    def __init__(self, horizon_ms: int):
        self.horizon = horizon_ms
        self.entries: set[tuple[bytes, int]] = set()

    def evict(self, now: int) -> None:
        self.entries = {e for e in self.entries if e[1] >= now - self.horizon}

    def __contains__(self, key: tuple[bytes, int]) -> bool:
        return key in self.entries

    def add(self, key: tuple[bytes, int]) -> None:
        self.entries.add(key)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class VerifiedMessage:
    channel: Channel
    msg_type: MsgType
    sender_pid: bytes
    timestamp: int
    nonce: bytes
    payload: bytes
    peer_public: GroupElement | None = None


@dataclass(frozen=True)
class SessionKey:
    key: bytes = field(repr=False)
    established_at: int
    peer_pid: bytes = b""


def make_request(sender: Endpoint, channel: Channel, payload: bytes, T: int, nonce: bytes,
                 receiver_ctx_pid: bytes, msg_type: MsgType = MsgType.REQUEST) -> MessageFrame:
    """Build and authenticate a frame from ``sender`` to the receiver scope."""
    if isinstance(sender, LoginState) and not sender.active:
        raise NotLoggedIn("OBU session has ended")
    if len(payload) > 0xFFFF:
        raise PayloadTooLong(f"payload of {len(payload)} bytes")
    channel = Channel(channel)
    frame = MessageFrame(MsgType(msg_type), channel, sender.pid, T, nonce, payload)
    if channel == Channel.V2V:
        if not isinstance(sender, LoginState):
            raise BadAuthenticator("only vehicles sign V2V frames")
        group = sender.params.group
        msg = frame.signed_bytes()
        k = derive_scalar(group, "k", group.scalar_bytes(sender.x), msg)
        sig = schnorr_sign(group, sender.x, msg, k, sender.cert.X)
        return replace(frame, auth=sig.encode(), cert=sender.cert.encode())
    mk = sender.mac_key(channel, receiver_ctx_pid)
    return replace(frame, auth=hash_fields("mac", mk, *frame.fields()))


def _check_fresh(frame: MessageFrame, now: int, delta_ms: int, cache: ReplayCache) -> None:
    if abs(now - frame.timestamp) > delta_ms:
        raise StaleTimestamp(f"|{now} - {frame.timestamp}| > {delta_ms} ms")
    cache.evict(now)
    if (frame.sender_pid, frame.timestamp) in cache:
        raise ReplayDetected("(pid, T) already accepted")


def _decode_v2v(receiver: Endpoint, frame: MessageFrame) -> tuple[GroupElement, Signature]:
    if not isinstance(receiver, LoginState):
        raise BadAuthenticator("only vehicles verify V2V frames")
    if frame.cert is None:
        raise BadCertificate("V2V frame carries no certificate")
    group = receiver.params.group
    n = group.element_len
    try:
        X = group.public_key(frame.cert[32:32 + n])
    except InvalidElement as exc:
        raise BadCertificate(f"certificate key: {exc}") from None
    try:
        sig = Signature.decode(group, frame.auth)
    except InvalidElement as exc:
        raise BadAuthenticator(f"signature encoding: {exc}") from None
    return X, sig


def _check_certificate(receiver: LoginState, frame: MessageFrame, now: int) -> Certificate:
    group = receiver.params.group
    try:
        cert = Certificate.decode(group, frame.cert)
    except InvalidElement as exc:
        raise BadCertificate(str(exc)) from None
    if cert.pid != frame.sender_pid:
        raise BadCertificate("certificate issued to a different pid")
    if frame.cert not in receiver.cert_cache:
        if not cert.verify(receiver.params.ra_public):
            raise BadCertificate("certificate not signed by the RA")
        receiver.cert_cache.add(frame.cert)
    if now > cert.expiry:
        raise ExpiredCertificate(f"certificate expired at {cert.expiry}")
    return cert


def _finish(receiver: Endpoint, frame: MessageFrame, cache: ReplayCache,
            peer_public: GroupElement | None = None) -> VerifiedMessage:
    if frame.sender_pid in receiver.revoked:
        raise Revoked("sender pid is revoked")
    cache.add((frame.sender_pid, frame.timestamp))
    return VerifiedMessage(frame.channel, frame.msg_type, frame.sender_pid, frame.timestamp,
                           frame.nonce, frame.payload, peer_public)


def _as_frame(receiver: Endpoint, frame: MessageFrame | bytes) -> MessageFrame:
    if isinstance(frame, (bytes, bytearray)):
        return MessageFrame.decode(bytes(frame), receiver.params.group)
    return frame


def verify_request(receiver: Endpoint, frame: MessageFrame | bytes, now: int,
                   cache: ReplayCache) -> VerifiedMessage:
    """Check freshness, replay, authenticator, certificate, expiry, revocation.

    Errors are raised in exactly that order.  The (pid, T) pair enters the
    replay cache only once the frame has been fully accepted, so forged
    frames cannot pre-empt an honest sender's timestamp.
    """
    frame = _as_frame(receiver, frame)
    _check_fresh(frame, now, receiver.params.delta_ms, cache)
    if frame.channel == Channel.V2V:
        X, sig = _decode_v2v(receiver, frame)
        if not schnorr_verify(X, frame.signed_bytes(), sig):
            raise BadAuthenticator("signature does not verify")
        _check_certificate(receiver, frame, now)
        return _finish(receiver, frame, cache, X)
    mk = receiver.mac_key(frame.channel, frame.sender_pid)
    if not hmac.compare_digest(hash_fields("mac", mk, *frame.fields()), frame.auth):
        raise BadAuthenticator("MAC does not verify")
    return _finish(receiver, frame, cache)


def batch_verify_frames(receiver: LoginState, frames: Sequence[MessageFrame | bytes], now: int,
                        cache: ReplayCache) -> list[VerifiedMessage | FrameRejected]:
    """Verify many V2V frames with a single batched signature check.

    Returns one outcome per frame, in input order.  If the batch equation
    fails, signatures are re-checked one by one to locate the bad frames,
    so outcomes always match what :func:`verify_request` would report.
    """
    outcomes: list[VerifiedMessage | FrameRejected | None] = [None] * len(frames)
    pending: list[tuple[int, MessageFrame, GroupElement, Signature]] = []
    seen: set[tuple[bytes, int]] = set()
    for i, raw in enumerate(frames):
        try:
            frame = _as_frame(receiver, raw)
            if frame.channel != Channel.V2V:
                raise BadAuthenticator("batch verification covers V2V frames only")
            _check_fresh(frame, now, receiver.params.delta_ms, cache)
            key = (frame.sender_pid, frame.timestamp)
            if key in seen:
                raise ReplayDetected("duplicate (pid, T) inside batch")
            seen.add(key)
            X, sig = _decode_v2v(receiver, frame)
            pending.append((i, frame, X, sig))
        except FrameRejected as exc:
            outcomes[i] = exc

    if pending:
        items = [(X, frame.signed_bytes(), sig) for _, frame, X, sig in pending]
        all_valid = batch_verify(items)
        for idx, (i, frame, X, sig) in enumerate(pending):
            try:
                if not all_valid and not schnorr_verify(*items[idx]):
                    raise BadAuthenticator("signature does not verify")
                _check_certificate(receiver, frame, now)
                outcomes[i] = _finish(receiver, frame, cache, X)
            except FrameRejected as exc:
                outcomes[i] = exc
    return outcomes


def shared_secret(local: Endpoint, verified: VerifiedMessage) -> bytes:
    """Secret both ends can compute: the link/infra key, or hashed DH on V2V."""
    if verified.channel == Channel.V2V:
        return hash_fields("dh", scalar_mul(verified.peer_public, local.x).encode())
    return local.mac_key(verified.channel, verified.sender_pid)


def derive_session_key(local_secret: bytes, nonce_s: bytes, nonce_r: bytes, T: int,
                       peer_pid: bytes = b"") -> SessionKey:
    return SessionKey(hash_fields("SK", local_secret, nonce_s, nonce_r, be64(T)), T, peer_pid)


def confirm_payload(sk: SessionKey, T: int) -> bytes:
    return hash_fields("confirm", sk.key, be64(T))


def key_confirm(sender: Endpoint, sk: SessionKey, channel: Channel, T: int, nonce: bytes,
                receiver_ctx_pid: bytes) -> MessageFrame:
    return make_request(sender, channel, confirm_payload(sk, T), T, nonce, receiver_ctx_pid,
                        msg_type=MsgType.KEY_CONFIRM)


def check_confirm(sk: SessionKey, verified: VerifiedMessage) -> None:
    if verified.msg_type != MsgType.KEY_CONFIRM:
        raise ConfirmMismatch("not a key-confirm frame")
    if not hmac.compare_digest(confirm_payload(sk, verified.timestamp), verified.payload):
        raise ConfirmMismatch("peer derived a different session key")
