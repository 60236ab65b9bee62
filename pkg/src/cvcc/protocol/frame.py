"""Bit-exact wire layout of protocol frames (big-endian throughout).

    version(1) msg_type(1) channel(1) sender_pid(32) T(8) nonce(32)
    payload_len(2) payload(payload_len) auth [cert]

``auth`` is a 32-byte MAC on infrastructure channels and a Schnorr
signature (element || scalar) on V2V, where the sender's certificate is
appended.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from ..crypto import Group, canon, signature_len
from ..crypto.primitives import DIGEST_LEN, be64
from ..errors import MalformedFrame

VERSION = 0x01

_HEADER = struct.Struct("!BBB32sQ32sH")
HEADER_LEN = _HEADER.size  # 77


class MsgType(enum.IntEnum):
    REQUEST = 0x01
    RESPONSE = 0x02
    KEY_CONFIRM = 0x03
    DATA = 0x04


class Channel(enum.IntEnum):
    V2V = 0x01
    V2R = 0x02
    R2VC = 0x03
    V2VC = 0x04


def certificate_len(group: Group) -> int:
    return DIGEST_LEN + group.element_len + 8 + signature_len(group)


def auth_len(channel: Channel, group: Group) -> int:
    return signature_len(group) if channel == Channel.V2V else DIGEST_LEN


@dataclass(frozen=True)
class MessageFrame:
    msg_type: MsgType
    channel: Channel
    sender_pid: bytes
    timestamp: int
    nonce: bytes
    payload: bytes
    auth: bytes = b""
    cert: bytes | None = None
    version: int = VERSION

    def fields(self) -> list[bytes]:
        """Everything the authenticator covers, one canon field each."""
        return [
            bytes([self.version]), bytes([self.msg_type]), bytes([self.channel]),
            self.sender_pid, be64(self.timestamp), self.nonce, self.payload,
        ]

    def signed_bytes(self) -> bytes:
        return canon(self.fields())

    def encode(self) -> bytes:
        head = _HEADER.pack(self.version, self.msg_type, self.channel, self.sender_pid,
                            self.timestamp, self.nonce, len(self.payload))
        return head + self.payload + self.auth + (self.cert or b"")

    def __len__(self) -> int:
        return HEADER_LEN + len(self.payload) + len(self.auth) + len(self.cert or b"")

    @classmethod
    def decode(cls, data: bytes, group: Group) -> "MessageFrame":
        if len(data) < HEADER_LEN:
            raise MalformedFrame("frame shorter than header")
        version, mtype, chan, pid, T, nonce, plen = _HEADER.unpack_from(data)
        if version != VERSION:
            raise MalformedFrame(f"unsupported version {version}")
        try:
            mtype = MsgType(mtype)
            chan = Channel(chan)
        except ValueError as exc:
            raise MalformedFrame(str(exc)) from None
        alen = auth_len(chan, group)
        clen = certificate_len(group) if chan == Channel.V2V else 0
        if len(data) != HEADER_LEN + plen + alen + clen:
            raise MalformedFrame("frame length does not match declared layout")
        body = HEADER_LEN + plen
        return cls(
            msg_type=mtype, channel=chan, sender_pid=pid, timestamp=T, nonce=nonce,
            payload=data[HEADER_LEN:body], auth=data[body:body + alen],
            cert=data[body + alen:] if clen else None, version=version,
        )
