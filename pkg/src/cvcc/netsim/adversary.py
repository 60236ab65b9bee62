"""Byte-level adversary: it sees and rewrites wire bytes but holds no secrets."""
from __future__ import annotations

import random

from ..crypto import Group
from ..protocol.frame import HEADER_LEN, Channel, MsgType, auth_len, certificate_len

_FIXED = {
    "version": (0, 1),
    "msg_type": (1, 2),
    "channel": (2, 3),
    "sender_pid": (3, 35),
    "timestamp": (35, 43),
    "nonce": (43, 75),
    "payload_len": (75, 77),
}


def field_span(frame: bytes, name: str, group: Group) -> tuple[int, int]:
    """Byte range of a named field, read from the public frame layout."""
    if name in _FIXED:
        return _FIXED[name]
    plen = int.from_bytes(frame[75:77], "big")
    body = HEADER_LEN + plen
    if name == "payload":
        return HEADER_LEN, body
    try:
        alen = auth_len(Channel(frame[2]), group)
    except ValueError:
        alen = 32
    if name == "auth":
        return body, body + alen
    if name == "cert":
        return body + alen, len(frame)
    raise KeyError(name)


def flip_bit(frame: bytes, bit: int) -> bytes:
    out = bytearray(frame)
    out[bit // 8] ^= 0x80 >> (bit % 8)
    return bytes(out)


def tamper(frame: bytes, field: str, bit: int, group: Group) -> bytes:
    lo, hi = field_span(frame, field, group)
    if hi <= lo:
        lo, hi = 0, len(frame)
    return flip_bit(frame, lo * 8 + bit % ((hi - lo) * 8))


def substitute_nonce(frame: bytes, rng: random.Random) -> bytes:
    lo, hi = _FIXED["nonce"]
    return frame[:lo] + rng.randbytes(hi - lo) + frame[hi:]


def craft_impersonation(channel: Channel, pid: bytes, T: int, rng: random.Random, group: Group,
                        payload_size: int = 32, cert: bytes | None = None) -> bytes:
    """A request claiming ``pid`` with a random authenticator.

    On V2V the adversary attaches a certificate it overheard for ``pid`` if
    it has one (certificates are public), otherwise random bytes.
    """
    head = (bytes([1, MsgType.REQUEST, channel]) + pid + T.to_bytes(8, "big")
            + rng.randbytes(32) + payload_size.to_bytes(2, "big"))
    frame = head + rng.randbytes(payload_size) + rng.randbytes(auth_len(channel, group))
    if channel == Channel.V2V:
        frame += cert if cert is not None else rng.randbytes(certificate_len(group))
    return frame


def adversary_act(action: str, frame: bytes, rng: random.Random, group: Group, *,
                  field: str = "payload", bit: int = 0) -> bytes:
    """Bytes the adversary puts on the wire in place of (or after) ``frame``."""
    if action == "Replay":
        return frame
    if action == "Tamper":
        return tamper(frame, field, bit, group)
    if action == "MitmSubstitute":
        return substitute_nonce(frame, rng)
    raise ValueError(f"{action} does not act on an intercepted frame")
