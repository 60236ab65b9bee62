"""Hash, XOR and the length-prefixed field encoding."""
from __future__ import annotations

import hashlib
from typing import Iterable

from ..errors import FieldTooLong, LengthMismatch
from .instrument import notify

DIGEST_LEN = 32
MAX_FIELD_LEN = 0xFFFF

Digest = bytes


def hash(data: bytes) -> Digest:  # noqa: A001 - name mirrors the protocol's h()
    """SHA-256 of ``data``."""
    notify("hash")
    return hashlib.sha256(data).digest()


def xor(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise LengthMismatch(f"xor operands differ in length: {len(a)} != {len(b)}")
    notify("xor")
    n = len(a)
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(n, "big")


def canon(fields: Iterable[bytes | str]) -> bytes:
    """Encode a field list as ``be16(len) || field`` repeated.

    Strings are encoded as UTF-8; they are only used for domain labels.
    """
    out = bytearray()
    for field in fields:
        if isinstance(field, str):
            field = field.encode()
        if len(field) > MAX_FIELD_LEN:
            raise FieldTooLong(f"field of {len(field)} bytes exceeds {MAX_FIELD_LEN}")
        out += len(field).to_bytes(2, "big")
        out += field
    return bytes(out)


def uncanon(data: bytes) -> list[bytes]:
    """Inverse of :func:`canon`; raises ValueError on truncated input."""
    fields = []
    i = 0
    while i < len(data):
        if i + 2 > len(data):
            raise ValueError("truncated length prefix")
        n = int.from_bytes(data[i:i + 2], "big")
        i += 2
        if i + n > len(data):
            raise ValueError("truncated field")
        fields.append(data[i:i + n])
        i += n
    return fields


def be16(n: int) -> bytes:
    return n.to_bytes(2, "big")


def be64(n: int) -> bytes:
    return n.to_bytes(8, "big")


def hash_fields(*fields: bytes | str) -> Digest:
    """``hash(canon(fields))``, the form nearly every derivation uses."""
    return hash(canon(fields))
