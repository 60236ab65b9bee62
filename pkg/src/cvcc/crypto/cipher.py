"""Hash-counter stream cipher with an encrypt-then-tag authenticator."""
from __future__ import annotations

import hmac
from dataclasses import dataclass

from ..errors import LengthMismatch, TagMismatch
from .primitives import DIGEST_LEN, be64, hash_fields, xor

NONCE_LEN = 32


@dataclass(frozen=True)
class CipherText:
    nonce: bytes
    body: bytes
    tag: bytes


def keystream(key: bytes, nonce: bytes, length: int) -> bytes:
    blocks = (length + DIGEST_LEN - 1) // DIGEST_LEN
    return b"".join(hash_fields("ks", key, nonce, be64(i)) for i in range(blocks))[:length]


def _tag(key: bytes, nonce: bytes, body: bytes) -> bytes:
    return hash_fields("tag", key, nonce, body)


def stream_encrypt(key: bytes, nonce: bytes, pt: bytes) -> CipherText:
    if len(nonce) != NONCE_LEN:
        raise LengthMismatch("nonce must be 32 bytes")
    body = xor(pt, keystream(key, nonce, len(pt))) if pt else b""
    return CipherText(nonce, body, _tag(key, nonce, body))


def stream_decrypt(key: bytes, ct: CipherText) -> bytes:
    if not hmac.compare_digest(_tag(key, ct.nonce, ct.body), ct.tag):
        raise TagMismatch("ciphertext tag does not verify")
    if not ct.body:
        return b""
    return xor(ct.body, keystream(key, ct.nonce, len(ct.body)))
