"""Schnorr signatures over :mod:`cvcc.crypto.group` with batch verification.

A signature is the pair (R, s): commitment R = k*G and response
s = k + e*x mod q, where e = H("sig", R, X, msg) mod q.  Carrying R rather
than e is what makes batching possible; the challenge is recomputed from it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import EmptyBatch, InvalidElement, ZeroScalar
from .group import SCALAR_LEN, Group, GroupElement, scalar_mul
from .instrument import notify
from .primitives import be64, canon, hash, hash_fields


@dataclass(frozen=True)
class Signature:
    R: GroupElement
    s: int

    def encode(self) -> bytes:
        return self.R.encode() + self.R.group.scalar_bytes(self.s)

    @classmethod
    def decode(cls, group: Group, data: bytes) -> "Signature":
        if len(data) != signature_len(group):
            raise InvalidElement("bad signature length")
        R = group.decode(data[:group.element_len])
        s = group.scalar_from_bytes(data[group.element_len:])
        return cls(R, s)


def signature_len(group: Group) -> int:
    return group.element_len + SCALAR_LEN


def challenge(R: GroupElement, X: GroupElement, msg: bytes) -> int:
    return int.from_bytes(hash_fields("sig", R.encode(), X.encode(), msg), "big") % X.group.order


def schnorr_sign(group: Group, x: int, msg: bytes, k: int, X: GroupElement | None = None) -> Signature:
    """Sign with key ``x`` and nonce ``k``; pass ``X`` to skip re-deriving the public key."""
    x %= group.order
    k %= group.order
    if x == 0 or k == 0:
        raise ZeroScalar("signing key and nonce must be nonzero")
    notify("sign")
    R = scalar_mul(group.generator, k)
    if X is None:
        X = group.mul(group.generator, x)  # key derivation is bookkeeping, not counted
    e = challenge(R, X, msg)
    return Signature(R, (k + e * x) % group.order)


def _check_public(X: GroupElement) -> None:
    if not isinstance(X, GroupElement) or X.is_identity():
        raise InvalidElement("public key must be a non-identity group element")


def schnorr_verify(X: GroupElement, msg: bytes, sig: Signature) -> bool:
    _check_public(X)
    group = X.group
    if sig.R.group is not group:
        raise InvalidElement("signature and key come from different groups")
    notify("verify")
    e = challenge(sig.R, X, msg)
    return scalar_mul(group.generator, sig.s) == sig.R * scalar_mul(X, e)


def batch_weights(items: Sequence[tuple[GroupElement, bytes, Signature]]) -> list[int]:
    """Per-item weights derived from the whole batch; never zero."""
    q = items[0][0].group.order
    batch_digest = hash(b"".join(canon([X.encode(), msg, sig.encode()]) for X, msg, sig in items))
    weights = []
    for i in range(len(items)):
        w = int.from_bytes(hash_fields("bw", batch_digest, be64(i)), "big") % q
        weights.append(w or 1)
    return weights


def batch_verify(items: Sequence[tuple[GroupElement, bytes, Signature]]) -> bool:
    """Accept iff (sum w_i s_i) G == prod R_i^w_i * prod X_i^(w_i e_i).

    The commitment product is evaluated as one multi-exponentiation, so the
    recorded scalar_mul count is n + 2.  With nonzero weights and prime q a
    batch holding exactly one invalid signature is always rejected.
    """
    if not items:
        raise EmptyBatch("batch_verify needs at least one item")
    group = items[0][0].group
    for X, _, sig in items:
        _check_public(X)
        if X.group is not group or sig.R.group is not group:
            raise InvalidElement("mixed groups in batch")
    notify("batch_verify")
    q = group.order
    weights = batch_weights(items)
    s_sum = sum(w * sig.s for w, (_, _, sig) in zip(weights, items)) % q
    lhs = scalar_mul(group.generator, s_sum)
    notify("scalar_mul")
    rhs = group.multi_mul([(sig.R, w) for w, (_, _, sig) in zip(weights, items)])
    for w, (X, msg, sig) in zip(weights, items):
        rhs = rhs * scalar_mul(X, w * challenge(sig.R, X, msg) % q)
    return lhs == rhs
