"""Vehicular-cloud record store with keyword search over ciphertext.

Records are encrypted under the owner's data key; each carries one
deterministic token per keyword, and the store keeps an inverted index
token -> record ids.  The store never sees a keyword.  Leakage is that of
any deterministic-token scheme: repeated queries and result sets are
visible to the store.

On disk the store is a sequence of ``be32(len) || upload-body`` entries,
where the upload body is

    canon(["up", owner_pid, nonce, be64(T), ct.nonce, ct.body, ct.tag, tokens])

with ``tokens`` the sorted 32-byte tokens packed into a single field.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .crypto import CipherText, canon, hash_fields, stream_decrypt, stream_encrypt, uncanon
from .crypto.primitives import DIGEST_LEN, be64
from .errors import DuplicateRecordId, EmptyKeywords, FieldTooLong, MalformedUpload, NotFound
from .protocol.frame import Channel
from .protocol.flows import VerifiedMessage

# be32 prefix + canon length prefixes of the eight fields + fixed-size fields
RECORD_OVERHEAD = 4 + 8 * 2 + len(b"up") + 32 + 32 + 8 + 32 + 32


@dataclass(frozen=True)
class SearchToken:
    token: bytes


@dataclass(frozen=True)
class EncryptedRecord:
    record_id: bytes
    owner_pid: bytes
    timestamp: int
    nonce: bytes
    ct: CipherText
    tokens: frozenset[bytes]

    def upload_body(self) -> bytes:
        return canon([
            "up", self.owner_pid, self.nonce, be64(self.timestamp),
            self.ct.nonce, self.ct.body, self.ct.tag, b"".join(sorted(self.tokens)),
        ])

    def storage_size(self) -> int:
        return RECORD_OVERHEAD + len(self.ct.body) + DIGEST_LEN * len(self.tokens)


def owner_keys(owner_secret: bytes) -> tuple[bytes, bytes]:
    """(data_key, k_search) for an owner, derived from its long-term secret."""
    return hash_fields("dk", owner_secret), hash_fields("sk2", owner_secret)


def record_id(owner_pid: bytes, T: int, nonce: bytes) -> bytes:
    return hash_fields("rid", owner_pid, be64(T), nonce)


def trapdoor(k_search: bytes, keyword: bytes) -> SearchToken:
    if not keyword:
        raise EmptyKeywords("keyword must be non-empty")
    return SearchToken(hash_fields("tok", k_search, keyword))


def make_record(owner_pid: bytes, payload: bytes, keywords: Iterable[bytes], data_key: bytes,
                k_search: bytes, T: int, nonce: bytes) -> EncryptedRecord:
    keywords = list(keywords)
    if not keywords:
        raise EmptyKeywords("a record needs at least one keyword")
    for kw in keywords:
        if len(kw) > 0xFFFF:
            raise FieldTooLong("keyword too long")
    tokens = frozenset(trapdoor(k_search, kw).token for kw in keywords)
    return EncryptedRecord(record_id(owner_pid, T, nonce), owner_pid, T, nonce,
                           stream_encrypt(data_key, nonce, payload), tokens)


def parse_upload(body: bytes) -> EncryptedRecord:
    try:
        fields = uncanon(body)
    except ValueError as exc:
        raise MalformedUpload(str(exc)) from None
    if len(fields) != 8 or fields[0] != b"up":
        raise MalformedUpload("not a record-upload body")
    _, owner, nonce, T, ct_nonce, ct_body, tag, packed = fields
    if (len(owner), len(nonce), len(T), len(ct_nonce), len(tag)) != (32, 32, 8, 32, 32):
        raise MalformedUpload("fixed-size field has the wrong length")
    if not packed or len(packed) % DIGEST_LEN:
        raise MalformedUpload("token field must hold one or more 32-byte tokens")
    tokens = frozenset(packed[i:i + DIGEST_LEN] for i in range(0, len(packed), DIGEST_LEN))
    if len(tokens) * DIGEST_LEN != len(packed):
        raise MalformedUpload("duplicate tokens")
    timestamp = int.from_bytes(T, "big")
    return EncryptedRecord(record_id(owner, timestamp, nonce), owner, timestamp, nonce,
                           CipherText(ct_nonce, ct_body, tag), tokens)


class VcStore:
    """Single-writer, many-reader record store."""

    def __init__(self) -> None:
        self.records: dict[bytes, EncryptedRecord] = {}
        self.index: dict[bytes, set[bytes]] = {}
        self._lock = threading.Lock()

    def add(self, record: EncryptedRecord) -> bytes:
        with self._lock:
            if record.record_id in self.records:
                raise DuplicateRecordId(record.record_id.hex())
            self.records[record.record_id] = record
            for tok in record.tokens:
                self.index.setdefault(tok, set()).add(record.record_id)
        return record.record_id

    def ingest(self, verified: VerifiedMessage) -> bytes:
        """Store an upload carried by an already-verified R2VC/V2VC frame.

        RSUs may relay records for any owner; a vehicle may only upload its own.
        """
        if verified.channel not in (Channel.R2VC, Channel.V2VC):
            raise MalformedUpload(f"uploads arrive on R2VC or V2VC, not {verified.channel.name}")
        record = parse_upload(verified.payload)
        if verified.channel == Channel.V2VC and record.owner_pid != verified.sender_pid:
            raise MalformedUpload("vehicle uploaded a record it does not own")
        return self.add(record)

    def search(self, token: SearchToken) -> list[bytes]:
        with self._lock:
            return sorted(self.index.get(token.token, ()))

    def retrieve(self, rid: bytes, data_key: bytes) -> bytes:
        with self._lock:
            record = self.records.get(rid)
        if record is None:
            raise NotFound(rid.hex())
        return stream_decrypt(data_key, record.ct)

    def __len__(self) -> int:
        return len(self.records)

    def rebuilt_index(self) -> dict[bytes, set[bytes]]:
        index: dict[bytes, set[bytes]] = {}
        for rid, rec in self.records.items():
            for tok in rec.tokens:
                index.setdefault(tok, set()).add(rid)
        return index

    def storage_bytes(self) -> int:
        return sum(r.storage_size() for r in self.records.values())

    def serialize(self) -> bytes:
        out = bytearray()
        with self._lock:
            for rec in self.records.values():
                body = rec.upload_body()
                out += len(body).to_bytes(4, "big") + body
        return bytes(out)

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.serialize())

    @classmethod
    def from_bytes(cls, data: bytes) -> "VcStore":
        store = cls()
        i = 0
        while i < len(data):
            if i + 4 > len(data):
                raise MalformedUpload("truncated record length")
            n = int.from_bytes(data[i:i + 4], "big")
            if i + 4 + n > len(data):
                raise MalformedUpload("truncated record")
            store.add(parse_upload(data[i + 4:i + 4 + n]))
            i += 4 + n
        return store

    @classmethod
    def load(cls, path: str | Path) -> "VcStore":
        return cls.from_bytes(Path(path).read_bytes())
