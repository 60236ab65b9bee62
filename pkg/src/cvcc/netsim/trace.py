from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TraceRecord:
    time: float
    src: str
    dst: str
    digest: str
    outcome: str
    # not serialized; kept for metrics
    channel: str = ""
    size: int = 0
    origin: str = "honest"

    def line(self) -> str:
        return f"{self.time:.9f}\t{self.src}\t{self.dst}\t{self.digest}\t{self.outcome}"


class TraceLog:
    """Append-only delivery log, serialized one tab-separated record per line."""

    def __init__(self) -> None:
        self._records: list[TraceRecord] = []

    def append(self, time: float, src: str, dst: str, frame: bytes, outcome: str, *,
               channel: str = "", origin: str = "honest") -> TraceRecord:
        rec = TraceRecord(time, src, dst, hashlib.sha256(frame).hexdigest(), outcome,
                          channel, len(frame), origin)
        self._records.append(rec)
        return rec

    def __iter__(self):
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, i):
        return self._records[i]

    def serialize(self) -> str:
        return "".join(rec.line() + "\n" for rec in self._records)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.serialize())


def parse_trace(text: str) -> list[tuple[float, str, str, str, str]]:
    rows = []
    for line in text.splitlines():
        t, src, dst, digest, outcome = line.split("\t")
        rows.append((float(t), src, dst, digest, outcome))
    return rows
