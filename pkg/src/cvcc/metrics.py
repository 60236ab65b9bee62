"""Operation counting, abstract cost model and run reports."""
from __future__ import annotations

import json
from collections import Counter
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator

from .crypto.instrument import OP_KINDS, listening
from .errors import REJECTION_REASONS, UnknownOpKind

if TYPE_CHECKING:
    from .netsim.trace import TraceRecord
    from .store import VcStore

DROP_OUT_OF_RANGE = "dropped-out-of-range"
DROP_ADVERSARY = "adversary-dropped"
ACCEPTED = "accepted"


class OpCounters:
    """Per-node operation counts; the global view is their sum."""

    def __init__(self) -> None:
        self.per_node: dict[str, Counter[str]] = {}

    def record(self, node: str, kind: str, n: int = 1) -> None:
        if kind not in OP_KINDS:
            raise UnknownOpKind(kind)
        self.per_node.setdefault(node, Counter())[kind] += n

    def node(self, node: str) -> dict[str, int]:
        c = self.per_node.get(node, Counter())
        return {k: c[k] for k in OP_KINDS}

    @property
    def total(self) -> dict[str, int]:
        out = dict.fromkeys(OP_KINDS, 0)
        for c in self.per_node.values():
            for k in OP_KINDS:
                out[k] += c[k]
        return out

    def scaled(self, factor: int) -> "OpCounters":
        other = OpCounters()
        for node, c in self.per_node.items():
            other.per_node[node] = Counter({k: v * factor for k, v in c.items()})
        return other


def record_op(counters: OpCounters, node: str, kind: str) -> OpCounters:
    counters.record(node, kind)
    return counters


@contextmanager
def counting(counters: OpCounters, node: str) -> Iterator[OpCounters]:
    """Attribute every primitive call inside the block to ``node``."""
    with listening(lambda kind, n: counters.record(node, kind, n)):
        yield counters


@dataclass(frozen=True)
class CostModel:
    """Unit costs per operation kind.

    The defaults are ARBITRARY placeholders chosen only to rank cheap
    operations (hash, xor) below expensive ones (scalar multiplication);
    they are not measurements of any device.  sign/verify/batch_verify
    carry no cost of their own because their hashes and scalar
    multiplications are counted separately.
    """
    time_s: dict[str, float] = field(default_factory=lambda: {
        "hash": 2e-6, "xor": 1e-8, "scalar_mul": 1e-3, "sign": 0.0, "verify": 0.0, "batch_verify": 0.0,
    })
    energy_j: dict[str, float] = field(default_factory=lambda: {
        "hash": 1e-6, "xor": 5e-9, "scalar_mul": 5e-4, "sign": 0.0, "verify": 0.0, "batch_verify": 0.0,
    })

    def __post_init__(self) -> None:
        for table in (self.time_s, self.energy_j):
            for kind, v in table.items():
                if kind not in OP_KINDS:
                    raise UnknownOpKind(kind)
                if v < 0:
                    raise ValueError(f"negative unit cost for {kind}")


@dataclass
class MetricsReport:
    op_counts: dict[str, int]
    op_counts_per_node: dict[str, dict[str, int]]
    bytes_sent: dict[str, int]
    storage_bytes: int
    modeled_time_s: float
    modeled_energy_j: float
    frames: dict
    adversary: dict
    sessions: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _modeled(totals: dict[str, int], table: dict[str, float]) -> float:
    return sum(totals[k] * table.get(k, 0.0) for k in OP_KINDS)


def report(counters: OpCounters, cost_model: CostModel | None = None,
           trace: Iterable["TraceRecord"] = (), store: "VcStore | None" = None, *,
           generated: int | None = None, sessions: dict | None = None) -> MetricsReport:
    """Summarize a finished run.  Pure over its inputs."""
    cost_model = cost_model or CostModel()
    totals = counters.total
    bytes_sent = {ch: 0 for ch in ("V2V", "V2R", "R2VC", "V2VC")}
    honest = {"accepted": 0, "rejected": dict.fromkeys(REJECTION_REASONS, 0),
              "dropped": {DROP_OUT_OF_RANGE: 0, DROP_ADVERSARY: 0}}
    adv = {"injected": 0, "accepted": 0, "rejected": dict.fromkeys(REJECTION_REASONS, 0),
           "dropped": {DROP_OUT_OF_RANGE: 0}}
    seen_honest = 0
    for rec in trace:
        if rec.outcome != DROP_OUT_OF_RANGE:
            bytes_sent[rec.channel] += rec.size
        bucket = honest if rec.origin == "honest" else adv
        if rec.origin == "honest":
            seen_honest += 1
        else:
            adv["injected"] += 1
        if rec.outcome == ACCEPTED:
            bucket["accepted"] += 1
        elif rec.outcome in bucket["dropped"]:
            bucket["dropped"][rec.outcome] += 1
        else:
            bucket["rejected"][rec.outcome] += 1
    honest["generated"] = seen_honest if generated is None else generated
    return MetricsReport(
        op_counts=totals,
        op_counts_per_node={n: counters.node(n) for n in sorted(counters.per_node)},
        bytes_sent=bytes_sent,
        storage_bytes=store.storage_bytes() if store is not None else 0,
        modeled_time_s=_modeled(totals, cost_model.time_s),
        modeled_energy_j=_modeled(totals, cost_model.energy_j),
        frames=honest,
        adversary=adv,
        sessions=sessions or {"established": 0, "confirm_failed": 0},
    )
