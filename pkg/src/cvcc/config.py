"""Scenario files: strict JSON schema plus cross-field validation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ParseError, ValidationError
from .protocol.params import DEFAULT_DELTA_MS

ROLES = ["OBU", "RSU", "VC", "RA", "Adversary", "BaseStation", "Government"]
CHANNELS = ["V2V", "V2R", "R2VC", "V2VC"]
MSG_TYPES = ["request", "response", "key_confirm", "data"]
ACTIONS = ["Replay", "Tamper", "Impersonate", "MitmSubstitute"]
FRAME_FIELDS = ["version", "msg_type", "channel", "sender_pid", "timestamp", "nonce",
                "payload_len", "payload", "auth", "cert"]

# Which roles may sit at each end of a channel.
CHANNEL_ROLES = {
    "V2V": ("OBU", "OBU"),
    "V2R": ("OBU", "RSU"),
    "R2VC": ("RSU", "VC"),
    "V2VC": ("OBU", "VC"),
}

_point = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "nodes", "links", "workload", "duration_s"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "group": {"enum": ["toy", "standard-curve"]},
        "delta_ms": {"type": "integer", "minimum": 1},
        "duration_s": {"type": "number", "exclusiveMinimum": 0},
        "nodes": {"type": "array", "items": {
            "type": "object",
            "additionalProperties": False,
            "required": ["id", "role", "position"],
            "properties": {
                "id": {"type": "string", "minLength": 1},
                "role": {"enum": ROLES},
                "position": _point,
                "waypoints": {"type": "array", "items": {
                    "type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}},
                "cert_expiry_ms": {"type": "integer", "minimum": 1},
                "revoked": {"type": "boolean"},
            },
        }},
        "links": {"type": "array", "items": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a", "b", "kind"],
            "properties": {
                "a": {"type": "string"},
                "b": {"type": "string"},
                "kind": {"enum": ["DSRC", "WiFi", "Cellular", "Wired"]},
                "overrides": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "data_rate": {"type": "number", "exclusiveMinimum": 0},
                        "latency": {"type": "number", "minimum": 0},
                        "range_m": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
            },
        }},
        "workload": {"type": "array", "items": {
            "type": "object",
            "additionalProperties": False,
            "required": ["src", "dst", "channel", "payload_size", "period_s", "count"],
            "properties": {
                "src": {"type": "string"},
                "dst": {"type": "string"},
                "channel": {"enum": CHANNELS},
                "payload_size": {"type": "integer", "minimum": 0, "maximum": 60000},
                "period_s": {"type": "number", "exclusiveMinimum": 0},
                "count": {"type": "integer", "minimum": 1},
                "start_s": {"type": "number", "minimum": 0},
                "jitter": {"type": "boolean"},
            },
        }},
        "adversary": {
            "type": "object",
            "additionalProperties": False,
            "required": ["node", "actions"],
            "properties": {
                "node": {"type": "string"},
                "actions": {"type": "array", "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["action"],
                    "properties": {
                        "action": {"enum": ACTIONS},
                        "match": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["src", "dst"],
                            "properties": {
                                "src": {"type": "string"},
                                "dst": {"type": "string"},
                                "msg_type": {"enum": MSG_TYPES},
                                "nth": {"type": "integer", "minimum": 1},
                                "repeat": {"type": "integer", "minimum": 1},
                            },
                        },
                        "delay_s": {"type": "number", "minimum": 0},
                        "at_s": {"type": "number", "minimum": 0},
                        "target": {"type": "string"},
                        "channel": {"enum": CHANNELS},
                        "impersonate": {"type": "string"},
                        "field": {"enum": FRAME_FIELDS},
                        "bit": {"type": "integer", "minimum": 0},
                    },
                }},
            },
        },
        "store": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "persist": {"type": "boolean"},
                "vocabulary_size": {"type": "integer", "minimum": 1},
                "keywords_per_record": {"type": "integer", "minimum": 1},
            },
        },
    },
}


@dataclass(frozen=True)
class NodeSpec:
    id: str
    role: str
    position: tuple[float, float]
    waypoints: tuple[tuple[float, float, float], ...] = ()
    cert_expiry_ms: int | None = None
    revoked: bool = False


@dataclass(frozen=True)
class LinkSpec:
    a: str
    b: str
    kind: str
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class WorkloadSpec:
    src: str
    dst: str
    channel: str
    payload_size: int
    period_s: float
    count: int
    start_s: float = 0.0
    jitter: bool = True


@dataclass(frozen=True)
class ScriptEntry:
    action: str
    match: dict | None = None
    delay_s: float = 0.01
    at_s: float | None = None
    target: str | None = None
    channel: str | None = None
    impersonate: str | None = None
    field: str = "payload"
    bit: int = 0


@dataclass(frozen=True)
class AdversaryScript:
    node: str
    actions: tuple[ScriptEntry, ...]


@dataclass(frozen=True)
class StoreOptions:
    persist: bool = False
    vocabulary_size: int = 100
    keywords_per_record: int = 3


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    nodes: tuple[NodeSpec, ...]
    links: tuple[LinkSpec, ...]
    workload: tuple[WorkloadSpec, ...]
    duration_s: float
    group: str = "toy"
    delta_ms: int = DEFAULT_DELTA_MS
    adversary: AdversaryScript | None = None
    store: StoreOptions = StoreOptions()
    description: str = ""

    def node(self, node_id: str) -> NodeSpec:
        return next(n for n in self.nodes if n.id == node_id)


def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def parse_config(doc: Any) -> ScenarioConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise ParseError(f"{_path(err)}: {err.message}")
    adv = doc.get("adversary")
    cfg = ScenarioConfig(
        name=doc["name"],
        description=doc.get("description", ""),
        group=doc.get("group", "toy"),
        delta_ms=doc.get("delta_ms", DEFAULT_DELTA_MS),
        duration_s=doc["duration_s"],
        nodes=tuple(NodeSpec(n["id"], n["role"], tuple(n["position"]),
                             tuple(tuple(w) for w in n.get("waypoints", ())),
                             n.get("cert_expiry_ms"), n.get("revoked", False)) for n in doc["nodes"]),
        links=tuple(LinkSpec(l["a"], l["b"], l["kind"], dict(l.get("overrides", {}))) for l in doc["links"]),
        workload=tuple(WorkloadSpec(**w) for w in doc["workload"]),
        adversary=AdversaryScript(adv["node"], tuple(ScriptEntry(**a) for a in adv["actions"])) if adv else None,
        store=StoreOptions(**doc.get("store", {})),
    )
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    roles: dict[str, str] = {}
    for n in cfg.nodes:
        if n.id in roles:
            raise ValidationError(f"duplicate node id {n.id!r}")
        roles[n.id] = n.role
        times = [w[0] for w in n.waypoints]
        if times != sorted(times):
            raise ValidationError(f"waypoints of {n.id!r} are not in time order")

    def known(node_id: str, where: str) -> str:
        if node_id not in roles:
            raise ValidationError(f"{where} references unknown node {node_id!r}")
        return roles[node_id]

    pairs = set()
    for l in cfg.links:
        known(l.a, "link")
        known(l.b, "link")
        if l.a == l.b:
            raise ValidationError(f"link from {l.a!r} to itself")
        key = frozenset((l.a, l.b))
        if key in pairs:
            raise ValidationError(f"duplicate link {l.a!r}-{l.b!r}")
        pairs.add(key)

    for w in cfg.workload:
        src_role, dst_role = known(w.src, "workload"), known(w.dst, "workload")
        if (src_role, dst_role) != CHANNEL_ROLES[w.channel]:
            raise ValidationError(
                f"{w.channel} runs {'->'.join(CHANNEL_ROLES[w.channel])}, not {src_role}->{dst_role} "
                f"({w.src!r} -> {w.dst!r})")
        if w.src == w.dst:
            raise ValidationError(f"workload from {w.src!r} to itself")
        if frozenset((w.src, w.dst)) not in pairs:
            raise ValidationError(f"no link between {w.src!r} and {w.dst!r}")

    if cfg.adversary is not None:
        if known(cfg.adversary.node, "adversary") != "Adversary":
            raise ValidationError(f"adversary node {cfg.adversary.node!r} must have role Adversary")
        for a in cfg.adversary.actions:
            if a.action == "Impersonate":
                if a.at_s is None or a.target is None or a.channel is None:
                    raise ValidationError("Impersonate needs at_s, target and channel")
                known(a.target, "adversary action")
                if a.impersonate is not None:
                    known(a.impersonate, "adversary action")
            else:
                if a.match is None:
                    raise ValidationError(f"{a.action} needs a match clause")
                known(a.match["src"], "adversary match")
                known(a.match["dst"], "adversary match")
                if frozenset((a.match["src"], a.match["dst"])) not in pairs:
                    raise ValidationError(f"adversary match on missing link {a.match['src']!r}-{a.match['dst']!r}")


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(doc)
