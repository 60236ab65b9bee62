"""Deterministic discrete-event simulation of the vehicular-cloud topology."""
from __future__ import annotations

import enum
import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Any

from ..config import ScenarioConfig
from ..crypto import get_group
from ..errors import CvccError, FrameRejected, OutOfRange, StoreError
from ..metrics import ACCEPTED, DROP_ADVERSARY, DROP_OUT_OF_RANGE, CostModel, MetricsReport, OpCounters, counting, report
from ..protocol import (
    Channel,
    InfraNode,
    Initiator,
    LoginState,
    MsgType,
    RegistrationAuthority,
    ReplayCache,
    Responder,
    VerifiedMessage,
    certificate_len,
    login,
    ra_init,
    vc_id_of,
    verify_request,
)
from ..store import VcStore, make_record, owner_keys
from . import adversary as adv
from .links import CELLULAR_LATENCY_RANGE, LinkKind, LinkModel, default_link, transmit
from .trace import TraceLog


class SimulationError(CvccError):
    """An internal invariant of the simulator was violated."""


class EventKind(enum.Enum):
    GENERATE = "Generate"
    DELIVER = "Deliver"
    ADVERSARY_ACT = "AdversaryAct"
    MOVE = "Move"


@dataclass
class Event:
    time: float
    kind: EventKind
    node: str
    data: Any = None


@dataclass
class SimNode:
    id: str
    role: str
    position: tuple[float, float]
    waypoints: tuple[tuple[float, float, float], ...] = ()
    endpoint: LoginState | InfraNode | None = None
    cache: ReplayCache | None = None
    responder: Responder | None = None
    initiators: dict[bytes, Initiator] = field(default_factory=dict)
    owner_secret: bytes = b""
    store: VcStore | None = None
    last_ts: int = -1

    def position_at(self, t: float) -> tuple[float, float]:
        """Piecewise-linear path from the start position through the waypoints."""
        prev_t, (px, py) = 0.0, self.position
        for wt, wx, wy in self.waypoints:
            if t <= wt:
                if wt <= prev_t:
                    return wx, wy
                f = (t - prev_t) / (wt - prev_t)
                return px + f * (wx - px), py + f * (wy - py)
            prev_t, px, py = wt, wx, wy
        return px, py

    def next_timestamp(self, now: float) -> int:
        # Strictly increasing per node so (pid, T) never repeats for honest frames.
        self.last_ts = max(_ms(now), self.last_ts + 1)
        return self.last_ts


def _ms(t: float) -> int:
    return int(math.floor(t * 1000 + 1e-9))


_MSG_NAMES = {"request": MsgType.REQUEST, "response": MsgType.RESPONSE,
              "key_confirm": MsgType.KEY_CONFIRM, "data": MsgType.DATA}


@dataclass
class _Interceptor:
    entry: Any
    seen: int = 0

    def fires(self, src: str, dst: str, frame: bytes) -> bool:
        m = self.entry.match
        if (m["src"], m["dst"]) != (src, dst):
            return False
        if "msg_type" in m and frame[1] != _MSG_NAMES[m["msg_type"]]:
            return False
        self.seen += 1
        nth = m.get("nth", 1)
        return nth <= self.seen < nth + m.get("repeat", 1)


class World:
    def __init__(self, config: ScenarioConfig, seed: int):
        self.config = config
        self.seed = seed
        self.rng = random.Random(seed)
        self.group = get_group(config.group)
        self.clock = 0.0
        self._queue: list[tuple[float, int, Event]] = []
        self._seq = 0
        self.trace = TraceLog()
        self.counters = OpCounters()
        self.generated = 0
        self.sessions = {"established": 0, "confirm_failed": 0}
        self.store_errors = 0
        self.event_log: list[tuple[float, str, str]] = []
        self.observed_certs: dict[bytes, bytes] = {}
        self._build()

    # construction

    def _build(self) -> None:
        cfg = self.config
        self.params = ra_init(self.rng.randbytes(32), self.group, cfg.delta_ms)
        self.ra = RegistrationAuthority(self.params)
        vocab_size = cfg.store.vocabulary_size
        self.vocabulary = [b"keyword-%05d" % i for i in range(vocab_size)]
        default_expiry = _ms(cfg.duration_s + 3600)
        self.nodes: dict[str, SimNode] = {}
        self.pid_to_node: dict[bytes, str] = {}
        for spec in cfg.nodes:
            node = SimNode(spec.id, spec.role, spec.position, spec.waypoints)
            ident = spec.id.encode()
            if spec.role == "OBU":
                pw = self.rng.randbytes(16)
                tpd = self.ra.register_vehicle(ident, pw, spec.cert_expiry_ms or default_expiry)
                ep = login(tpd, ident, pw)
                ep.revoked = self.ra.revoked
                node.endpoint, node.owner_secret = ep, ep.V
            elif spec.role == "RSU":
                rsu = self.ra.register_rsu(ident)
                node.endpoint = InfraNode.for_rsu(self.params, rsu, revoked=self.ra.revoked)
                node.owner_secret = rsu.k_infra
            elif spec.role == "VC":
                node.endpoint = InfraNode.for_vc(self.params, vc_id_of(ident), revoked=self.ra.revoked)
                node.store = VcStore()
            if node.endpoint is not None:
                node.cache = ReplayCache(cfg.delta_ms)
                node.responder = Responder(node.endpoint)
                self.pid_to_node[node.endpoint.pid] = spec.id
            self.nodes[spec.id] = node
        for spec in cfg.nodes:
            if spec.revoked and spec.role == "OBU":
                self.ra.revoke(spec.id.encode())

        self.links: dict[tuple[str, str], LinkModel] = {}
        for l in cfg.links:
            overrides = dict(l.overrides)
            if l.kind == LinkKind.CELLULAR.value and "latency" not in overrides:
                overrides["latency"] = self.rng.uniform(*CELLULAR_LATENCY_RANGE)
            model = default_link(l.kind, **overrides)
            self.links[(l.a, l.b)] = self.links[(l.b, l.a)] = model

        self.adversary_id = cfg.adversary.node if cfg.adversary else None
        self.interceptors: list[_Interceptor] = []
        for entry in cfg.adversary.actions if cfg.adversary else ():
            if entry.action == "Impersonate":
                self.schedule(entry.at_s, EventKind.ADVERSARY_ACT, self.adversary_id, ("impersonate", entry))
            else:
                self.interceptors.append(_Interceptor(entry))

        for i, w in enumerate(cfg.workload):
            start = w.start_s + (self.rng.uniform(0, w.period_s) if w.jitter else 0.0)
            self.schedule(start, EventKind.GENERATE, w.src, (i, w.count))
        for spec in cfg.nodes:
            for wt, wx, wy in spec.waypoints:
                self.schedule(wt, EventKind.MOVE, spec.id, (wx, wy))

    # event queue

    def schedule(self, time: float, kind: EventKind, node: str, data: Any = None) -> None:
        heapq.heappush(self._queue, (time, self._seq, Event(time, kind, node, data)))
        self._seq += 1

    @property
    def pending(self) -> int:
        return len(self._queue)

    def step(self) -> bool:
        if not self._queue:
            return False
        time, _, event = heapq.heappop(self._queue)
        if time < self.clock:
            raise SimulationError(f"clock would move backwards: {time} < {self.clock}")
        self.clock = time
        self.event_log.append((time, event.kind.value, event.node))
        getattr(self, "_on_" + event.kind.name.lower())(event)
        return True

    def run(self) -> "World":
        while self.step():
            pass
        if self.generated != sum(1 for r in self.trace if r.origin == "honest"):
            raise SimulationError("frame conservation violated")
        return self

    # transmission

    def _distance(self, a: str, b: str) -> float:
        (ax, ay), (bx, by) = self.nodes[a].position_at(self.clock), self.nodes[b].position_at(self.clock)
        return math.hypot(ax - bx, ay - by)

    def _send(self, src: str, dst: str, frame: bytes, channel: Channel) -> None:
        """Put an honest frame on the link src -> dst."""
        self.generated += 1
        link = self.links[(src, dst)]
        try:
            duration = transmit(link, len(frame), self._distance(src, dst))
        except OutOfRange:
            self.trace.append(self.clock, src, dst, frame, DROP_OUT_OF_RANGE, channel=channel.name)
            return
        if channel == Channel.V2V and len(frame) > certificate_len(self.group):
            self.observed_certs[frame[3:35]] = frame[-certificate_len(self.group):]
        for icpt in self.interceptors:
            if not icpt.fires(src, dst, frame):
                continue
            entry = icpt.entry
            if entry.action == "Replay":
                self.schedule(self.clock + entry.delay_s, EventKind.ADVERSARY_ACT, self.adversary_id,
                              ("replay", src, dst, frame, channel))
                break
            altered = adv.adversary_act(entry.action, frame, self.rng, self.group, field=entry.field, bit=entry.bit)
            self.trace.append(self.clock, src, dst, frame, DROP_ADVERSARY, channel=channel.name)
            self.schedule(self.clock + transmit(link, len(altered)), EventKind.DELIVER, dst,
                          (self.adversary_id, altered, channel, "adversary"))
            return
        self.schedule(self.clock + duration, EventKind.DELIVER, dst, (src, frame, channel, "honest"))

    def _inject(self, link: LinkModel, dst: str, frame: bytes, channel: Channel) -> None:
        try:
            duration = transmit(link, len(frame), self._distance(self.adversary_id, dst))
        except OutOfRange:
            self.trace.append(self.clock, self.adversary_id, dst, frame, DROP_OUT_OF_RANGE,
                              channel=channel.name, origin="adversary")
            return
        self.schedule(self.clock + duration, EventKind.DELIVER, dst, (self.adversary_id, frame, channel, "adversary"))

    # handlers

    def _on_move(self, event: Event) -> None:
        self.nodes[event.node].position = self.nodes[event.node].position_at(self.clock)

    def _on_generate(self, event: Event) -> None:
        index, remaining = event.data
        if self.clock > self.config.duration_s:
            return
        w = self.config.workload[index]
        node, peer = self.nodes[w.src], self.nodes[w.dst]
        channel = Channel[w.channel]
        with counting(self.counters, node.id):
            T = node.next_timestamp(self.clock)
            nonce = self.rng.randbytes(32)
            if channel in (Channel.V2VC, Channel.R2VC):
                payload = self._upload_body(node, w.payload_size, T)
            else:
                payload = self.rng.randbytes(w.payload_size)
            ini = Initiator(node.endpoint, channel, peer.endpoint.pid)
            frame = ini.request(payload, T, nonce)
        node.initiators[nonce] = ini
        self._send(node.id, peer.id, frame.encode(), channel)
        if remaining > 1:
            self.schedule(self.clock + w.period_s, EventKind.GENERATE, w.src, (index, remaining - 1))

    def _upload_body(self, node: SimNode, size: int, T: int) -> bytes:
        data_key, k_search = owner_keys(node.owner_secret)
        k = min(self.config.store.keywords_per_record, len(self.vocabulary))
        keywords = self.rng.sample(self.vocabulary, k)
        rec = make_record(node.endpoint.pid, self.rng.randbytes(size), keywords, data_key, k_search,
                          T, self.rng.randbytes(32))
        return rec.upload_body()

    def _on_deliver(self, event: Event) -> None:
        src, frame, channel, origin = event.data
        node = self.nodes[event.node]
        replies: list[tuple[str, bytes, Channel]] = []
        with counting(self.counters, node.id):
            try:
                verified = verify_request(node.endpoint, frame, _ms(self.clock), node.cache)
                replies = self._dispatch(node, verified)
                outcome = ACCEPTED
            except FrameRejected as exc:
                outcome = exc.reason
        self.trace.append(self.clock, src, node.id, frame, outcome, channel=channel.name, origin=origin)
        for dst, reply, ch in replies:
            self._send(node.id, dst, reply, ch)

    def _dispatch(self, node: SimNode, v: VerifiedMessage) -> list[tuple[str, bytes, Channel]]:
        peer = self.pid_to_node.get(v.sender_pid)
        if v.msg_type == MsgType.REQUEST:
            if node.store is not None:
                try:
                    node.store.ingest(v)
                except StoreError:
                    self.store_errors += 1
            T = node.next_timestamp(self.clock)
            response = node.responder.on_request(v, T, self.rng.randbytes(32))
            return [(peer, response.encode(), v.channel)]
        if v.msg_type == MsgType.RESPONSE:
            ini = node.initiators.pop(v.payload[:32], None)
            if ini is None:
                return []
            confirm = ini.on_response(v, node.next_timestamp(self.clock))
            return [(peer, confirm.encode(), v.channel)]
        if v.msg_type == MsgType.KEY_CONFIRM:
            try:
                node.responder.on_confirm(v)
            except FrameRejected:
                self.sessions["confirm_failed"] += 1
                raise
            self.sessions["established"] += 1
        return []

    def _on_adversary_act(self, event: Event) -> None:
        if event.data[0] == "replay":
            _, src, dst, frame, channel = event.data
            self._inject(self.links[(src, dst)], dst, frame, channel)
            return
        entry = event.data[1]
        channel = Channel[entry.channel]
        victim = self.nodes[entry.impersonate].endpoint.pid if entry.impersonate else self.rng.randbytes(32)
        frame = adv.craft_impersonation(channel, victim, _ms(self.clock), self.rng, self.group,
                                        cert=self.observed_certs.get(victim))
        link = next((m for (a, b), m in self.links.items() if b == entry.target
                     and a == (entry.impersonate or a)), None)
        if link is None:
            link = default_link(LinkKind.DSRC)
        self._inject(link, entry.target, frame, channel)

    # results

    def report(self, cost_model: CostModel | None = None) -> MetricsReport:
        stores = [n.store for n in self.nodes.values() if n.store is not None]
        r = report(self.counters, cost_model, self.trace, stores[0] if stores else None,
                   generated=self.generated, sessions=dict(self.sessions))
        if len(stores) > 1:
            r.storage_bytes = sum(s.storage_bytes() for s in stores)
        return r


def step(world: World) -> World:
    world.step()
    return world


def run_scenario(config: ScenarioConfig, seed: int) -> tuple[TraceLog, MetricsReport]:
    world = World(config, seed).run()
    return world.trace, world.report()
