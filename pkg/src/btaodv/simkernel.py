"""Deterministic discrete-event engine hosting baseband + AODV on every node.

Clock is integer microseconds. Events run in (time, insertion order); the
only randomness is optional per-packet flow jitter drawn from a seeded RNG.

Data frames go through the TDD model: each piconet's master runs one
exchange per tick (master frame on an even slot, slave reply right after),
polling its present slaves round-robin. Routing control messages (RREQ,
RREP, RERR) take a fixed `control_hop_slots` per link from the next slot
boundary, so a flood advances one hop per control period everywhere in the
scatternet.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from . import aodv
from .aodv import AodvConfig, BufferAndDiscover, NodeAodvState, RerrPacket, RrepPacket, RreqPacket
from .baseband import (
    DATA,
    MAX_PAYLOAD,
    SLOT_US,
    BridgeSchedule,
    LinkQueue,
    Poller,
    PayloadTooLarge,
    frame_for_payload,
    slot_at_or_after,
)
from .metrics import (
    BUFFER_OVERFLOW,
    LOOP_TTL_EXPIRED,
    NO_ROUTE,
    QUEUE_OVERFLOW,
    BadInterval,
    LossReport,
    Metrics,
)
from .topology import Scatternet, TopologyError, UnknownNode


class EventKind(str, Enum):
    SLOT_TICK = "SlotTick"
    FRAME_DELIVERY = "FrameDelivery"
    TIMER_FIRE = "TimerFire"
    FLOW_PACKET = "FlowPacket"
    MIGRATE = "Migrate"
    LEAVE = "Leave"
    INJECT_STATIC_ROUTES = "InjectStaticRoutes"
    END_OF_RUN = "EndOfRun"


class SimError(Exception):
    pass


class TimeInPast(SimError):
    pass


@dataclass
class SimConfig:
    num_nodes: int = 20
    area: tuple[int, int] = (500, 400)
    queue_length: int = 50
    routing: str = "AODV"
    basic_rate: str = "5MB"
    data_rate: str = "10MB"
    channel: str = "Wireless"
    propagation: str = "TwoRayGround"
    mac: str = "Mac/802_11"
    antenna: str = "OmniDirectional"
    seed: int = 1
    until_ms: int = 2000
    bridge_window_slots: int = 8
    control_hop_slots: int = 2
    housekeeping_ms: int = 100
    node_traversal_ms: int = 40
    jitter_us: int = 0
    check_loops: bool = False
    trace: bool = True
    aodv: AodvConfig = field(default_factory=AodvConfig)


@dataclass(frozen=True)
class TrafficFlow:
    src: int
    dst: int
    start_ms: float
    stop_ms: float
    rate_pps: float
    payload: int = 128


@dataclass
class DataPacket:
    id: int
    src: int
    dst: int
    size: int
    ttl: int
    t_send: int
    flow: int = -1


@dataclass(order=True)
class Event:
    time: int
    seq: int
    kind: EventKind = field(compare=False)
    data: Any = field(default=None, compare=False)


@dataclass
class LogEntry:
    t: int
    node: int | None
    ev: str
    fields: dict[str, Any]

    def format(self) -> str:
        parts = [f"t={self.t}", f"node={'-' if self.node is None else self.node}", f"ev={self.ev}"]
        parts += [f"{k}={v}" for k, v in self.fields.items()]
        return " ".join(parts)


@dataclass
class RunReport:
    events_processed: int
    end_time_us: int
    loss: LossReport
    average_delay_us: float | None
    errors: list[str]
    loop_violations: list[str]
    stats: dict[str, int]
    metrics: Metrics = field(repr=False)
    trace: list[str] = field(repr=False, default_factory=list)


def discovery_round_trip_bound_us(diameter: int, node_traversal_ms: int = 40) -> int:
    """Time budget for one RREQ flood out and RREP back across `diameter` hops."""
    return 2 * node_traversal_ms * 1000 * max(diameter, 1)


def _ctrl_name(msg: Any) -> str:
    if isinstance(msg, RreqPacket):
        return "RREQ"
    if isinstance(msg, RrepPacket):
        return "RREP"
    return "RERR"


class Simulator:
    def __init__(self, net: Scatternet, config: SimConfig | None = None) -> None:
        self.net = net
        self.config = config or SimConfig()
        self.now = 0
        self.metrics = Metrics()
        self.states: dict[int, NodeAodvState] = {n: NodeAodvState(n, self.config.aodv) for n in net.nodes()}
        self.log: list[LogEntry] = []
        self.errors: list[str] = []
        self.loop_violations: list[str] = []
        self.stats: Counter = Counter()
        self.static_routes: dict[int, dict[int, int]] = {}
        self.flows: list[TrafficFlow] = []
        self.route_observers: list[Callable[[Simulator, int, int], None]] = []
        self.rng = random.Random(self.config.seed)

        self._heap: list[Event] = []
        self._seq = 0
        self._events = 0
        self._queues: dict[tuple[int, int], LinkQueue] = {}
        self._pollers: dict[str, Poller] = {}
        self._bridges: dict[int, BridgeSchedule | None] = {}
        self._channel_free: dict[str, int] = {}
        self._bridge_served: dict[tuple[str, int], int] = {}
        self._in_air: dict[int, DataPacket] = {}
        self._discovery_id: dict[tuple[int, int], int] = {}
        self._next_packet = 0

        for pid in net.piconets:
            self._schedule_at(0, EventKind.SLOT_TICK, pid)
        if self.states:
            self._schedule_at(0, EventKind.TIMER_FIRE, ("housekeeping",))

    # -- event queue -----------------------------------------------------------

    def schedule(self, event: Event) -> Event:
        if event.time < self.now:
            raise TimeInPast(f"event at {event.time} us scheduled at {self.now} us")
        event.seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, event)
        return event

    def _schedule_at(self, t: int, kind: EventKind, data: Any = None) -> Event:
        return self.schedule(Event(t, 0, kind, data))

    def run_until(self, until_ms: float) -> RunReport:
        until = int(round(until_ms * 1000))
        while self._heap and self._heap[0].time <= until:
            ev = heapq.heappop(self._heap)
            assert ev.time >= self.now, "clock went backwards"
            self.now = ev.time
            self._dispatch(ev)
            self._events += 1
        self.now = max(self.now, until)
        return self._end_of_run()

    def _dispatch(self, ev: Event) -> None:
        kind = ev.kind
        if kind is EventKind.SLOT_TICK:
            self._slot_tick(ev.data)
        elif kind is EventKind.FRAME_DELIVERY:
            self._frame_delivery(*ev.data)
        elif kind is EventKind.TIMER_FIRE:
            self._timer(ev.data)
        elif kind is EventKind.FLOW_PACKET:
            self._flow_packet(*ev.data)
        elif kind is EventKind.MIGRATE:
            self._migrate(*ev.data)
        elif kind is EventKind.LEAVE:
            self._leave(*ev.data)
        elif kind is EventKind.INJECT_STATIC_ROUTES:
            self._inject(ev.data)
        else:  # pragma: no cover
            raise SimError(f"unknown event {kind}")

    # -- scenario API ----------------------------------------------------------

    def attach_flow(self, flow: TrafficFlow) -> None:
        for n in (flow.src, flow.dst):
            if n not in self.net:
                raise UnknownNode(f"flow endpoint {n} is not in the scatternet")
        if flow.src == flow.dst:
            raise BadInterval("flow source and destination must differ")
        if flow.rate_pps <= 0 or flow.start_ms >= flow.stop_ms or flow.start_ms < 0:
            raise BadInterval(f"bad flow interval/rate: {flow}")
        if flow.payload > MAX_PAYLOAD:
            raise PayloadTooLarge(f"{flow.payload} bytes exceed one DH5 frame; fragmentation is not modelled")
        self.flows.append(flow)
        idx = len(self.flows) - 1
        t0 = self._flow_time(flow, 0)
        if t0 < self._stop_us(flow):
            self._schedule_at(max(t0, self.now), EventKind.FLOW_PACKET, (idx, 0))

    def apply_migration(self, node: int, to: str, at_ms: float) -> None:
        self._schedule_at(int(round(at_ms * 1000)), EventKind.MIGRATE, (node, to))

    def apply_leave(self, node: int, pid: str, at_ms: float) -> None:
        self._schedule_at(int(round(at_ms * 1000)), EventKind.LEAVE, (node, pid))

    def inject_static_routes(self, assignments: list[tuple[int, int, int]], at_ms: float) -> None:
        self._schedule_at(int(round(at_ms * 1000)), EventKind.INJECT_STATIC_ROUTES, list(assignments))

    # -- logging -----------------------------------------------------------------

    def _log(self, node: int | None, ev: str, **fields: Any) -> None:
        if self.config.trace:
            self.log.append(LogEntry(self.now, node, ev, fields))

    def events_of(self, ev: str, node: int | None = None) -> list[LogEntry]:
        return [e for e in self.log if e.ev == ev and (node is None or e.node == node)]

    def _error(self, msg: str, node: int | None = None) -> None:
        self.errors.append(f"t={self.now} {msg}")
        self._log(node, "SCENARIO_ERROR", msg=msg.replace(" ", "_"))

    # -- baseband ------------------------------------------------------------------

    def _bridge(self, node: int) -> BridgeSchedule | None:
        if node not in self._bridges:
            pids = self.net.pids_of(node) if node in self.net else []
            self._bridges[node] = (
                BridgeSchedule(node, pids, self.config.bridge_window_slots, list(self.net.piconets))
                if len(pids) >= 2 else None
            )
        return self._bridges[node]

    def _remaining(self, node: int, pid: str, slot: int) -> float:
        """Slots left for `node` in `pid` starting at `slot` (0 when absent)."""
        sched = self._bridge(node)
        if sched is None:
            return math.inf
        if sched.present_in(slot) != pid:
            return 0
        return sched.window_end(slot) - slot

    def queue(self, owner: int, peer: int) -> LinkQueue:
        q = self._queues.get((owner, peer))
        if q is None:
            q = self._queues[(owner, peer)] = LinkQueue(owner, peer, self.config.queue_length)
        return q

    def _tick_at(self, pid: str, slot: int) -> None:
        slot += slot % 2
        self._schedule_at(slot * SLOT_US, EventKind.SLOT_TICK, pid)

    def _slot_tick(self, pid: str) -> None:
        pic = self.net.piconets.get(pid)
        if pic is None:
            return
        assert self.now % SLOT_US == 0
        s = self.now // SLOT_US
        assert s % 2 == 0, "master transmissions start on even slots"
        assert self._channel_free.get(pid, 0) <= self.now, "piconet channel double-booked"
        master = pic.master
        m_left = self._remaining(master, pid, s)
        if m_left < 2:
            sched = self._bridge(master)
            start = sched.next_window_start(pid, s + int(m_left))
            self._tick_at(pid, start if start is not None else s + 2)
            return
        present = [x for x in pic.slaves if min(m_left, self._remaining(x, pid, s)) >= 2]
        poller = self._pollers.setdefault(pid, Poller())
        x = self._bridge_due(pid, present, s)
        if x is None:
            x = poller.next(pic.slaves, present)
        if x is None:
            self._tick_at(pid, s + 2)
            return
        if self._bridge(x) is not None:
            self._bridge_served[(pid, x)] = s // self.config.bridge_window_slots
        room = min(m_left, self._remaining(x, pid, s))
        down, up = self._queues.get((master, x)), self._queues.get((x, master))
        fm = down.peek().slots if down else 1
        fr = up.peek().slots if up else 1
        for a, b in ((fm, fr), (fm, 1), (1, fr), (1, 1)):
            if a + b <= room:
                break
        if down and a == fm and down.peek() is not None:
            self._send_frame(down.pop(), master, x, (s + a) * SLOT_US)
        else:
            self.stats["polls"] += 1
        if up and b == fr and up.peek() is not None:
            self._send_frame(up.pop(), x, master, (s + a + b) * SLOT_US)
        else:
            self.stats["nulls"] += 1
        self.stats["busy_slots"] += a + b
        self._channel_free[pid] = (s + a + b) * SLOT_US
        self._tick_at(pid, s + a + b)

    def _bridge_due(self, pid: str, present: list[int], s: int) -> int | None:
        """A present bridge slave not yet served in its current window, if any.

        Bridges are reachable for only one window per rotation, so each gets
        the first exchange of its window ahead of the round-robin.
        """
        w = s // self.config.bridge_window_slots
        for x in present:
            if self._bridge(x) is not None and self._bridge_served.get((pid, x)) != w:
                return x
        return None

    def _send_frame(self, frame, sender: int, receiver: int, t_end: int) -> None:
        pkt = frame.packet
        self.stats["data_frames"] += 1
        self._in_air[pkt.id] = pkt
        self._schedule_at(t_end, EventKind.FRAME_DELIVERY, ("data", pkt, sender, receiver))

    def _send_control(self, sender: int, receiver: int, msg: Any) -> None:
        self.stats["control_frames"] += 1
        t = (slot_at_or_after(self.now) + self.config.control_hop_slots) * SLOT_US
        self._schedule_at(t, EventKind.FRAME_DELIVERY, ("ctrl", msg, sender, receiver))

    def _frame_delivery(self, kind: str, msg: Any, sender: int, receiver: int) -> None:
        if kind == "data":
            del self._in_air[msg.id]
            self._route_data(receiver, msg, sender)
            return
        if receiver not in self.net or not self.net.link_exists(sender, receiver):
            self._log(receiver, "CTRL_LOST", type=_ctrl_name(msg), frm=sender)
            return
        self._sweep(receiver)
        if isinstance(msg, RreqPacket):
            self._on_rreq(receiver, msg, sender)
        elif isinstance(msg, RrepPacket):
            self._on_rrep(receiver, msg, sender)
        else:
            self._on_rerr(receiver, msg, sender)

    # -- data plane --------------------------------------------------------------

    def _drop(self, node: int, pkt: DataPacket, reason: str) -> None:
        self.metrics.record_drop(pkt.id, reason, self.now)
        self._log(node, "DROP", id=pkt.id, reason=reason)

    def _route_data(self, n: int, pkt: DataPacket, sender: int | None) -> None:
        if n == pkt.dst:
            self.metrics.record_receive(pkt.id, self.now)
            self._log(n, "RECV", id=pkt.id, src=pkt.src, delay_us=self.now - pkt.t_send)
            return
        if pkt.ttl <= 0:
            self._drop(n, pkt, LOOP_TTL_EXPIRED)
            return
        via = self.static_routes.get(n, {}).get(pkt.dst)
        if via is not None:
            if self.net.link_exists(n, via):
                self._enqueue_data(n, via, pkt)
            else:
                self._drop(n, pkt, NO_ROUTE)
            return
        st = self.states[n]
        self._sweep(n)
        try:
            res = aodv.forward_data(st, pkt.dst, self.now, sender, (pkt, sender))
        except aodv.BufferOverflow:
            self._drop(n, pkt, BUFFER_OVERFLOW)
            return
        if isinstance(res, BufferAndDiscover):
            self._log(n, "BUFFER", id=pkt.id, dst=pkt.dst)
            if res.rreq is not None:
                self._start_discovery(n, res.rreq)
            return
        self._enqueue_data(n, res, pkt)

    def _enqueue_data(self, n: int, next_hop: int, pkt: DataPacket) -> None:
        pkt.ttl -= 1
        if not self.queue(n, next_hop).enqueue(frame_for_payload(pkt.size, DATA, pkt)):
            self._drop(n, pkt, QUEUE_OVERFLOW)

    def _flow_time(self, flow: TrafficFlow, k: int) -> int:
        return int(round(flow.start_ms * 1000)) + int(k * 1_000_000 / flow.rate_pps)

    def _stop_us(self, flow: TrafficFlow) -> int:
        return int(round(flow.stop_ms * 1000))

    def _flow_packet(self, idx: int, k: int) -> None:
        flow = self.flows[idx]
        pkt = DataPacket(self._next_packet, flow.src, flow.dst, flow.payload, self.config.aodv.hop_limit, self.now, idx)
        self._next_packet += 1
        self.metrics.record_send(pkt.id, pkt.src, pkt.dst, self.now, pkt.size)
        self._log(pkt.src, "SEND", id=pkt.id, dst=pkt.dst, size=pkt.size)
        self._route_data(pkt.src, pkt, None)
        t_next = self._flow_time(flow, k + 1)
        if t_next < self._stop_us(flow):
            if self.config.jitter_us:
                t_next += self.rng.randrange(self.config.jitter_us + 1)
            self._schedule_at(max(t_next, self.now), EventKind.FLOW_PACKET, (idx, k + 1))

    # -- routing control -----------------------------------------------------------

    def _sweep(self, n: int) -> None:
        st = self.states[n]
        before = set(st.reverse_paths)
        for d in aodv.expire_routes(st, self.now):
            self._log(n, "ROUTE_EXPIRE", dst=d)
            self._route_changed(n, d)
        for src in sorted(before - set(st.reverse_paths)):
            self._log(n, "REVERSE_EXPIRE", src=src)

    def _route_changed(self, node: int, dest: int) -> None:
        self.stats["route_changes"] += 1
        if self.config.check_loops:
            for msg in aodv.loop_violations(self.states, dest, self.now):
                self.loop_violations.append(f"t={self.now} after change at {node}: {msg}")
        for obs in self.route_observers:
            obs(self, node, dest)

    def _start_discovery(self, n: int, rreq: RreqPacket) -> None:
        self._log(n, "RREQ", dst=rreq.dest_addr, bid=rreq.broadcast_id, dseq=rreq.dest_seq)
        self._discovery_id[(n, rreq.dest_addr)] = rreq.broadcast_id
        for m in sorted(self.net.neighbors(n)):
            self._send_control(n, m, rreq)
        t = self.now + self.config.aodv.rreq_retry_interval_us
        self._schedule_at(t, EventKind.TIMER_FIRE, ("rreq_retry", n, rreq.dest_addr, rreq.broadcast_id))

    def _on_rreq(self, m: int, rreq: RreqPacket, prev: int) -> None:
        act = aodv.handle_rreq(self.states[m], rreq, prev, self.now, self.net.neighbors(m))
        if isinstance(act, aodv.Drop):
            self._log(m, "RREQ_DROP", src=rreq.source_addr, bid=rreq.broadcast_id, frm=prev)
        elif isinstance(act, aodv.UnicastRrep):
            r = act.rrep
            self._log(m, "RREP_SEND", src=r.source_addr, dst=r.dest_addr, dseq=r.dest_seq, hops=r.hop_cnt, to=act.to)
            self._send_control(m, act.to, r)
        else:
            r = act.rreq
            self._log(m, "RREQ_FWD", src=r.source_addr, bid=r.broadcast_id, hops=r.hop_cnt, frm=prev)
            for k in sorted(self.net.neighbors(m) - {prev}):
                self._send_control(m, k, r)

    def _on_rrep(self, m: int, rrep: RrepPacket, prev: int) -> None:
        act = aodv.handle_rrep(self.states[m], rrep, prev, self.now, self.net.neighbors(m))
        fields = dict(src=rrep.source_addr, dst=rrep.dest_addr, dseq=rrep.dest_seq, hops=rrep.hop_cnt + 1, frm=prev)
        if isinstance(act, aodv.Discard):
            self._log(m, "RREP_DISCARD", reason=act.reason, **fields)
            return
        if isinstance(act, aodv.ForwardOnly):
            r = act.rrep
            self._log(m, "RREP_RELAY", src=r.source_addr, dst=r.dest_addr, dseq=r.dest_seq, hops=r.hop_cnt, to=act.to)
            self._send_control(m, act.to, r)
            return
        self._log(m, "ROUTE_INSTALL", **fields)
        self._route_changed(m, rrep.dest_addr)
        if isinstance(act, aodv.InstallAndForward):
            if self.net.link_exists(m, act.to):
                self._send_control(m, act.to, act.rrep)
            else:
                self._log(m, "RREP_STUCK", src=rrep.source_addr, dst=rrep.dest_addr, to=act.to)
        self._route_found(m, rrep.dest_addr)

    def _route_found(self, n: int, dest: int) -> None:
        st = self.states[n]
        st.discovering.pop(dest, None)
        for pkt, sender in st.take_pending(dest):
            self._route_data(n, pkt, sender)

    def _send_rerr(self, n: int, rerr: RerrPacket) -> None:
        self._log(n, "RERR", unreachable=";".join(f"{d}:{s}" for d, s in rerr.unreachable),
                  to=",".join(map(str, sorted(rerr.recipients))) or "-")
        for r in sorted(rerr.recipients):
            if self.net.link_exists(n, r):
                self._send_control(n, r, rerr)

    def _on_rerr(self, m: int, rerr: RerrPacket, prev: int) -> None:
        out = aodv.handle_rerr(self.states[m], rerr, prev, self.now)
        if out is None:
            return
        dests = {d for d, _ in out.unreachable}
        for d in sorted(dests):
            self._route_changed(m, d)
        self._send_rerr(m, out)
        self._salvage(m, prev, dests)

    def _salvage(self, n: int, peer: int, dests: set[int] | None = None) -> None:
        """Pull frames for broken routes off the n -> peer queue and re-route them."""
        q = self._queues.get((n, peer))
        if q is None:
            return
        keep, moved = [], []
        for fr in q.drain():
            if dests is None or fr.packet.dst in dests:
                moved.append(fr)
            else:
                keep.append(fr)
        q.frames.extend(keep)
        for fr in moved:
            pkt = fr.packet
            pkt.ttl += 1
            self._log(n, "SALVAGE", id=pkt.id, dst=pkt.dst)
            self._route_data(n, pkt, None)

    def _link_down(self, a: int, b: int) -> None:
        self.stats["link_breaks"] += 1
        for x, y in ((a, b), (b, a)):
            self._log(x, "LINK_BREAK", peer=y)
            rerr = aodv.handle_link_break(self.states[x], y, self.now)
            if rerr is not None:
                for d, _ in rerr.unreachable:
                    self._route_changed(x, d)
                self._send_rerr(x, rerr)
        for x, y in ((a, b), (b, a)):
            self._salvage(x, y)
            self._queues.pop((x, y), None)

    # -- timers and scenario events ------------------------------------------------

    def _timer(self, data: tuple) -> None:
        if data[0] == "housekeeping":
            for n in sorted(self.states):
                self._sweep(n)
            self._schedule_at(self.now + self.config.housekeeping_ms * 1000, EventKind.TIMER_FIRE, data)
            return
        _, n, dest, bid = data
        st = self.states[n]
        if self._discovery_id.get((n, dest)) != bid or dest not in st.discovering:
            return
        self._sweep(n)
        if st.usable_route(dest, self.now) is not None:
            self._route_found(n, dest)
            return
        if st.discovering[dest] < self.config.aodv.rreq_retries:
            st.discovering[dest] += 1
            self._start_discovery(n, aodv.originate_rreq(st, dest, self.now))
            return
        st.discovering.pop(dest)
        self._log(n, "DISCOVERY_FAILED", dst=dest)
        for pkt, _ in st.take_pending(dest):
            self._drop(n, pkt, NO_ROUTE)

    def _migrate(self, node: int, pid: str) -> None:
        try:
            self.net.migrate_as_slave(node, pid)
        except TopologyError as e:
            self._error(f"migrate {node} to {pid}: {type(e).__name__}: {e}", node)
            return
        self._bridges.clear()
        self._log(node, "MIGRATE", to=pid)

    def _leave(self, node: int, pid: str) -> None:
        try:
            lost = self.net.leave(node, pid)
        except TopologyError as e:
            self._error(f"leave {node} from {pid}: {type(e).__name__}: {e}", node)
            return
        self._bridges.clear()
        self._log(node, "LEAVE", frm=pid)
        for a, b in lost:
            self._link_down(a, b)

    def _inject(self, assignments: list[tuple[int, int, int]]) -> None:
        for node, dest, via in assignments:
            if node not in self.net or via not in self.net or not self.net.link_exists(node, via):
                self._error(f"static {node} dest {dest} via {via}: NotANeighbor", node)
                continue
            self.static_routes.setdefault(node, {})[dest] = via
            self._log(node, "STATIC", dst=dest, via=via)

    # -- end of run ------------------------------------------------------------------

    def packets_in_network(self) -> int:
        queued = sum(len(q) for q in self._queues.values())
        buffered = sum(len(st.pending) for st in self.states.values())
        return queued + buffered + len(self._in_air)

    def _end_of_run(self) -> RunReport:
        for n in sorted(self.states):
            self._sweep(n)
        loss = self.metrics.loss_report()
        self._log(None, EventKind.END_OF_RUN.value, sent=loss.sent, received=loss.received,
                  dropped=loss.dropped, in_flight=loss.in_flight)
        assert loss.balances(), "packet conservation violated"
        assert loss.in_flight == self.packets_in_network(), "in-flight count disagrees with queues"
        return RunReport(
            events_processed=self._events,
            end_time_us=self.now,
            loss=loss,
            average_delay_us=self.metrics.average_delay(),
            errors=list(self.errors),
            loop_violations=list(self.loop_violations),
            stats=dict(self.stats),
            metrics=self.metrics,
            trace=[e.format() for e in self.log] if self.config.trace else [],
        )
