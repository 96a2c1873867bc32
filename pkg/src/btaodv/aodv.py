"""Per-node AODV routing state and the handlers that drive it.

Handlers are plain functions over a `NodeAodvState`; they mutate the state
and return an action object telling the caller what to transmit. Nothing in
here knows about slots or queues. All times are integer microseconds.

Route freshness is compared as the pair (dest_seq, -hop_count): a higher
sequence number always wins, fewer hops break ties. Every node also keeps
the freshest sequence number it has ever known per destination
(`last_seq`), bumped by one whenever a route is invalidated or times out.
A route is only ever installed if it is at least that fresh, which is what
keeps next-hop chains acyclic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

# drop / discard reasons
DUPLICATE = "Duplicate"
NO_REVERSE_PATH = "NoReversePath"
STALE = "Stale"
OWN_ROUTE = "OwnRoute"


class AodvError(Exception):
    pass


class RouteAlreadyKnown(AodvError):
    pass


class NotANeighbor(AodvError):
    pass


class NoCandidates(AodvError):
    pass


class BufferOverflow(AodvError):
    pass


@dataclass
class AodvConfig:
    route_lifetime_ms: int = 3000
    reverse_timeout_ms: int = 1000
    active_timeout_ms: int = 3000
    rreq_retries: int = 2
    rreq_retry_interval_ms: int = 500
    buffer_capacity: int = 50
    hop_limit: int = 32

    @property
    def route_lifetime_us(self) -> int:
        return self.route_lifetime_ms * 1000

    @property
    def reverse_timeout_us(self) -> int:
        return self.reverse_timeout_ms * 1000

    @property
    def active_timeout_us(self) -> int:
        return self.active_timeout_ms * 1000

    @property
    def rreq_retry_interval_us(self) -> int:
        return self.rreq_retry_interval_ms * 1000


@dataclass(frozen=True)
class RreqPacket:
    source_addr: int
    source_seq: int
    broadcast_id: int
    dest_addr: int
    dest_seq: int
    hop_cnt: int = 0

    @property
    def key(self) -> tuple[int, int]:
        return (self.source_addr, self.broadcast_id)


@dataclass(frozen=True)
class RrepPacket:
    source_addr: int
    dest_addr: int
    dest_seq: int
    hop_cnt: int
    lifetime_us: int


@dataclass(frozen=True)
class RerrPacket:
    unreachable: tuple[tuple[int, int], ...]
    # who the sender notifies; not part of the message contents
    recipients: frozenset[int] = field(default=frozenset(), compare=False)


@dataclass
class RouteEntry:
    destination: int
    next_hop: int
    hop_count: int
    dest_seq: int
    expiry: int
    active_neighbors: dict[int, int] = field(default_factory=dict)
    invalidated: bool = False

    def usable(self, now: int) -> bool:
        return now < self.expiry

    @property
    def preference(self) -> tuple[int, int]:
        return (self.dest_seq, -self.hop_count)


@dataclass
class ReversePath:
    prev_hop: int
    hop_count: int
    timeout: int


@dataclass
class NodeAodvState:
    node: int
    config: AodvConfig = field(default_factory=AodvConfig)
    own_seq: int = 0
    broadcast_id: int = 0
    route_table: dict[int, RouteEntry] = field(default_factory=dict)
    last_seq: dict[int, int] = field(default_factory=dict)
    seen_rreqs: dict[tuple[int, int], int] = field(default_factory=dict)
    reverse_paths: dict[int, ReversePath] = field(default_factory=dict)
    pending: deque = field(default_factory=deque)
    # dest -> retries already spent on the discovery in progress
    discovering: dict[int, int] = field(default_factory=dict)

    @property
    def next_broadcast_id(self) -> int:
        return self.broadcast_id + 1

    def usable_route(self, dest: int, now: int) -> RouteEntry | None:
        entry = self.route_table.get(dest)
        if entry is not None and entry.usable(now):
            return entry
        return None

    def freshness_floor(self, dest: int, now: int) -> int:
        """Lowest dest_seq this node may still accept for `dest`."""
        floor = self.last_seq.get(dest, 0)
        entry = self.route_table.get(dest)
        if entry is not None and not entry.usable(now) and not entry.invalidated:
            floor = max(floor, entry.dest_seq + 1)
        return floor

    def pending_for(self, dest: int) -> int:
        return sum(1 for d, _ in self.pending if d == dest)

    def take_pending(self, dest: int) -> list[Any]:
        keep, out = deque(), []
        for d, pkt in self.pending:
            if d == dest:
                out.append(pkt)
            else:
                keep.append((d, pkt))
        self.pending = keep
        return out


# -- actions ---------------------------------------------------------------


@dataclass(frozen=True)
class Rebroadcast:
    rreq: RreqPacket


@dataclass(frozen=True)
class UnicastRrep:
    rrep: RrepPacket
    to: int


@dataclass(frozen=True)
class Drop:
    reason: str


@dataclass(frozen=True)
class InstallAndForward:
    rrep: RrepPacket
    to: int
    entry: RouteEntry = field(compare=False)


@dataclass(frozen=True)
class ForwardOnly:
    """Relay an equally fresh answer built from the relay's own route."""

    rrep: RrepPacket
    to: int


@dataclass(frozen=True)
class InstallOnly:
    entry: RouteEntry = field(compare=False)


@dataclass(frozen=True)
class Discard:
    reason: str


@dataclass(frozen=True)
class BufferAndDiscover:
    rreq: RreqPacket | None


# -- route selection ---------------------------------------------------------


def preference(dest_seq: int, hop_count: int) -> tuple[int, int]:
    return (dest_seq, -hop_count)


def select_route(candidates: Iterable[tuple[int, int, Any]]) -> Any:
    """Pick the next hop among (dest_seq, hop_count, next_hop) candidates.

    Highest sequence number first, then fewest hops, then lowest next hop.
    """
    best = None
    for seq, hops, nh in candidates:
        k = (-seq, hops, nh)
        if best is None or k < best:
            best = k
    if best is None:
        raise NoCandidates("no candidate routes")
    return best[2]


def is_fresher(new_seq: int, new_hops: int, old: RouteEntry) -> bool:
    return preference(new_seq, new_hops) > old.preference


# -- handlers ----------------------------------------------------------------


def originate_rreq(state: NodeAodvState, dest: int, now: int = 0) -> RreqPacket:
    if state.usable_route(dest, now) is not None:
        raise RouteAlreadyKnown(f"node {state.node} already has a route to {dest}")
    state.broadcast_id += 1
    state.own_seq += 1
    rreq = RreqPacket(
        source_addr=state.node,
        source_seq=state.own_seq,
        broadcast_id=state.broadcast_id,
        dest_addr=dest,
        dest_seq=state.freshness_floor(dest, now),
        hop_cnt=0,
    )
    # echoes of our own request come back through neighbours; ignore them
    state.seen_rreqs[rreq.key] = now + state.config.reverse_timeout_us
    return rreq


def handle_rreq(state: NodeAodvState, rreq: RreqPacket, prev_hop: int, now: int, neighbors: Iterable[int] | None = None):
    if neighbors is not None and prev_hop not in neighbors:
        raise NotANeighbor(f"{prev_hop} is not a neighbour of {state.node}")
    src = rreq.source_addr
    if src != state.node:
        state.last_seq[src] = max(state.last_seq.get(src, 0), rreq.source_seq)
    timeout = state.seen_rreqs.get(rreq.key)
    if timeout is not None and timeout > now:
        return Drop(DUPLICATE)
    cfg = state.config
    state.seen_rreqs[rreq.key] = now + cfg.reverse_timeout_us
    state.reverse_paths[rreq.source_addr] = ReversePath(prev_hop, rreq.hop_cnt + 1, now + cfg.reverse_timeout_us)

    if rreq.dest_addr == state.node:
        state.own_seq = max(state.own_seq, rreq.dest_seq)
        rrep = RrepPacket(rreq.source_addr, state.node, state.own_seq, 0, cfg.route_lifetime_us)
        return UnicastRrep(rrep, prev_hop)

    entry = state.usable_route(rreq.dest_addr, now)
    # replying to the node we would forward through would point it back at us
    if entry is not None and entry.dest_seq >= rreq.dest_seq and entry.next_hop != prev_hop:
        entry.active_neighbors[prev_hop] = now
        rrep = RrepPacket(rreq.source_addr, rreq.dest_addr, entry.dest_seq, entry.hop_count, entry.expiry - now)
        return UnicastRrep(rrep, prev_hop)
    return Rebroadcast(replace(rreq, hop_cnt=rreq.hop_cnt + 1))


def handle_rrep(state: NodeAodvState, rrep: RrepPacket, prev_hop: int, now: int, neighbors: Iterable[int] | None = None):
    if neighbors is not None and prev_hop not in neighbors:
        raise NotANeighbor(f"{prev_hop} is not a neighbour of {state.node}")
    if rrep.dest_addr == state.node:
        return Discard(OWN_ROUTE)
    is_source = rrep.source_addr == state.node
    reverse = None
    if not is_source:
        reverse = state.reverse_paths.get(rrep.source_addr)
        if reverse is None or reverse.timeout <= now:
            return Discard(NO_REVERSE_PATH)

    dest, hops = rrep.dest_addr, rrep.hop_cnt + 1
    existing = state.usable_route(dest, now)
    if existing is not None:
        if not is_fresher(rrep.dest_seq, hops, existing):
            # an equally fresh answer keeps moving toward the source, unless that would point back at us
            if is_source or existing.dest_seq != rrep.dest_seq or existing.next_hop == reverse.prev_hop:
                return Discard(STALE)
            existing.active_neighbors[reverse.prev_hop] = now
            relay = RrepPacket(rrep.source_addr, dest, existing.dest_seq, existing.hop_count, existing.expiry - now)
            return ForwardOnly(relay, reverse.prev_hop)
    elif rrep.dest_seq < state.freshness_floor(dest, now):
        return Discard(STALE)

    entry = RouteEntry(
        destination=dest,
        next_hop=prev_hop,
        hop_count=hops,
        dest_seq=rrep.dest_seq,
        expiry=now + rrep.lifetime_us,
        active_neighbors=dict(existing.active_neighbors) if existing else {},
    )
    state.route_table[dest] = entry
    state.last_seq[dest] = max(state.last_seq.get(dest, 0), rrep.dest_seq)
    if is_source:
        return InstallOnly(entry)
    return InstallAndForward(replace(rrep, hop_cnt=hops), reverse.prev_hop, entry)


def expire_routes(state: NodeAodvState, now: int) -> list[int]:
    """Remove timed-out routes, reverse paths and RREQ records.

    Returns the destinations whose route entries were removed.
    """
    expired = sorted(d for d, e in state.route_table.items() if e.expiry <= now)
    for d in expired:
        e = state.route_table.pop(d)
        bump = e.dest_seq if e.invalidated else e.dest_seq + 1
        state.last_seq[d] = max(state.last_seq.get(d, 0), bump)
    for src in [s for s, rp in state.reverse_paths.items() if rp.timeout <= now]:
        del state.reverse_paths[src]
    for key in [k for k, t in state.seen_rreqs.items() if t <= now]:
        del state.seen_rreqs[key]
    return expired


def _active(entry: RouteEntry, now: int, active_timeout: int) -> set[int]:
    return {n for n, t in entry.active_neighbors.items() if now - t < active_timeout}


def _invalidate(state: NodeAodvState, entry: RouteEntry, new_seq: int, now: int) -> None:
    entry.dest_seq = new_seq
    entry.expiry = now
    entry.invalidated = True
    d = entry.destination
    state.last_seq[d] = max(state.last_seq.get(d, 0), new_seq)


def handle_link_break(state: NodeAodvState, dead_neighbor: int, now: int) -> RerrPacket | None:
    affected = [e for d, e in sorted(state.route_table.items()) if e.next_hop == dead_neighbor and e.usable(now)]
    if not affected:
        return None
    recipients: set[int] = set()
    for e in affected:
        recipients |= _active(e, now, state.config.active_timeout_us)
        _invalidate(state, e, e.dest_seq + 1, now)
    recipients.discard(dead_neighbor)
    recipients.discard(state.node)
    return RerrPacket(tuple((e.destination, e.dest_seq) for e in affected), frozenset(recipients))


def handle_rerr(state: NodeAodvState, rerr: RerrPacket, from_node: int, now: int) -> RerrPacket | None:
    """Invalidate routes that went through `from_node` to any listed destination."""
    affected = []
    recipients: set[int] = set()
    for dest, seq in rerr.unreachable:
        e = state.usable_route(dest, now)
        if e is None or e.next_hop != from_node:
            continue
        recipients |= _active(e, now, state.config.active_timeout_us)
        _invalidate(state, e, max(seq, e.dest_seq + 1), now)
        affected.append(e)
    if not affected:
        return None
    recipients.discard(from_node)
    recipients.discard(state.node)
    return RerrPacket(tuple((e.destination, e.dest_seq) for e in affected), frozenset(recipients))


def forward_data(state: NodeAodvState, dest: int, now: int, sender: int | None = None, packet: Any = None):
    """Next hop for a data packet, or buffer it and start discovery.

    `sender` is the neighbour the packet came from (None at the source); it
    becomes an active neighbour of the route.
    """
    entry = state.usable_route(dest, now)
    if entry is not None:
        entry.expiry = max(entry.expiry, now + state.config.active_timeout_us)
        if sender is not None:
            entry.active_neighbors[sender] = now
        return entry.next_hop
    if len(state.pending) >= state.config.buffer_capacity:
        raise BufferOverflow(f"node {state.node}: route buffer full")
    state.pending.append((dest, packet))
    if dest in state.discovering:
        return BufferAndDiscover(None)
    rreq = originate_rreq(state, dest, now)
    state.discovering[dest] = 0
    return BufferAndDiscover(rreq)


# -- global checks -------------------------------------------------------------


def next_hop_graph(states: Mapping[int, NodeAodvState], dest: int, now: int) -> dict[int, int]:
    graph = {}
    for n, st in states.items():
        e = st.usable_route(dest, now)
        if e is not None:
            graph[n] = e.next_hop
    return graph


def loop_violations(states: Mapping[int, NodeAodvState], dest: int, now: int) -> list[str]:
    """Cycles and freshness-order breaks in the next-hop graph toward `dest`."""
    graph = next_hop_graph(states, dest, now)
    problems = []
    for n, m in graph.items():
        if m == dest or m not in graph:
            continue
        en = states[n].route_table[dest]
        em = states[m].route_table[dest]
        if em.dest_seq < en.dest_seq or (em.dest_seq == en.dest_seq and em.hop_count >= en.hop_count):
            problems.append(
                f"dest {dest}: {n}(seq={en.dest_seq},hops={en.hop_count}) -> "
                f"{m}(seq={em.dest_seq},hops={em.hop_count}) not strictly fresher"
            )
    mark = {}  # 1 = on current walk, 2 = finished
    for start in graph:
        path = []
        n = start
        while n in graph and n not in mark:
            mark[n] = 1
            path.append(n)
            n = graph[n]
        if mark.get(n) == 1:
            cycle = path[path.index(n):]
            problems.append(f"dest {dest}: cycle {' -> '.join(map(str, cycle + [n]))}")
        for p in path:
            mark[p] = 2
    return problems
