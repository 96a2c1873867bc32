"""Scatternet membership graph: piconets, master/slave roles and bridges.

Links exist only between a piconet's master and each of its slaves; two
slaves of the same piconet never talk directly.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

MAX_SLAVES = 7

MASTER = "master"
SLAVE = "slave"


class TopologyError(Exception):
    """Base class for structural violations of a scatternet."""


class PiconetFull(TopologyError):
    pass


class DuplicateMaster(TopologyError):
    pass


class DuplicateMember(TopologyError):
    pass


class AlreadyMember(TopologyError):
    pass


class NotAMember(TopologyError):
    pass


class UnknownNode(TopologyError):
    pass


class UnknownPiconet(TopologyError):
    pass


class EmptyScatternet(TopologyError):
    pass


@dataclass
class Piconet:
    pid: str
    master: int
    slaves: list[int] = field(default_factory=list)

    def members(self) -> list[int]:
        return [self.master, *self.slaves]


class Scatternet:
    """Set of piconets plus the node -> {pid: role} membership map."""

    def __init__(self) -> None:
        self.piconets: dict[str, Piconet] = {}
        self.membership: dict[int, dict[str, str]] = {}

    # -- construction ---------------------------------------------------

    def add_piconet(self, master: int, slaves: list[int] | tuple[int, ...] = (), pid: str | None = None) -> str:
        slaves = list(slaves)
        if pid is None:
            pid = f"P{len(self.piconets) + 1}"
            while pid in self.piconets:
                pid += "'"
        if pid in self.piconets:
            raise DuplicateMember(f"piconet id {pid} already in use")
        if len(slaves) > MAX_SLAVES:
            raise PiconetFull(f"{pid}: {len(slaves)} slaves, at most {MAX_SLAVES} allowed")
        if len(set(slaves)) != len(slaves) or master in slaves:
            raise DuplicateMember(f"{pid}: node listed twice")
        if self.masters_of(master):
            raise DuplicateMaster(f"node {master} already masters {self.masters_of(master)[0]}")
        for n in (master, *slaves):
            if n < 0:
                raise ValueError(f"node ids are non-negative, got {n}")
        self.piconets[pid] = Piconet(pid, master, slaves)
        self.membership.setdefault(master, {})[pid] = MASTER
        for s in slaves:
            self.membership.setdefault(s, {})[pid] = SLAVE
        return pid

    def migrate_as_slave(self, node: int, to: str) -> Scatternet:
        """Add a slave membership in `to`; existing memberships are kept."""
        self._require_node(node)
        pic = self._require_piconet(to)
        if to in self.membership[node]:
            raise AlreadyMember(f"node {node} already in {to}")
        if len(pic.slaves) >= MAX_SLAVES:
            raise PiconetFull(f"{to} already has {MAX_SLAVES} slaves")
        pic.slaves.append(node)
        self.membership[node][to] = SLAVE
        return self

    def leave(self, node: int, pid: str) -> list[tuple[int, int]]:
        """Drop `node` from `pid`. Returns the (a, b) links that disappeared.

        A master leaving its own piconet dissolves it. Nodes left with no
        membership at all stay known to the scatternet as isolated nodes.
        """
        self._require_node(node)
        pic = self._require_piconet(pid)
        role = self.membership[node].get(pid)
        if role is None:
            raise NotAMember(f"node {node} is not in {pid}")
        before = self.links()
        if role == MASTER:
            for s in pic.slaves:
                del self.membership[s][pid]
            del self.membership[node][pid]
            del self.piconets[pid]
        else:
            pic.slaves.remove(node)
            del self.membership[node][pid]
        return sorted(before - self.links())

    # -- queries ----------------------------------------------------------

    def nodes(self) -> list[int]:
        return sorted(self.membership)

    def __contains__(self, node: int) -> bool:
        return node in self.membership

    def masters_of(self, node: int) -> list[str]:
        return [pid for pid, role in self.membership.get(node, {}).items() if role == MASTER]

    def pids_of(self, node: int) -> list[str]:
        """Piconets `node` belongs to, in the order it joined them."""
        self._require_node(node)
        return list(self.membership[node])

    def role(self, node: int, pid: str) -> str | None:
        return self.membership.get(node, {}).get(pid)

    def is_bridge(self, node: int) -> bool:
        return len(self.membership.get(node, {})) >= 2

    def bridges(self) -> list[int]:
        return [n for n in self.nodes() if self.is_bridge(n)]

    def neighbors(self, node: int) -> set[int]:
        self._require_node(node)
        out: set[int] = set()
        for pid, role in self.membership[node].items():
            pic = self.piconets[pid]
            if role == MASTER:
                out.update(pic.slaves)
            else:
                out.add(pic.master)
        out.discard(node)
        return out

    def link_exists(self, a: int, b: int) -> bool:
        self._require_node(a)
        self._require_node(b)
        return b in self.neighbors(a)

    def links(self) -> set[tuple[int, int]]:
        """Undirected links as (low, high) pairs."""
        out = set()
        for pic in self.piconets.values():
            for s in pic.slaves:
                out.add((min(pic.master, s), max(pic.master, s)))
        return out

    def piconet_of_link(self, a: int, b: int) -> str | None:
        """The piconet carrying link a-b (the one where one of them is master)."""
        for pid, role in self.membership.get(a, {}).items():
            pic = self.piconets[pid]
            if role == MASTER and b in pic.slaves:
                return pid
            if role == SLAVE and pic.master == b:
                return pid
        return None

    def bfs_distances(self, source: int) -> dict[int, int]:
        self._require_node(source)
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in sorted(self.neighbors(u)):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        if not self.membership:
            raise EmptyScatternet("no nodes")
        start = min(self.membership)
        return len(self.bfs_distances(start)) == len(self.membership)

    def diameter(self) -> int:
        """Longest shortest path; raises if the scatternet is disconnected."""
        if not self.is_connected():
            raise TopologyError("diameter of a disconnected scatternet is undefined")
        return max(max(self.bfs_distances(n).values()) for n in self.nodes())

    def copy(self) -> Scatternet:
        other = Scatternet()
        other.piconets = {pid: Piconet(p.pid, p.master, list(p.slaves)) for pid, p in self.piconets.items()}
        other.membership = {n: dict(m) for n, m in self.membership.items()}
        return other

    def check_invariants(self) -> None:
        masters: dict[int, str] = {}
        for pid, pic in self.piconets.items():
            assert len(pic.slaves) <= MAX_SLAVES, pid
            assert pic.master not in pic.slaves, pid
            assert len(set(pic.slaves)) == len(pic.slaves), pid
            assert pic.master not in masters, pic.master
            masters[pic.master] = pid
            assert self.membership[pic.master][pid] == MASTER
            for s in pic.slaves:
                assert self.membership[s][pid] == SLAVE
        for n, pids in self.membership.items():
            for pid in pids:
                assert n in self.piconets[pid].members()

    def _require_node(self, node: int) -> None:
        if node not in self.membership:
            raise UnknownNode(f"node {node} is not in the scatternet")

    def _require_piconet(self, pid: str) -> Piconet:
        try:
            return self.piconets[pid]
        except KeyError:
            raise UnknownPiconet(f"no piconet {pid}") from None


def random_scatternet(rng: random.Random, num_nodes: int, num_piconets: int) -> Scatternet:
    """Connected random scatternet with `num_nodes` nodes in `num_piconets` piconets.

    Masters are the first `num_piconets` ids of a shuffled node list. Every
    non-master joins one piconet, then piconets are chained together through
    bridge slaves so the result is connected. Each piconet keeps one slave
    slot in reserve for the bridge that links it to an earlier piconet.
    """
    if num_piconets < 1 or num_nodes < num_piconets:
        raise ValueError("need at least one node per piconet")
    if num_nodes - num_piconets > num_piconets * (MAX_SLAVES - 1):
        raise ValueError(f"{num_nodes} nodes do not fit in {num_piconets} piconets")
    ids = list(range(num_nodes))
    rng.shuffle(ids)
    masters, rest = ids[:num_piconets], ids[num_piconets:]
    groups: list[list[int]] = [[] for _ in masters]
    for n in rest:
        open_groups = [g for g in range(num_piconets) if len(groups[g]) < MAX_SLAVES - 1]
        groups[rng.choice(open_groups)].append(n)
    net = Scatternet()
    pids = [net.add_piconet(m, g) for m, g in zip(masters, groups)]
    for i in range(1, num_piconets):
        # a member of an earlier piconet j joins i, spending i's reserved slot
        j = rng.randrange(i)
        candidates = [n for n in net.piconets[pids[j]].members() if pids[i] not in net.membership[n]]
        net.migrate_as_slave(rng.choice(candidates), pids[i])
    return net
