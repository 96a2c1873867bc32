"""Slotted TDD MAC: ACL frame sizing, master polling, link queues, bridge windows.

Times here are integer microseconds or slot indices. Even slots carry
master-to-slave transmissions, odd slots slave-to-master.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

SLOT_US = 625

ACCESS_CODE_BITS = 72
HEADER_BITS = 54
CRC_BITS = 16

# payload bytes that fit a 1-, 3- and 5-slot ACL frame
SLOT_CAPACITY = {1: 27, 3: 183, 5: 339}
MAX_PAYLOAD = SLOT_CAPACITY[5]

QUEUE_CAPACITY = 50
DEFAULT_BRIDGE_WINDOW = 8

POLL = "poll"
DATA = "data"
CONTROL = "control"
NULL = "null"


class PayloadTooLarge(ValueError):
    pass


class NoSuchLink(KeyError):
    pass


@dataclass(frozen=True)
class PacketFrame:
    payload_bytes: int
    slots: int
    kind: str = DATA
    packet: Any = field(default=None, compare=False)

    access_code_bits = ACCESS_CODE_BITS
    header_bits = HEADER_BITS
    crc_bits = CRC_BITS

    def __post_init__(self) -> None:
        if self.slots not in SLOT_CAPACITY:
            raise ValueError(f"ACL frames occupy 1, 3 or 5 slots, not {self.slots}")
        if not 0 <= self.payload_bytes <= SLOT_CAPACITY[self.slots]:
            raise ValueError(f"{self.payload_bytes} bytes do not fit a {self.slots}-slot frame")
        if self.kind in (POLL, NULL) and (self.payload_bytes or self.slots != 1):
            raise ValueError("poll/null frames are single-slot and carry no payload")

    @property
    def air_bits(self) -> int:
        bits = ACCESS_CODE_BITS + HEADER_BITS
        if self.kind not in (POLL, NULL):
            bits += CRC_BITS + 8 * self.payload_bytes
        return bits


POLL_FRAME = PacketFrame(0, 1, POLL)
NULL_FRAME = PacketFrame(0, 1, NULL)


def frame_for_payload(payload_bytes: int, kind: str = DATA, packet: Any = None) -> PacketFrame:
    """Smallest 1/3/5-slot frame whose payload capacity fits `payload_bytes`."""
    if payload_bytes < 0:
        raise ValueError("negative payload")
    for slots in (1, 3, 5):
        if payload_bytes <= SLOT_CAPACITY[slots]:
            return PacketFrame(payload_bytes, slots, kind, packet)
    raise PayloadTooLarge(f"{payload_bytes} bytes exceed one DH5 frame ({MAX_PAYLOAD}); fragment first")


def transmit_duration(frame: PacketFrame) -> int:
    return frame.slots * SLOT_US


def slot_time(slot_index: int) -> int:
    return slot_index * SLOT_US


def slot_at_or_after(t_us: int) -> int:
    return -(-t_us // SLOT_US)


@dataclass
class LinkQueue:
    """Drop-tail FIFO of frames waiting on the owner -> peer link."""

    owner: int
    peer: int
    capacity: int = QUEUE_CAPACITY
    frames: deque = field(default_factory=deque)
    arrivals: int = 0
    departures: int = 0
    drops: int = 0

    def __len__(self) -> int:
        return len(self.frames)

    def enqueue(self, frame: PacketFrame) -> bool:
        self.arrivals += 1
        if len(self.frames) >= self.capacity:
            self.drops += 1
            return False
        self.frames.append(frame)
        return True

    def peek(self) -> PacketFrame | None:
        return self.frames[0] if self.frames else None

    def pop(self) -> PacketFrame:
        self.departures += 1
        return self.frames.popleft()

    def drain(self) -> list[PacketFrame]:
        out = list(self.frames)
        self.frames.clear()
        return out


def enqueue(link: LinkQueue | None, frame: PacketFrame, on_drop: Callable[[PacketFrame], None] | None = None) -> bool:
    if link is None:
        raise NoSuchLink("no queue for that link")
    accepted = link.enqueue(frame)
    if not accepted and on_drop is not None:
        on_drop(frame)
    return accepted


@dataclass
class BridgeSchedule:
    """Presence of a multi-piconet node, one piconet per `window_slots` window.

    With `cycle` (the scatternet-wide piconet order) window w belongs to
    piconet cycle[w % len(cycle)]: a node that is a member goes there, so any
    two members of a piconet meet in its window. Outside its own piconets'
    turns the node round-robins over `rotation`. Without `cycle` it is a plain
    round-robin over `rotation`.
    """

    node: int
    rotation: list[str]
    window_slots: int = DEFAULT_BRIDGE_WINDOW
    cycle: list[str] | None = None

    def __post_init__(self) -> None:
        if self.window_slots <= 0:
            raise ValueError("window must be positive")

    def _in_window(self, w: int) -> str | None:
        if not self.rotation:
            return None
        if self.cycle:
            turn = self.cycle[w % len(self.cycle)]
            if turn in self.rotation:
                return turn
        return self.rotation[w % len(self.rotation)]

    def present_in(self, slot_index: int) -> str | None:
        return self._in_window(slot_index // self.window_slots)

    def window_end(self, slot_index: int) -> int:
        """First slot after the window containing `slot_index`."""
        return (slot_index // self.window_slots + 1) * self.window_slots

    def next_window_start(self, pid: str, slot_index: int) -> int | None:
        """First slot >= slot_index at which the node is present in `pid`."""
        if pid not in self.rotation:
            return None
        if self.present_in(slot_index) == pid:
            return slot_index
        w = slot_index // self.window_slots
        period = len(self.rotation) * max(1, len(self.cycle or ()))
        for k in range(1, period + 1):
            if self._in_window(w + k) == pid:
                return (w + k) * self.window_slots
        return None  # pragma: no cover - every member pid recurs within one period


def next_poll(slaves: list[int], last_polled: int | None, present: Callable[[int], bool] | Iterable[int] | None = None) -> int | None:
    """Round-robin pick of the next present slave after `last_polled`.

    `present` is either a predicate or a collection of the slaves reachable
    this slot; absent bridge slaves are skipped.
    """
    if not slaves:
        return None
    if present is None:
        is_present = lambda s: True  # noqa: E731
    elif callable(present):
        is_present = present
    else:
        here = set(present)
        is_present = here.__contains__
    start = slaves.index(last_polled) + 1 if last_polled in slaves else 0
    n = len(slaves)
    for k in range(n):
        s = slaves[(start + k) % n]
        if is_present(s):
            return s
    return None


class Poller:
    """Per-piconet polling cursor, kept across ticks and membership changes."""

    def __init__(self) -> None:
        self.last_polled: int | None = None
        self.polls = 0

    def next(self, slaves: list[int], present=None) -> int | None:
        s = next_poll(slaves, self.last_polled, present)
        if s is not None:
            self.last_polled = s
            self.polls += 1
        return s
