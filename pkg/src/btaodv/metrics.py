"""Per-packet lifecycle records and the delay / throughput / loss series."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

QUEUE_OVERFLOW = "QueueOverflow"
NO_ROUTE = "NoRoute"
LOOP_TTL_EXPIRED = "LoopTtlExpired"
BUFFER_OVERFLOW = "BufferOverflow"
DROP_REASONS = (QUEUE_OVERFLOW, NO_ROUTE, LOOP_TTL_EXPIRED, BUFFER_OVERFLOW)


class MetricsError(Exception):
    pass


class UnknownPacket(MetricsError):
    pass


class DoubleTerminal(MetricsError):
    pass


class BadInterval(MetricsError, ValueError):
    pass


@dataclass
class PacketRecord:
    id: int
    src: int
    dst: int
    t_send: int
    size: int = 0
    t_recv: int | None = None
    drop_reason: str | None = None
    t_drop: int | None = None

    @property
    def delivered(self) -> bool:
        return self.t_recv is not None

    @property
    def in_flight(self) -> bool:
        return self.t_recv is None and self.drop_reason is None

    @property
    def delay(self) -> int | None:
        return None if self.t_recv is None else self.t_recv - self.t_send


@dataclass
class MetricSeries:
    interval_ms: float
    buckets: list[tuple[float, float]] = field(default_factory=list)

    def values(self) -> list[float]:
        return [v for _, v in self.buckets]

    def to_csv(self) -> str:
        lines = ["time_ms,value"]
        lines += [f"{_fmt(t)},{_fmt(v)}" for t, v in self.buckets]
        return "\n".join(lines) + "\n"


@dataclass
class LossReport:
    sent: int
    received: int
    dropped_by_reason: dict[str, int]
    in_flight: int

    @property
    def dropped(self) -> int:
        return sum(self.dropped_by_reason.values())

    @property
    def loss_ratio(self) -> float:
        return self.dropped / self.sent if self.sent else 0.0

    def balances(self) -> bool:
        return self.sent == self.received + self.dropped + self.in_flight


def _fmt(x: float) -> str:
    if isinstance(x, int) or float(x).is_integer():
        return str(int(x))
    return f"{x:.6f}".rstrip("0")


class Metrics:
    """Collects PacketRecords; times are microseconds, series are in ms."""

    def __init__(self) -> None:
        self.records: dict[int, PacketRecord] = {}

    def record_send(self, id: int, src: int, dst: int, t: int, size: int = 0) -> None:
        if id in self.records:
            raise MetricsError(f"packet {id} sent twice")
        self.records[id] = PacketRecord(id, src, dst, t, size)

    def _terminal(self, id: int) -> PacketRecord:
        rec = self.records.get(id)
        if rec is None:
            raise UnknownPacket(f"packet {id} was never sent")
        if not rec.in_flight:
            raise DoubleTerminal(f"packet {id} already {'received' if rec.delivered else 'dropped'}")
        return rec

    def record_receive(self, id: int, t: int) -> None:
        rec = self._terminal(id)
        if t < rec.t_send:
            raise MetricsError(f"packet {id} received before it was sent")
        rec.t_recv = t

    def record_drop(self, id: int, reason: str, t: int) -> None:
        if reason not in DROP_REASONS:
            raise ValueError(f"unknown drop reason {reason!r}")
        rec = self._terminal(id)
        rec.drop_reason = reason
        rec.t_drop = t

    def delivered(self) -> list[PacketRecord]:
        return [r for r in self.records.values() if r.delivered]

    def average_delay(self) -> float | None:
        delays = sorted(r.delay for r in self.records.values() if r.delivered)
        if not delays:
            return None
        return sum(delays) / len(delays)

    def _buckets(self, interval_ms: float, until_ms: float | None, times_us: list[int]) -> list[float]:
        if interval_ms <= 0:
            raise BadInterval(f"interval must be positive, got {interval_ms}")
        width = interval_ms * 1000
        end = max(times_us, default=-1) + 1
        if until_ms is not None:
            end = max(end, until_ms * 1000)
        n = max(1, -int(-end // width))
        return [i * interval_ms for i in range(n)]

    def throughput_series(self, interval_ms: float, until_ms: float | None = None, bytes_mode: bool = False) -> MetricSeries:
        """Packets (or bytes) received per interval, bucketed by receive time."""
        recv = [r for r in self.records.values() if r.delivered]
        starts = self._buckets(interval_ms, until_ms, [r.t_recv for r in recv])
        counts = [0] * len(starts)
        for r in recv:
            counts[int(r.t_recv // (interval_ms * 1000))] += r.size if bytes_mode else 1
        return MetricSeries(interval_ms, list(zip(starts, counts)))

    def delay_series(self, interval_ms: float, until_ms: float | None = None) -> MetricSeries:
        """Mean delay in ms of packets received in each interval (0 when none)."""
        recv = [r for r in self.records.values() if r.delivered]
        starts = self._buckets(interval_ms, until_ms, [r.t_recv for r in recv])
        total = [0] * len(starts)
        count = [0] * len(starts)
        for r in recv:
            i = int(r.t_recv // (interval_ms * 1000))
            total[i] += r.delay
            count[i] += 1
        values = [t / c / 1000 if c else 0 for t, c in zip(total, count)]
        return MetricSeries(interval_ms, list(zip(starts, values)))

    def loss_series(self, interval_ms: float, until_ms: float | None = None) -> MetricSeries:
        """Packets dropped in each interval, bucketed by drop time."""
        dropped = [r for r in self.records.values() if r.drop_reason is not None]
        starts = self._buckets(interval_ms, until_ms, [r.t_drop for r in dropped])
        counts = [0] * len(starts)
        for r in dropped:
            counts[int(r.t_drop // (interval_ms * 1000))] += 1
        return MetricSeries(interval_ms, list(zip(starts, counts)))

    def loss_report(self) -> LossReport:
        reasons = Counter(r.drop_reason for r in self.records.values() if r.drop_reason is not None)
        return LossReport(
            sent=len(self.records),
            received=sum(1 for r in self.records.values() if r.delivered),
            dropped_by_reason={k: reasons[k] for k in DROP_REASONS if reasons[k]},
            in_flight=sum(1 for r in self.records.values() if r.in_flight),
        )

    def throughput_bps(self, t_from: int | None = None, t_to: int | None = None) -> float:
        """Delivered payload bits per second between the first and last receive.

        Counting from the first receive to the last, the n-1 packets after
        the first are attributed to that span.
        """
        recv = sorted(
            (r.t_recv, r.id, r.size) for r in self.records.values()
            if r.delivered and (t_from is None or r.t_recv >= t_from) and (t_to is None or r.t_recv < t_to)
        )
        if len(recv) < 2:
            return 0.0
        bits = sum(8 * size for _, _, size in recv[1:])
        return bits / ((recv[-1][0] - recv[0][0]) / 1e6)
