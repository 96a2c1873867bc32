import pytest
from hypothesis import given
from hypothesis import strategies as st

from btaodv.metrics import (
    LOOP_TTL_EXPIRED,
    QUEUE_OVERFLOW,
    BadInterval,
    DoubleTerminal,
    Metrics,
    MetricsError,
    UnknownPacket,
)

MS = 1000


def test_delay_of_one_packet():
    m = Metrics()
    m.record_send(1, 0, 9, 100)
    m.record_receive(1, 350)
    assert m.records[1].delay == 250


def test_terminal_errors():
    m = Metrics()
    with pytest.raises(UnknownPacket):
        m.record_receive(5, 10)
    m.record_send(5, 0, 1, 0)
    m.record_receive(5, 10)
    with pytest.raises(DoubleTerminal):
        m.record_drop(5, QUEUE_OVERFLOW, 20)
    with pytest.raises(MetricsError):
        m.record_send(5, 0, 1, 0)
    m.record_send(6, 0, 1, 100)
    with pytest.raises(MetricsError):
        m.record_receive(6, 50)
    with pytest.raises(ValueError):
        m.record_drop(6, "Gremlins", 200)


def test_average_delay():
    m = Metrics()
    assert m.average_delay() is None
    m.record_send(1, 0, 1, 0)
    m.record_send(2, 0, 1, 0)
    m.record_receive(1, 200)
    m.record_receive(2, 400)
    assert m.average_delay() == 300


def test_average_delay_counts_discovery_buffering():
    # packet 0 waits 40 ms in the route buffer, the next two find the route
    m = Metrics()
    for i, t in enumerate((0, 50 * MS, 100 * MS)):
        m.record_send(i, 0, 3, t)
    m.record_receive(0, 45 * MS)
    m.record_receive(1, 55 * MS)
    m.record_receive(2, 105 * MS)
    assert m.average_delay() == pytest.approx((45 + 5 + 5) * MS / 3)


def test_throughput_buckets():
    m = Metrics()
    for i, t in enumerate((100, 150, 900)):
        m.record_send(i, 0, 1, 0)
        m.record_receive(i, t * MS)
    assert m.throughput_series(500).buckets == [(0, 2), (500, 1)]
    with pytest.raises(BadInterval):
        m.throughput_series(0)


def test_empty_series_all_zero():
    s = Metrics().throughput_series(100, until_ms=300)
    assert s.buckets == [(0, 0), (100, 0), (200, 0)]
    assert s.to_csv() == "time_ms,value\n0,0\n100,0\n200,0\n"


def test_bytes_mode():
    m = Metrics()
    m.record_send(0, 0, 1, 0, size=100)
    m.record_receive(0, 10)
    assert m.throughput_series(100, bytes_mode=True).values() == [100]


def test_loss_report_balances():
    m = Metrics()
    for i in range(10):
        m.record_send(i, 0, 1, 0)
    for i in range(9):
        m.record_receive(i, 5)
    m.record_drop(9, QUEUE_OVERFLOW, 5)
    r = m.loss_report()
    assert (r.sent, r.received, r.dropped_by_reason, r.in_flight) == (10, 9, {QUEUE_OVERFLOW: 1}, 0)
    assert r.balances() and r.loss_ratio == 0.1
    z = Metrics().loss_report()
    assert (z.sent, z.received, z.dropped, z.in_flight) == (0, 0, 0, 0) and z.loss_ratio == 0.0


def test_loss_series_by_drop_time():
    m = Metrics()
    m.record_send(0, 0, 1, 0)
    m.record_drop(0, LOOP_TTL_EXPIRED, 150 * MS)
    assert m.loss_series(100).buckets == [(0, 0), (100, 1)]


def test_delay_series():
    m = Metrics()
    m.record_send(0, 0, 1, 0)
    m.record_receive(0, 120 * MS)
    m.record_send(1, 0, 1, 100 * MS)
    m.record_receive(1, 140 * MS)
    assert m.delay_series(100).buckets == [(0, 0), (100, 80)]


def test_throughput_bps_first_to_last():
    m = Metrics()
    for i in range(3):
        m.record_send(i, 0, 1, 0, size=125)
        m.record_receive(i, i * 1_000_000)
    assert m.throughput_bps() == pytest.approx(1000.0)


lifecycles = st.lists(
    st.tuples(st.integers(0, 5000), st.one_of(st.none(), st.integers(0, 5000)), st.sampled_from(["recv", "drop", "none"])),
    max_size=60,
)


def build(lc):
    m = Metrics()
    for i, (t0, dt, fate) in enumerate(lc):
        m.record_send(i, 0, 1, t0 * MS)
        if dt is None or fate == "none":
            continue
        if fate == "recv":
            m.record_receive(i, (t0 + dt) * MS)
        else:
            m.record_drop(i, QUEUE_OVERFLOW, (t0 + dt) * MS)
    return m


@given(lifecycles, st.integers(1, 700))
def test_conservation_and_bucket_sums(lc, interval):
    m = build(lc)
    r = m.loss_report()
    assert r.balances()
    assert sum(m.throughput_series(interval).values()) == r.received
    assert sum(m.loss_series(interval).values()) == r.dropped
    starts = [t for t, _ in m.throughput_series(interval).buckets]
    assert starts == [i * interval for i in range(len(starts))]


@given(lifecycles, st.randoms(use_true_random=False))
def test_average_delay_order_invariant(lc, rnd):
    order = list(range(len(lc)))
    rnd.shuffle(order)
    a, b = Metrics(), Metrics()
    for m, idx in ((a, range(len(lc))), (b, order)):
        for i in idx:
            m.record_send(i, 0, 1, lc[i][0])
        for i in idx:
            if lc[i][1] is not None and lc[i][2] == "recv":
                m.record_receive(i, lc[i][0] + lc[i][1])
    assert a.average_delay() == b.average_delay()
