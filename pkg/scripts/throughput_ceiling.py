"""Saturate one master-slave link with each ACL frame size and report the goodput."""

import argparse

from btaodv.baseband import SLOT_CAPACITY
from btaodv.simkernel import SimConfig, Simulator, TrafficFlow
from btaodv.topology import Scatternet


def measure(payload: int, seconds: float) -> float:
    net = Scatternet()
    net.add_piconet(0, [1])
    sim = Simulator(net, SimConfig(trace=False))
    sim.attach_flow(TrafficFlow(0, 1, 0, seconds * 1000, 2000, payload))
    return sim.run_until(seconds * 1000).metrics.throughput_bps()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seconds", type=float, default=5)
    args = ap.parse_args()
    for slots, payload in SLOT_CAPACITY.items():
        kbps = measure(payload, args.seconds) / 1000
        print(f"{slots}-slot frame, {payload:3d} B payload: {kbps:8.1f} kb/s")


if __name__ == "__main__":
    main()
