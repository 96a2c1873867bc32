"""Command-line entry point: parse a scenario, run it, write CSV series and the trace."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .baseband import PayloadTooLarge
from .metrics import BadInterval
from .scenario import BUILTINS, Scenario, ScenarioError, build_simulation, parse_scenario
from .simkernel import RunReport
from .topology import TopologyError

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_IO = 3

OUTPUT_FILES = ("delay.csv", "throughput.csv", "loss.csv", "trace.log", "summary.txt")


def load_scenario(ref: str) -> Scenario:
    """`ref` is a built-in name or a path to a scenario file."""
    if ref in BUILTINS:
        return parse_scenario(BUILTINS[ref])
    return parse_scenario(Path(ref).read_text(encoding="utf-8"))


def summarize(report: RunReport, seed: int, until_ms: float) -> str:
    loss = report.loss
    lines = [
        f"seed {seed}",
        f"until_ms {until_ms:g}",
        f"events {report.events_processed}",
        f"sent {loss.sent}",
        f"received {loss.received}",
        f"dropped {loss.dropped}",
    ]
    lines += [f"dropped_{reason} {n}" for reason, n in loss.dropped_by_reason.items()]
    lines.append(f"in_flight {loss.in_flight}")
    lines.append(f"loss_ratio {loss.loss_ratio:.6f}")
    avg = report.average_delay_us
    lines.append("average_delay_ms -" if avg is None else f"average_delay_ms {avg / 1000:.6f}")
    lines += [f"error {e}" for e in report.errors]
    return "\n".join(lines) + "\n"


def run(scenario: Scenario, seed: int, out_dir: str | os.PathLike, until: float = 2000, interval: float = 100) -> int:
    try:
        sim = build_simulation(scenario, seed)
        report = sim.run_until(until)
    except (TopologyError, BadInterval, PayloadTooLarge) as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_SCENARIO
    m = report.metrics
    outputs = {
        "delay.csv": m.delay_series(interval, until).to_csv(),
        "throughput.csv": m.throughput_series(interval, until).to_csv(),
        "loss.csv": m.loss_series(interval, until).to_csv(),
        "trace.log": "".join(line + "\n" for line in report.trace),
        "summary.txt": summarize(report, seed, until),
    }
    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in outputs.items():
            (out / name).write_text(text, encoding="utf-8")
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    if report.errors:
        for err in report.errors:
            print(f"scenario error: {err}", file=sys.stderr)
        return EXIT_SCENARIO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="btaodv", description="AODV over a Bluetooth scatternet, slot-level simulation.")
    p.add_argument("--scenario", default="paper-scatternet",
                   help=f"scenario file or built-in name ({', '.join(BUILTINS)})")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--until", type=float, default=2000, help="simulated time in ms")
    p.add_argument("--out", default="./out", help="output directory")
    p.add_argument("--interval", type=float, default=100, help="series bucket width in ms")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.interval <= 0 or args.until < 0:
        print("--interval must be positive and --until non-negative", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as e:
        print(f"{args.scenario}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SCENARIO
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return run(scenario, args.seed, args.out, args.until, args.interval)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
