"""Run the built-in 20-node migration scenario over several seeds and print a summary table."""

import argparse
import tempfile
from dataclasses import replace
from pathlib import Path

from btaodv.cli import run
from btaodv.scenario import BUILTINS, parse_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 42])
    ap.add_argument("--until", type=float, default=2000)
    ap.add_argument("--jitter-us", type=int, default=2000,
                    help="per-packet send jitter; without it every seed gives the same run")
    ap.add_argument("--out", default=None, help="keep per-seed outputs here (default: temp dir)")
    args = ap.parse_args()

    scenario = parse_scenario(BUILTINS["paper-scatternet"])
    scenario = replace(scenario, config=replace(scenario.config, jitter_us=args.jitter_us))
    root = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="btaodv-"))
    print(f"{'seed':>5} {'sent':>5} {'recv':>5} {'loss':>7} {'avg delay ms':>13}")
    for seed in args.seeds:
        out = root / f"seed{seed}"
        code = run(scenario, seed, out, args.until)
        stats = dict(line.split(" ", 1) for line in (out / "summary.txt").read_text().splitlines())
        print(f"{seed:>5} {stats['sent']:>5} {stats['received']:>5} {float(stats['loss_ratio']):>7.2%} "
              f"{stats['average_delay_ms']:>13}" + ("" if code == 0 else f"  exit {code}"))
    print(f"outputs in {root}")


if __name__ == "__main__":
    main()
