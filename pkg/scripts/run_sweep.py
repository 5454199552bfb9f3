"""Theory against Monte Carlo over a sigma x code grid, written as CSV.

    python3 scripts/run_sweep.py --out results/sweep.csv
"""

import argparse
import sys
import time

from isoqec.cli import main as cli_main

SIGMAS = "0,0.1,0.25,0.5,0.75,0.9,0.99"
CODES = ["2,1", "3,1", "3,2", "4,1", "4,2", "4,3"]


def parse():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="sweep.csv")
    return p.parse_args()


if __name__ == "__main__":
    args = parse()
    start = time.perf_counter()
    code = cli_main(["sweep", "--sigma-list", SIGMAS, "--codes", *CODES, "--samples", str(args.samples),
                     "--seed", str(args.seed), "--out", args.out])
    print(f"wrote {args.out} in {time.perf_counter() - start:.1f} s", file=sys.stderr)
    sys.exit(code)
