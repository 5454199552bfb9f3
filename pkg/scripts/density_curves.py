"""Tabulate the normal error density against the polar angle for several sigma.

One CSV with a column per sigma; values are the polar-angle marginal
(the density of theta0 itself) so curves for different d are comparable.

    python3 scripts/density_curves.py --n 3 --out curves.csv
"""

import argparse
import csv
import math

import numpy as np

from isoqec.distributions import normal_density

SIGMAS = (0.0, 0.25, 0.5, 0.75, 0.9)


def parse():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=3, help="qubits; d = 2^n")
    p.add_argument("--points", type=int, default=181)
    p.add_argument("--raw", action="store_true", help="write f(theta0) rather than the marginal")
    p.add_argument("--out", default="density_curves.csv")
    return p.parse_args()


if __name__ == "__main__":
    args = parse()
    d = 2**args.n
    theta = np.linspace(0.0, math.pi, args.points)
    cols = []
    for s in SIGMAS:
        dens = normal_density(s, d)
        cols.append(dens.density_fn(theta) if args.raw else dens.marginal(theta))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta"] + [f"sigma={s:g}" for s in SIGMAS])
        for i, t in enumerate(theta):
            w.writerow([f"{t:.17g}"] + [f"{c[i]:.17g}" for c in cols])
    print(f"wrote {args.out} (d={d}, {args.points} points)")
