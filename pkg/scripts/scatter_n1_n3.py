"""Scatter data for 50 draws of N=25 products at n=1 and n=3, scaled by (2N)^(n/2).

Writes one CSV per n (draw, re, im) plus histogram and comparison files, and
prints the largest scaled modulus seen.
"""

import argparse
from pathlib import Path

import numpy as np

from qginibre import cli, serialize


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results/scatter")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--draws", type=int, default=50)
    args = parser.parse_args()

    out = Path(args.out_dir)
    for n in (1, 3):
        path = out / f"scatter_n{n}.csv"
        argv = ["sample", "--n", str(n), "--N", "25", "--m", "0", "--draws", str(args.draws),
                "--seed", str(args.seed), "--scaled", "--out", str(path)]
        if cli.run(argv) != 0:
            raise SystemExit(f"sample failed for n={n}")
        _, rows = serialize.read_csv(path)
        r = np.hypot([float(x[1]) for x in rows], [float(x[2]) for x in rows])
        print(f"n={n}: {len(r)} eigenvalues, max |z|/(2N)^(n/2) = {r.max():.4f}, beyond 1: {np.sum(r > 1)}")


if __name__ == "__main__":
    main()
