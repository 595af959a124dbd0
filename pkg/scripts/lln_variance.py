"""Cap(R_n)/n sample means (d=5) and var(Cap(R_n))/n (d=7) across n.

Prints one line per (d, n) and writes a CSV when ``--csv`` is given.
"""

from __future__ import annotations

import argparse
import csv
import math

import numpy as np

from walkcap.capacity import capacity
from walkcap.green import default_cache
from walkcap.lattice import range_of, simulate_walk


def sample_caps(n: int, d: int, seeds: int, base_seed: int) -> np.ndarray:
    cache = default_cache(d)
    return np.array([capacity(range_of(simulate_walk(n, base_seed, d, task=s)), cache) for s in range(seeds)])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--n5", type=int, nargs="+", default=[2000, 4000, 8000])
    ap.add_argument("--n7", type=int, nargs="+", default=[1000, 2000, 4000])
    ap.add_argument("--seed", type=int, default=7000)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    rows = []
    for d, ns in ((5, args.n5), (7, args.n7)):
        for n in ns:
            caps = sample_caps(n, d, args.seeds, args.seed + 100 * d + n)
            row = {
                "d": d,
                "n": n,
                "meanPerStep": caps.mean() / n,
                "stderrPerStep": caps.std(ddof=1) / n / math.sqrt(len(caps)),
                "varPerStep": caps.var(ddof=1) / n,
            }
            rows.append(row)
            print(" ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()), flush=True)
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
